#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrsim/batch.hpp"
#include "mrsim/metrics.hpp"
#include "mrsim/scenario.hpp"

namespace {

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

SweepAxis parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw mrsim::ScenarioError("sweep spec must look like key=v1,v2,...: " + spec);
  }
  SweepAxis axis;
  axis.key = spec.substr(0, eq);
  std::string rest = spec.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const auto end = comma == std::string::npos ? rest.size() : comma;
    if (end > start) axis.values.push_back(rest.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (axis.values.empty()) {
    throw mrsim::ScenarioError("sweep spec has no values: " + spec);
  }
  return axis;
}

std::string sanitize(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out += ok ? c : '-';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic two-phase cluster simulator"};

  std::string scenario_path;
  std::string policy_name;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool trace = false;
  bool serial = false;
  std::vector<std::string> sweep_specs;

  app.add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
  app.add_option("--policy", policy_name, "Speculation policy: none|yarn|bino");
  app.add_option("--seed", seed, "Random seed (overrides the scenario's)")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  app.add_option("--out", out_dir, "Output directory for CSV files");
  app.add_flag("--trace", trace, "Also write the event trace per run");
  app.add_flag("--serial", serial, "Disable the parallel batch runner");
  app.add_option("--sweep", sweep_specs,
                 "key=v1,v2,... parameter sweep; repeatable, cross-products");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(scenario_path, std::ios::binary);
    if (!in) throw mrsim::ScenarioError("cannot read scenario file: " + scenario_path);
    std::string base_text((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());

    std::vector<SweepAxis> axes;
    for (const auto& spec : sweep_specs) axes.push_back(parse_sweep(spec));

    // cross-product of all axes; one combination when there are none
    struct Combo {
      std::string label;
      std::string text;
    };
    std::vector<Combo> combos{{"run", base_text}};
    for (const auto& axis : axes) {
      std::vector<Combo> next;
      for (const auto& combo : combos) {
        for (const auto& value : axis.values) {
          Combo c;
          c.label = combo.label == "run" ? axis.key + "=" + value
                                         : combo.label + "_" + axis.key + "=" + value;
          c.text = mrsim::apply_override(combo.text, axis.key, value);
          next.push_back(std::move(c));
        }
      }
      combos = std::move(next);
    }

    std::vector<mrsim::BatchItem> items;
    for (const auto& combo : combos) {
      mrsim::BatchItem item;
      item.label = combo.label;
      item.scenario = mrsim::parse_scenario(combo.text);
      item.policy = policy_name.empty() ? item.scenario.policy
                                        : mrsim::parse_policy(policy_name);
      item.seed = seed_given ? seed : item.scenario.seed;
      item.capture_trace = trace;
      items.push_back(std::move(item));
    }

    std::filesystem::create_directories(out_dir);
    const auto outcomes = mrsim::BatchRunner(!serial).run(items);

    std::string merged = "label,count,mean_slowdown,stddev_slowdown,mean_exec_ms\n";
    for (const auto& outcome : outcomes) {
      const std::string base = sanitize(outcome.label);
      const std::filesystem::path dir(out_dir);
      write_file(dir / (base + ".csv"), mrsim::records_csv(outcome.records));

      std::vector<double> slowdowns;
      double exec_sum = 0.0;
      std::size_t exec_count = 0;
      for (const auto& r : outcome.records) {
        if (!r.complete) continue;
        slowdowns.push_back(r.slowdown);
        exec_sum += static_cast<double>(r.exec_time_ms);
        ++exec_count;
      }
      const auto summary = mrsim::summarize(
          slowdowns, items.front().scenario.output.pdf_bin_width);
      write_file(dir / (base + ".summary.csv"), mrsim::summary_csv(summary));
      write_file(dir / (base + ".pdf.csv"), mrsim::pdf_csv(summary));
      write_file(dir / (base + ".cdf.csv"), mrsim::cdf_csv(summary));
      if (trace) write_file(dir / (base + ".trace"), outcome.run.trace);

      merged += outcome.label + "," + std::to_string(summary.count) + "," +
                mrsim::format_number(summary.mean) + "," +
                mrsim::format_number(summary.stddev) + "," +
                mrsim::format_number(exec_count ? exec_sum / exec_count : 0.0) + "\n";
    }
    write_file(std::filesystem::path(out_dir) / "summary.csv", merged);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
