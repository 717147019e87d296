#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrsim/batch.hpp"
#include "mrsim/metrics.hpp"

namespace {

mrsim::ScenarioConfig bench_scenario() {
  mrsim::ScenarioConfig cfg;
  cfg.cluster.nodes = 8;
  cfg.cluster.slots_per_node = 4;
  mrsim::WorkloadConfig workload;
  workload.size_mix = {{1024.0, 0.85, 1}, {10240.0, 0.08, 2}, {51200.0, 0.05, 4},
                       {102400.0, 0.02, 4}};
  workload.jobs_per_s = 0.02;
  workload.total_jobs = 15;
  cfg.workload = workload;
  mrsim::RandomFaultSpec faults;
  faults.count = 4;
  faults.failure_ratio = 0.5;
  faults.window_lo_ms = 30000;
  faults.window_hi_ms = 600000;
  faults.fail_duration_ms = 180000;
  cfg.random_faults = faults;
  return cfg;
}

std::vector<mrsim::BatchItem> bench_items(int count) {
  std::vector<mrsim::BatchItem> items;
  const auto cfg = bench_scenario();
  for (int i = 0; i < count; ++i) {
    mrsim::BatchItem item;
    item.scenario = cfg;
    item.policy = i % 2 == 0 ? mrsim::PolicyKind::Yarn : mrsim::PolicyKind::Bino;
    item.seed = static_cast<std::uint64_t>(i / 2 + 1);
    item.label = "bench_" + std::to_string(i);
    items.push_back(std::move(item));
  }
  return items;
}

std::string fingerprint(const std::vector<mrsim::BatchOutcome>& outcomes) {
  std::string all;
  for (const auto& outcome : outcomes) all += mrsim::records_csv(outcome.records);
  return all;
}

double run_timed(bool parallel, const std::vector<mrsim::BatchItem>& items,
                 std::string& out_fingerprint) {
  const auto start = std::chrono::steady_clock::now();
  const auto outcomes = mrsim::BatchRunner(parallel).run(items);
  const auto stop = std::chrono::steady_clock::now();
  out_fingerprint = fingerprint(outcomes);
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel batch runner benchmark"};
  int count = 12;
  app.add_option("--items", count, "Number of batch items")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const auto items = bench_items(count);
  std::string serial_csv;
  std::string parallel_csv;
  const double serial_ms = run_timed(false, items, serial_csv);
  const double parallel_ms = run_timed(true, items, parallel_csv);

  std::printf("items            %d\n", count);
  std::printf("serial           %.1f ms\n", serial_ms);
  std::printf("parallel         %.1f ms\n", parallel_ms);
  std::printf("speedup          %.2fx\n", parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0);
  const bool identical = serial_csv == parallel_csv;
  std::printf("outputs identical %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
