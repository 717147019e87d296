#include "mrsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "mrsim/policy.hpp"

namespace mrsim {

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::vector<MetricsRecord> build_records(const RunResult& run,
                                         const RunResult& reference) {
  std::map<int, const JobOutcome*> reference_jobs;
  for (const auto& j : reference.jobs) reference_jobs[j.job_id] = &j;

  std::vector<MetricsRecord> records;
  records.reserve(run.jobs.size());
  for (const auto& j : run.jobs) {
    MetricsRecord r;
    r.job_id = j.job_id;
    r.input_mb = j.input_mb;
    r.policy = run.policy;
    r.exec_time_ms = j.exec_ms;
    r.spec_tasks = j.speculative_launches;
    r.wasted_work_ms = j.wasted_work_ms;
    const auto ref = reference_jobs.find(j.job_id);
    if (ref != reference_jobs.end() && ref->second->completed) {
      r.baseline_ms = ref->second->exec_ms;
    }
    r.complete = j.completed && r.baseline_ms > 0;
    if (r.complete) {
      r.slowdown = static_cast<double>(r.exec_time_ms) /
                   static_cast<double>(r.baseline_ms);
    }
    records.push_back(r);
  }
  return records;
}

std::string records_csv(const std::vector<MetricsRecord>& records) {
  std::string out =
      "job_id,input_size,policy,exec_time_ms,baseline_ms,slowdown,spec_tasks,"
      "wasted_work\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%d,%.0f,%s,%llu,%llu,%s,%d,%s\n", r.job_id,
                  r.input_mb, to_string(r.policy),
                  static_cast<unsigned long long>(r.exec_time_ms),
                  static_cast<unsigned long long>(r.baseline_ms),
                  format_number(r.slowdown).c_str(), r.spec_tasks,
                  format_number(r.wasted_work_ms).c_str());
    out += line;
  }
  return out;
}

DistributionSummary summarize(std::vector<double> values, double bin_width) {
  DistributionSummary s;
  s.count = values.size();
  if (values.empty()) return s;

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  s.mean = mean;
  s.stddev = population_stddev(values);

  std::sort(values.begin(), values.end());

  // histogram anchored at zero so bin edges are stable across runs
  std::map<long long, std::size_t> bins;
  for (double v : values) {
    bins[static_cast<long long>(std::floor(v / bin_width))] += 1;
  }
  for (const auto& [index, count] : bins) {
    PdfBin bin;
    bin.lo = static_cast<double>(index) * bin_width;
    bin.hi = bin.lo + bin_width;
    bin.count = count;
    bin.probability = static_cast<double>(count) / static_cast<double>(s.count);
    s.pdf.push_back(bin);
  }

  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool last_of_value = i + 1 == values.size() || values[i + 1] != values[i];
    if (!last_of_value) continue;
    CdfPoint point;
    point.value = values[i];
    point.cumulative = static_cast<double>(i + 1) / static_cast<double>(s.count);
    s.cdf.push_back(point);
  }
  return s;
}

std::string summary_csv(const DistributionSummary& summary) {
  std::string out = "stat,value\n";
  out += "count," + std::to_string(summary.count) + "\n";
  out += "mean," + format_number(summary.mean) + "\n";
  out += "stddev," + format_number(summary.stddev) + "\n";
  return out;
}

std::string pdf_csv(const DistributionSummary& summary) {
  std::string out = "bin_lo,bin_hi,count,probability\n";
  for (const auto& bin : summary.pdf) {
    out += format_number(bin.lo) + "," + format_number(bin.hi) + "," +
           std::to_string(bin.count) + "," + format_number(bin.probability) + "\n";
  }
  return out;
}

std::string cdf_csv(const DistributionSummary& summary) {
  std::string out = "value,cumulative\n";
  for (const auto& point : summary.cdf) {
    out += format_number(point.value) + "," + format_number(point.cumulative) + "\n";
  }
  return out;
}

}  // namespace mrsim
