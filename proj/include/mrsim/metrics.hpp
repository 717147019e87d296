#pragma once

#include <string>
#include <vector>

#include "mrsim/simulator.hpp"

namespace mrsim {

struct MetricsRecord {
  int job_id = 0;
  double input_mb = 0.0;
  PolicyKind policy = PolicyKind::None;
  SimTime exec_time_ms = 0;
  SimTime baseline_ms = 0;  // fault-free reference with the same seed
  double slowdown = 0.0;    // exec_time / baseline_time
  int spec_tasks = 0;
  double wasted_work_ms = 0.0;
  bool complete = false;  // both runs finished; incomplete rows leave aggregates
};

// Joins a policy run against its fault-free reference run by job id.
std::vector<MetricsRecord> build_records(const RunResult& run, const RunResult& reference);

// Header plus one row per record, stable column order and number formatting:
// job_id,input_size,policy,exec_time_ms,baseline_ms,slowdown,spec_tasks,wasted_work
std::string records_csv(const std::vector<MetricsRecord>& records);

struct PdfBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double probability = 0.0;
};

struct CdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

struct DistributionSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::vector<PdfBin> pdf;
  std::vector<CdfPoint> cdf;
};

// Mean, population stddev, fixed-width histogram anchored at zero, and the
// empirical CDF over one value per distinct sample.
DistributionSummary summarize(std::vector<double> values, double bin_width);

std::string summary_csv(const DistributionSummary& summary);
std::string pdf_csv(const DistributionSummary& summary);
std::string cdf_csv(const DistributionSummary& summary);

// Shared fixed-precision float formatting for every CSV emitter.
std::string format_number(double value);

}  // namespace mrsim
