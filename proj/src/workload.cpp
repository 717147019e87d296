#include "mrsim/workload.hpp"

#include <cmath>

namespace mrsim {

std::vector<JobSpec> generate_workload(const WorkloadConfig& config, Rng& rng) {
  if (config.size_mix.empty()) throw ScenarioError("workload: empty size mix");
  if (!(config.jobs_per_s > 0.0)) throw ScenarioError("workload: jobs_per_s must be > 0");
  if (config.total_jobs < 1) throw ScenarioError("workload: total_jobs must be >= 1");
  double total_prob = 0.0;
  for (const auto& c : config.size_mix) total_prob += c.probability;
  if (std::abs(total_prob - 1.0) > 1e-9) {
    throw ScenarioError("workload: size mix probabilities must sum to 1");
  }

  const double mean_gap_ms = 1000.0 / config.jobs_per_s;
  std::vector<JobSpec> jobs;
  jobs.reserve(static_cast<std::size_t>(config.total_jobs));
  double clock_ms = 0.0;
  for (int i = 0; i < config.total_jobs; ++i) {
    clock_ms += rng.exponential(mean_gap_ms);
    const double pick = rng.uniform_double();
    double cumulative = 0.0;
    const SizeClass* chosen = &config.size_mix.back();
    for (const auto& c : config.size_mix) {
      cumulative += c.probability;
      if (pick < cumulative) {
        chosen = &c;
        break;
      }
    }
    JobSpec spec;
    spec.arrival_ms = static_cast<SimTime>(std::llround(clock_ms));
    spec.input_mb = chosen->mb;
    spec.reduces = chosen->reduces;
    jobs.push_back(spec);
  }
  return jobs;
}

}  // namespace mrsim
