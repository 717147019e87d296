#pragma once

#include <vector>

#include "mrsim/rng.hpp"
#include "mrsim/scenario.hpp"

namespace mrsim {

// Samples `total_jobs` jobs: sizes drawn from the size mix, inter-arrival gaps
// exponential with mean 1000 / jobs_per_s milliseconds (Poisson arrivals).
// Deterministic for a given rng state. Throws ScenarioError on an invalid spec.
std::vector<JobSpec> generate_workload(const WorkloadConfig& config, Rng& rng);

}  // namespace mrsim
