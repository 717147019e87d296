#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrsim/engine.hpp"
#include "mrsim/faults.hpp"

namespace mrsim {

struct ClusterConfig {
  int nodes = 8;
  int slots_per_node = 4;
  int size_neighbor = 4;
  SimTime heartbeat_interval_ms = 1000;
};

struct ModelConfig {
  double split_mb = 128.0;
  double map_rate_mb_s = 8.0;      // map input consumed per second
  double reduce_rate_mb_s = 20.0;  // reduce phase throughput
  double shuffle_rate_mb_s = 20.0; // per-fetch transfer throughput
  double map_output_ratio = 1.0;   // map output bytes / input bytes
  int num_spills = 5;
  SimTime fetch_retry_interval_ms = 3000;
  int max_fetch_failures = 4;
  int max_attempts_per_task = 4;

  double map_nominal_ms(double split_mb_in) const {
    return split_mb_in / map_rate_mb_s * 1000.0;
  }
  double fetch_nominal_ms(double partition_mb) const {
    return partition_mb / shuffle_rate_mb_s * 1000.0;
  }
  double reduce_nominal_ms(double shuffle_mb) const {
    return shuffle_mb / reduce_rate_mb_s * 1000.0;
  }
};

struct JobSpec {
  SimTime arrival_ms = 0;
  double input_mb = 0.0;
  int reduces = 1;
  int pin_node = -1;
};

struct SizeClass {
  double mb = 0.0;
  double probability = 0.0;
  int reduces = 1;
};

struct WorkloadConfig {
  std::vector<SizeClass> size_mix;
  double jobs_per_s = 0.0;
  int total_jobs = 0;
};

struct BaselineConfig {
  SimTime wakeup_interval_ms = 1000;
  double slow_task_threshold = 1.0;  // sigmas below the mean progress rate
  SimTime fixed_delay_ms = 15000;    // minimum gap between speculative launches
  int concurrent_cap = 1;            // speculative attempts in flight per job
  SimTime task_timeout_ms = 600000;  // silence after which a node's work is dead
};

struct BinoConfig {
  double threshold_slowdown = 0.1;
  int window_length = 4;  // responsiveness history depth
  int coll_init_num = 1;
  int coll_multiply = 2;
  SimTime progress_check_interval_ms = 500;
  double safety_factor = 1.5;
  bool assess_spatial = true;
  bool assess_temporal = true;
  bool assess_failure = true;
  bool spatial_exclude_self = false;
};

enum class PolicyKind { None, Yarn, Bino };

const char* to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

struct OutputConfig {
  double pdf_bin_width = 0.25;
};

struct ScenarioConfig {
  ClusterConfig cluster;
  ModelConfig model;
  std::vector<JobSpec> jobs;
  std::optional<WorkloadConfig> workload;
  FaultScript faults;
  std::optional<RandomFaultSpec> random_faults;
  PolicyKind policy = PolicyKind::Yarn;
  BaselineConfig baseline;
  BinoConfig bino;
  OutputConfig output;
  std::uint64_t max_events = EventQueue::kDefaultMaxEvents;
  std::uint64_t seed = 1;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Parses and validates scenario JSON text; throws ScenarioError with a
// human-readable diagnostic on any unknown key, bad type or out-of-range value.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario_file(const std::string& path);

// Applies a "dotted.path=value" override onto scenario JSON text (used by
// parameter sweeps) and returns the rewritten text. Values parse as JSON
// scalars when possible, otherwise as strings.
std::string apply_override(const std::string& json_text, const std::string& dotted_key,
                           const std::string& value);

// Strips faults and disables speculation; reference runs share everything else
// with the scenario, including the seed.
ScenarioConfig reference_variant(const ScenarioConfig& config);

}  // namespace mrsim
