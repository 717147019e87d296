#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mrsim/engine.hpp"
#include "mrsim/scenario.hpp"

namespace mrsim {

class Simulator;

enum class LaunchReason {
  Initial,
  Relaunch,              // replacement for a failed attempt, from scratch
  BaselineSpeculation,   // slow-outlier copy picked by the serial speculator
  NeighborhoodSpeculation,  // collective copy placed inside the neighborhood
  CollectiveWave,        // collective copy placed beyond the neighborhood
  CompletedTaskRecovery, // re-execution of a finished map whose output is gone
  RollbackResume,        // restart from the last spill on the original node
  RollbackFresh,         // restart from scratch on a fast node
};

const char* to_string(LaunchReason reason);

inline bool is_speculative(LaunchReason reason) {
  switch (reason) {
    case LaunchReason::Initial:
    case LaunchReason::Relaunch:
    case LaunchReason::RollbackResume:
      return false;
    default:
      return true;
  }
}

struct SpeculationDecision {
  int task_id = 0;
  LaunchReason reason = LaunchReason::Initial;
  std::vector<int> preferred_nodes;
  int pin_node = -1;           // launch only on this node (wait for a slot)
  int resume_spill_index = 0;  // > 0 resumes a map from this spill
  int resume_from_attempt = -1;
  int episode_id = -1;         // collective episode this launch belongs to
  int wave_index = -1;         // -1 for neighborhood-phase launches
};

// One collective speculation episode: waves of size init * multiply^i beyond
// the neighborhood, after the neighborhood's free slots are used up.
struct WaveRecord {
  int episode_id = 0;
  int job_id = 0;
  int origin_node = 0;
  int neighborhood_launches = 0;
  std::vector<int> wave_sizes;
};

struct RespecRecord {
  int map_task_id = 0;
  SimTime at_ms = 0;
  int consecutive_failures = 0;  // counter value when triggered (0 for assessments)
  bool via_failure_assessment = false;
};

struct PolicyStats {
  std::vector<SimTime> baseline_launches;
  std::vector<WaveRecord> episodes;
  std::vector<RespecRecord> completed_respecs;
  int rollback_resume_launches = 0;
  int rollback_fresh_launches = 0;
  int failure_assessments = 0;
  int spatial_verdicts = 0;
  int temporal_verdicts = 0;
};

class SpeculationPolicy {
 public:
  virtual ~SpeculationPolicy() = default;
  virtual PolicyKind kind() const = 0;
  // 0 disables periodic wakeups
  virtual SimTime wakeup_interval() const = 0;
  virtual void on_wakeup(Simulator& sim, SimTime now) = 0;
  virtual void on_heartbeat(Simulator& sim, int node_id, SimTime now) = 0;
  // The policy owns recovery: it must issue replacement launches (or decide
  // not to). Called for failures of individual attempts only; whole-node
  // failures discovered by assessments flow through the policy's own path.
  virtual void on_attempt_failed(Simulator& sim, int attempt_id) = 0;
  virtual void on_attempt_finished(Simulator& sim, int attempt_id) = 0;
  virtual void on_fetch_failure(Simulator& sim, int reduce_task_id, int map_task_id,
                                int consecutive) = 0;
  // Fired when a requested launch actually lands on a node (possibly after
  // waiting in the pending queue).
  virtual void on_launched(Simulator& sim, const SpeculationDecision& decision,
                           int attempt_id) = 0;
  PolicyStats& stats() { return stats_; }
  const PolicyStats& stats() const { return stats_; }

 protected:
  PolicyStats stats_;
};

// ---- pure assessment arithmetic, shared by the policies and the tests ----

// Population standard deviation.
double population_stddev(std::span<const double> values);

// A node is spatially slow when its per-node progress rate sits strictly more
// than one population standard deviation below the neighborhood mean. Nodes
// without a defined rate are skipped; fewer than two defined rates abstain.
// `self` indexes into `rates`; when exclude_self is set the node's own rate is
// left out of the mean/stddev population.
bool spatially_slow(std::span<const std::optional<double>> rates, std::size_t self,
                    bool exclude_self);

// A node turned temporally slow when its aggregate progress delta collapses to
// strictly less than threshold * previous delta. A non-positive previous delta
// abstains (no baseline to compare against).
bool temporally_slow(double delta_prev, double delta_curr, double threshold);

// Presumed failed once the heartbeat gap strictly exceeds the node's threshold.
bool failure_assessed(SimTime now, SimTime last_heartbeat, double fail_threshold_ms);

inline int wave_size(int init_num, int multiply, int wave_index) {
  int size = init_num;
  for (int i = 0; i < wave_index; ++i) size *= multiply;
  return size;
}

std::unique_ptr<SpeculationPolicy> make_policy(PolicyKind kind, const ScenarioConfig& cfg);

}  // namespace mrsim
