#pragma once

#include <string>
#include <vector>

#include "mrsim/engine.hpp"
#include "mrsim/rng.hpp"

namespace mrsim {

enum class FaultKind { NodeFail, NodeSlow, MofLoss, DiskException, NetDelay };

const char* to_string(FaultKind kind);

struct FaultTrigger {
  enum class Kind {
    AtTime,        // fire at a fixed instant
    AtRandomTime,  // fire at a uniform instant in [lo, hi); resolved at start
    MapProgress,   // first event where a job's mean map progress >= threshold
    TaskProgress,  // first event where the target map task's progress >= threshold
  };
  Kind kind = Kind::AtTime;
  SimTime at_ms = 0;
  SimTime window_lo_ms = 0;
  SimTime window_hi_ms = 0;
  double progress = 0.0;
  int job_index = 0;  // MapProgress: which job's maps are averaged
};

struct FaultTarget {
  enum class Kind {
    Node,           // explicit node id
    RandomNode,     // uniform over nodes, drawn from the faults stream at fire
    RandomMapNode,  // uniform over nodes hosting at least one running map attempt
    MapTask,        // (job index, map index); DiskException / MofLoss / progress
  };
  Kind kind = Kind::Node;
  int node_id = -1;
  int job_index = 0;
  int task_index = 0;
};

struct FaultEntry {
  FaultKind kind = FaultKind::NodeFail;
  FaultTrigger trigger;
  FaultTarget target;
  double factor = 1.0;      // NodeSlow / NetDelay stretch
  SimTime duration_ms = 0;  // 0 = permanent
  bool fired = false;
};

struct FaultScript {
  std::vector<FaultEntry> entries;
};

// Randomized fault population: `count` events spread uniformly over the window.
// round(count * failure_ratio) of them become node failures on distinct random
// nodes (always leaving at least one node untouched); the rest become slowdowns
// whose durations are Poisson-distributed in seconds.
struct RandomFaultSpec {
  int count = 0;
  double failure_ratio = 0.0;
  double slow_factor = 3.0;
  double delay_mean_s = 30.0;
  SimTime window_lo_ms = 0;
  SimTime window_hi_ms = 0;
  SimTime fail_duration_ms = 0;  // 0 = permanent failures
};

// Deterministic expansion: the same spec, node count and rng state always
// produce the same concrete entries, ordered by firing time.
std::vector<FaultEntry> expand_random_faults(const RandomFaultSpec& spec,
                                             int node_count, Rng& rng);

std::string describe(const FaultEntry& entry);

}  // namespace mrsim
