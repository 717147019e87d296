#include "mrsim/faults.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mrsim {

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::NodeFail: return "node_fail";
    case FaultKind::NodeSlow: return "node_slow";
    case FaultKind::MofLoss: return "mof_loss";
    case FaultKind::DiskException: return "disk_exception";
    case FaultKind::NetDelay: return "net_delay";
  }
  return "unknown";
}

std::vector<FaultEntry> expand_random_faults(const RandomFaultSpec& spec,
                                             int node_count, Rng& rng) {
  if (spec.failure_ratio < 0.0 || spec.failure_ratio > 1.0) {
    throw std::invalid_argument("random_faults: failure_ratio must lie in [0, 1]");
  }
  if (spec.count < 0) throw std::invalid_argument("random_faults: count must be >= 0");
  if (spec.window_hi_ms <= spec.window_lo_ms && spec.count > 0) {
    throw std::invalid_argument("random_faults: window must be non-empty");
  }

  int failures = static_cast<int>(
      std::llround(static_cast<double>(spec.count) * spec.failure_ratio));
  // never sink the whole cluster with permanent failures
  failures = std::min({failures, spec.count, node_count - 1});
  if (failures < 0) failures = 0;

  std::vector<FaultEntry> entries;
  entries.reserve(static_cast<std::size_t>(spec.count));
  std::set<int> failed_nodes;
  const SimTime span = spec.window_hi_ms - spec.window_lo_ms;

  for (int i = 0; i < spec.count; ++i) {
    FaultEntry entry;
    entry.trigger.kind = FaultTrigger::Kind::AtTime;
    entry.trigger.at_ms = spec.window_lo_ms + rng.uniform_u64(span);
    if (i < failures) {
      entry.kind = FaultKind::NodeFail;
      entry.duration_ms = spec.fail_duration_ms;
      int node;
      do {
        node = static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(node_count)));
      } while (failed_nodes.count(node) != 0);
      failed_nodes.insert(node);
      entry.target.kind = FaultTarget::Kind::Node;
      entry.target.node_id = node;
    } else {
      entry.kind = FaultKind::NodeSlow;
      entry.factor = spec.slow_factor;
      const std::uint64_t seconds = rng.poisson(spec.delay_mean_s);
      entry.duration_ms = std::max<SimTime>(1000, seconds * 1000);
      entry.target.kind = FaultTarget::Kind::RandomNode;
    }
    entries.push_back(entry);
  }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const FaultEntry& a, const FaultEntry& b) {
                     return a.trigger.at_ms < b.trigger.at_ms;
                   });
  return entries;
}

std::string describe(const FaultEntry& entry) {
  std::string out = to_string(entry.kind);
  out += ":";
  switch (entry.target.kind) {
    case FaultTarget::Kind::Node:
      out += "node" + std::to_string(entry.target.node_id);
      break;
    case FaultTarget::Kind::RandomNode:
      out += "random_node";
      break;
    case FaultTarget::Kind::RandomMapNode:
      out += "random_map_node";
      break;
    case FaultTarget::Kind::MapTask:
      out += "map" + std::to_string(entry.target.job_index) + "." +
             std::to_string(entry.target.task_index);
      break;
  }
  return out;
}

}  // namespace mrsim
