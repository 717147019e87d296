#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mrsim/engine.hpp"

namespace mrsim {

enum class NodeHealth { Healthy, Slow, Failed };

const char* to_string(NodeHealth health);

// Exponentially weighted estimate of the next heartbeat-loss duration from the
// most recent observations (newest entry last). With window w_1..w_n (w_n
// newest) the estimate is sum_k 2^(n+1-k) * w_k / sum_k 2^k: the newest entry
// carries half the total weight, the one before it a quarter, and so on.
double weighted_loss_estimate(std::span<const double> window);

struct ResponsivenessHistory {
  std::vector<double> window;  // observed loss durations in ms, newest last
  int limit = 4;               // max retained observations
  double estimated_next_ms = 0.0;
  double fail_threshold_ms = 0.0;

  // Fold one observed loss duration into the window and refresh the estimate
  // and the per-node failure threshold:
  //   threshold = max(3 * heartbeat_interval, safety_factor * estimate).
  void record(double lost_ms, double heartbeat_interval_ms, double safety_factor);
};

struct NodeState {
  int node_id = 0;
  int container_slots = 0;
  NodeHealth health = NodeHealth::Healthy;
  double slow_factor = 1.0;       // progress stretch while Slow; 1.0 otherwise
  double net_delay_factor = 1.0;  // stretch applied to fetches touching this node
  SimTime last_heartbeat_at = 0;
  ResponsivenessHistory responsiveness;
  std::set<int> running_attempts;  // attempt ids occupying container slots

  // handles into the event queue, managed by the driver
  EventQueue::Handle heartbeat_event = 0;
  EventQueue::Handle health_restore_event = 0;
  EventQueue::Handle net_restore_event = 0;

  bool has_free_slot() const {
    return static_cast<int>(running_attempts.size()) < container_slots;
  }
  int free_slots() const {
    return container_slots - static_cast<int>(running_attempts.size());
  }
  // Progress stretch for work hosted on this node; Failed nodes make none.
  double progress_stretch() const {
    return health == NodeHealth::Slow ? slow_factor : 1.0;
  }
};

// Static partition of node ids in ascending order into groups of
// `size_neighbor`. A trailing group of fewer than two nodes is merged into the
// previous group, so every neighborhood has at least two members (single-node
// clusters yield one singleton group).
std::vector<std::vector<int>> build_neighborhoods(int node_count, int size_neighbor);

class Cluster {
 public:
  Cluster(int node_count, int slots_per_node, int size_neighbor,
          SimTime heartbeat_interval_ms);

  int size() const { return static_cast<int>(nodes_.size()); }
  SimTime heartbeat_interval() const { return heartbeat_interval_ms_; }

  NodeState& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const NodeState& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::span<NodeState> nodes() { return nodes_; }
  std::span<const NodeState> nodes() const { return nodes_; }

  int neighborhood_index(int node_id) const {
    return membership_[static_cast<std::size_t>(node_id)];
  }
  const std::vector<int>& neighborhood_of(int node_id) const {
    return neighborhoods_[static_cast<std::size_t>(neighborhood_index(node_id))];
  }
  const std::vector<std::vector<int>>& neighborhoods() const { return neighborhoods_; }

  // Picks a node with a free slot: preferred ids first (in the given order),
  // then any non-failed node in ascending id order. Failed nodes never offer
  // containers.
  std::optional<int> allocate(std::span<const int> preferred) const;

  // Total free slots on non-failed nodes.
  int free_slot_count() const;

 private:
  std::vector<NodeState> nodes_;
  std::vector<std::vector<int>> neighborhoods_;
  std::vector<int> membership_;
  SimTime heartbeat_interval_ms_;
};

}  // namespace mrsim
