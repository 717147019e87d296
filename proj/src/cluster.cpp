#include "mrsim/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace mrsim {

const char* to_string(NodeHealth health) {
  switch (health) {
    case NodeHealth::Healthy: return "healthy";
    case NodeHealth::Slow: return "slow";
    case NodeHealth::Failed: return "failed";
  }
  return "unknown";
}

double weighted_loss_estimate(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n == 0) return 0.0;
  // weight 2^n for the newest entry (index n-1) down to 2^1 for the oldest,
  // normalised by sum_{k=1..n} 2^k = 2^(n+1) - 2.
  double numerator = 0.0;
  double weight = 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    numerator += weight * window[k];
    weight *= 2.0;
  }
  const double denominator = weight - 2.0;  // weight is now 2^(n+1)
  return numerator / denominator;
}

void ResponsivenessHistory::record(double lost_ms, double heartbeat_interval_ms,
                                   double safety_factor) {
  window.push_back(lost_ms);
  if (static_cast<int>(window.size()) > limit) {
    window.erase(window.begin());
  }
  estimated_next_ms = weighted_loss_estimate(window);
  fail_threshold_ms =
      std::max(3.0 * heartbeat_interval_ms, safety_factor * estimated_next_ms);
}

std::vector<std::vector<int>> build_neighborhoods(int node_count, int size_neighbor) {
  if (node_count <= 0) throw std::invalid_argument("node_count must be > 0");
  if (size_neighbor < 2) throw std::invalid_argument("size_neighbor must be >= 2");
  std::vector<std::vector<int>> groups;
  for (int id = 0; id < node_count; ++id) {
    if (groups.empty() || static_cast<int>(groups.back().size()) == size_neighbor) {
      groups.emplace_back();
    }
    groups.back().push_back(id);
  }
  // A trailing singleton has nobody to compare against; fold it into the
  // previous group (unless the whole cluster is a single node).
  if (groups.size() >= 2 && groups.back().size() < 2) {
    auto tail = groups.back();
    groups.pop_back();
    auto& prev = groups.back();
    prev.insert(prev.end(), tail.begin(), tail.end());
  }
  return groups;
}

Cluster::Cluster(int node_count, int slots_per_node, int size_neighbor,
                 SimTime heartbeat_interval_ms)
    : heartbeat_interval_ms_(heartbeat_interval_ms) {
  if (slots_per_node <= 0) throw std::invalid_argument("slots_per_node must be > 0");
  if (heartbeat_interval_ms == 0) {
    throw std::invalid_argument("heartbeat_interval_ms must be > 0");
  }
  nodes_.resize(static_cast<std::size_t>(node_count));
  for (int id = 0; id < node_count; ++id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    n.node_id = id;
    n.container_slots = slots_per_node;
  }
  neighborhoods_ = build_neighborhoods(node_count, size_neighbor);
  membership_.assign(static_cast<std::size_t>(node_count), -1);
  for (std::size_t g = 0; g < neighborhoods_.size(); ++g) {
    for (int id : neighborhoods_[g]) {
      membership_[static_cast<std::size_t>(id)] = static_cast<int>(g);
    }
  }
}

std::optional<int> Cluster::allocate(std::span<const int> preferred) const {
  for (int id : preferred) {
    if (id < 0 || id >= size()) continue;
    const auto& n = node(id);
    if (n.health != NodeHealth::Failed && n.has_free_slot()) return id;
  }
  for (const auto& n : nodes_) {
    if (n.health != NodeHealth::Failed && n.has_free_slot()) return n.node_id;
  }
  return std::nullopt;
}

int Cluster::free_slot_count() const {
  int total = 0;
  for (const auto& n : nodes_) {
    if (n.health != NodeHealth::Failed) total += n.free_slots();
  }
  return total;
}

}  // namespace mrsim
