#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "mrsim/simulator.hpp"
#include "policy_impl.hpp"

namespace mrsim {
namespace {

// Serial per-job speculator modeled on stock Hadoop/YARN behavior: at most one
// outlier pick per wakeup per job, a fixed delay between speculative launches,
// a small cap on in-flight speculative attempts, and a long task timeout as
// the only defense against a silent node.
class YarnPolicy final : public SpeculationPolicy {
 public:
  explicit YarnPolicy(const ScenarioConfig& cfg) : cfg_(cfg.baseline) {}

  PolicyKind kind() const override { return PolicyKind::Yarn; }
  SimTime wakeup_interval() const override { return cfg_.wakeup_interval_ms; }

  void on_wakeup(Simulator& sim, SimTime now) override {
    scan_timeouts(sim, now);
    for (auto& j : sim.jobs()) {
      if (j.state != JobState::Running) continue;
      consider_job(sim, j, now);
    }
  }

  void on_heartbeat(Simulator&, int, SimTime) override {}
  void on_attempt_finished(Simulator&, int) override {}
  void on_fetch_failure(Simulator&, int, int, int) override {}

  void on_attempt_failed(Simulator& sim, int attempt_id) override {
    const TaskAttempt& a = sim.attempt(attempt_id);
    const Task& t = sim.task(a.task_id);
    if (t.completed) return;
    if (sim.running_attempt_count(t.task_id) > 0) return;
    SpeculationDecision d;
    d.task_id = t.task_id;
    d.reason = LaunchReason::Relaunch;
    for (const auto& node : sim.cluster().nodes()) {
      if (node.node_id != a.node_id) d.preferred_nodes.push_back(node.node_id);
    }
    sim.request_launch(std::move(d));
  }

  void on_launched(Simulator& sim, const SpeculationDecision& decision,
                   int attempt_id) override {
    if (decision.reason != LaunchReason::BaselineSpeculation) return;
    const TaskAttempt& a = sim.attempt(attempt_id);
    last_spec_ms_[a.job_id] = sim.now();
    issued_.erase(a.job_id);
    stats_.baseline_launches.push_back(sim.now());
  }

 private:
  void scan_timeouts(Simulator& sim, SimTime now) {
    for (auto& node : sim.cluster().nodes()) {
      if (node.running_attempts.empty()) continue;
      if (now - node.last_heartbeat_at <= cfg_.task_timeout_ms) continue;
      // one declaration per silence episode
      auto handled = timeout_handled_.find(node.node_id);
      if (handled != timeout_handled_.end() &&
          handled->second == node.last_heartbeat_at) {
        continue;
      }
      timeout_handled_[node.node_id] = node.last_heartbeat_at;
      sim.declare_node_dead(node.node_id, true);
    }
  }

  void consider_job(Simulator& sim, const Job& j, SimTime now) {
    if (issued_.count(j.job_id)) return;  // a pick is still waiting for a slot
    auto last = last_spec_ms_.find(j.job_id);
    if (last != last_spec_ms_.end() && now - last->second < cfg_.fixed_delay_ms) return;

    int running_spec = 0;
    std::vector<double> pool;
    struct Candidate {
      double rate;
      int task_id;
      int node_id;
    };
    std::vector<Candidate> candidates;
    const auto scan = [&](const std::vector<int>& task_ids) {
      for (int task_id : task_ids) {
        const Task& t = sim.task(task_id);
        int running = 0;
        std::optional<double> solo_rate;
        int solo_node = -1;
        for (int attempt_id : t.attempts) {
          const TaskAttempt& a = sim.attempt(attempt_id);
          if (!a.running()) continue;
          ++running;
          if (a.is_speculative) ++running_spec;
          if (auto rate = sim.reported_rate(a)) {
            pool.push_back(*rate);
            solo_rate = *rate;
            solo_node = a.node_id;
          }
        }
        if (!t.completed && running == 1 && solo_rate) {
          candidates.push_back({*solo_rate, task_id, solo_node});
        }
      }
    };
    scan(j.map_tasks);
    scan(j.reduce_tasks);

    if (running_spec >= cfg_.concurrent_cap) return;
    if (pool.size() < 2) return;
    double mean = 0.0;
    for (double v : pool) mean += v;
    mean /= static_cast<double>(pool.size());
    const double cut = mean - cfg_.slow_task_threshold * population_stddev(pool);

    const Candidate* pick = nullptr;
    for (const auto& c : candidates) {
      if (!(c.rate < cut)) continue;
      if (!pick || c.rate < pick->rate ||
          (c.rate == pick->rate && c.task_id < pick->task_id)) {
        pick = &c;
      }
    }
    if (!pick) return;

    issued_.insert(j.job_id);
    SpeculationDecision d;
    d.task_id = pick->task_id;
    d.reason = LaunchReason::BaselineSpeculation;
    for (const auto& node : sim.cluster().nodes()) {
      if (node.node_id != pick->node_id) d.preferred_nodes.push_back(node.node_id);
    }
    sim.request_launch(std::move(d));
  }

  BaselineConfig cfg_;
  std::map<int, SimTime> last_spec_ms_;
  std::set<int> issued_;
  std::map<int, SimTime> timeout_handled_;
};

}  // namespace

std::unique_ptr<SpeculationPolicy> make_yarn_policy(const ScenarioConfig& cfg) {
  return std::make_unique<YarnPolicy>(cfg);
}

}  // namespace mrsim
