#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "mrsim/simulator.hpp"
#include "policy_impl.hpp"

namespace mrsim {
namespace {

// One collective speculation episode: a flagged (job, node) pair plus the
// stragglers claimed from it. Copies go to free neighborhood slots first; the
// remainder launches in waves of size init * multiply^i beyond the
// neighborhood, each wave gated on the monitored copy outpacing its original.
struct Episode {
  int episode_id = 0;
  int job_id = 0;
  int origin_node = 0;
  bool respec = false;          // recovers a completed map's lost output
  std::deque<int> queue;        // task ids awaiting a copy, ascending
  std::map<int, int> launched;  // task id -> live copy attempt id
  int wave_index = -1;
  int monitor_attempt = -1;
  bool await_monitor = false;  // latest wave not yet confirmed faster
  bool force_wave = false;     // a failure reopened the ramp without a verdict

  bool finished() const { return queue.empty() && launched.empty(); }
};

void insert_sorted(std::deque<int>& queue, int task_id) {
  auto it = std::lower_bound(queue.begin(), queue.end(), task_id);
  if (it == queue.end() || *it != task_id) queue.insert(it, task_id);
}

class BinoPolicy final : public SpeculationPolicy {
 public:
  explicit BinoPolicy(const ScenarioConfig& cfg)
      : cfg_(cfg.bino), heartbeat_ms_(cfg.cluster.heartbeat_interval_ms) {}

  PolicyKind kind() const override { return PolicyKind::Bino; }
  SimTime wakeup_interval() const override { return cfg_.progress_check_interval_ms; }

  void on_heartbeat(Simulator& sim, int node_id, SimTime now) override {
    marked_failed_.erase(node_id);  // the node is talking again
    if (cfg_.assess_temporal) temporal_sample(sim, node_id, now);
    prev_hb_[node_id] = now;
  }

  void on_wakeup(Simulator& sim, SimTime now) override {
    if (cfg_.assess_failure) failure_scan(sim, now);
    if (cfg_.assess_temporal) silent_node_scan(sim, now);
    if (cfg_.assess_spatial) spatial_scan(sim);
    pump_episodes(sim);
  }

  void on_attempt_failed(Simulator& sim, int attempt_id) override {
    const TaskAttempt a = sim.attempt(attempt_id);  // copy; vector may grow
    Task& t = sim.task(a.task_id);
    if (sim.job(a.job_id).state != JobState::Running) return;

    auto claim = claim_.find(a.task_id);
    if (claim != claim_.end()) {
      Episode& e = episodes_[static_cast<std::size_t>(claim->second)];
      auto launched = e.launched.find(a.task_id);
      if (launched != e.launched.end() && launched->second == attempt_id) {
        // the episode's own copy died: requeue and reopen the ramp
        e.launched.erase(launched);
        insert_sorted(e.queue, a.task_id);
        e.force_wave = true;
        if (e.monitor_attempt == attempt_id) e.monitor_attempt = -1;
        pump_episode(sim, e);
        return;
      }
      if (sim.running_attempt_count(a.task_id) > 0) return;  // copy still racing
      // both the original and the copy are gone: release and fall through
      e.launched.erase(a.task_id);
      auto queued = std::find(e.queue.begin(), e.queue.end(), a.task_id);
      if (queued != e.queue.end()) e.queue.erase(queued);
      claim_.erase(claim);
    }

    if (t.completed) {
      // a recovery copy died before replacing the lost output; let the next
      // fetch failure or assessment trigger a fresh recovery
      if (t.recovery_pending && !sim.output_available(t.task_id)) {
        t.recovery_pending = false;
      }
      return;
    }
    if (sim.running_attempt_count(a.task_id) > 0) return;
    if (t.kind == TaskKind::Map) {
      plan_rollback(sim, a);
    } else {
      SpeculationDecision d;
      d.task_id = a.task_id;
      d.reason = LaunchReason::Relaunch;
      d.preferred_nodes = fast_node_order(sim, a.job_id, a.node_id);
      sim.request_launch(std::move(d));
    }
  }

  void on_attempt_finished(Simulator& sim, int attempt_id) override {
    const TaskAttempt& a = sim.attempt(attempt_id);
    auto claim = claim_.find(a.task_id);
    if (claim == claim_.end()) return;
    Episode& e = episodes_[static_cast<std::size_t>(claim->second)];
    auto queued = std::find(e.queue.begin(), e.queue.end(), a.task_id);
    if (queued != e.queue.end()) e.queue.erase(queued);
    const auto launched = e.launched.find(a.task_id);
    if (e.monitor_attempt >= 0 &&
        sim.attempt(e.monitor_attempt).task_id == a.task_id) {
      // the monitored race resolved outright
      e.await_monitor = false;
      e.monitor_attempt = -1;
    }
    if (launched != e.launched.end()) e.launched.erase(launched);
    claim_.erase(claim);
  }

  void on_fetch_failure(Simulator& sim, int, int map_task_id, int consecutive) override {
    if (consecutive != 2) return;  // two consecutive misses prove the loss
    Task& t = sim.task(map_task_id);
    if (sim.job(t.job_id).state != JobState::Running) return;
    if (!t.completed || t.recovery_pending) return;
    if (sim.output_available(map_task_id)) return;
    if (sim.running_attempt_count(map_task_id) > 0) return;
    t.recovery_pending = true;
    stats_.completed_respecs.push_back({map_task_id, sim.now(), consecutive, false});
    open_respec_episode(sim, t.job_id, lost_output_node(sim, map_task_id), map_task_id);
  }

  void on_launched(Simulator& sim, const SpeculationDecision& decision,
                   int attempt_id) override {
    (void)sim;
    if (decision.episode_id < 0) return;
    Episode& e = episodes_[static_cast<std::size_t>(decision.episode_id)];
    e.launched[decision.task_id] = attempt_id;
    if (decision.wave_index >= 0 && decision.wave_index == e.wave_index &&
        e.await_monitor && e.monitor_attempt < 0) {
      e.monitor_attempt = attempt_id;  // first of the wave to land
    }
  }

 private:
  // ---- temporal assessment (aggregate progress delta per node and job) ----

  void temporal_sample(Simulator& sim, int node_id, SimTime now) {
    auto prev_it = prev_hb_.find(node_id);
    if (prev_it == prev_hb_.end() || now <= prev_it->second) return;
    const SimTime prev = prev_it->second;
    const double dt = static_cast<double>(now - prev);

    // sum reported progress deltas of attempts that span the whole interval
    std::map<std::pair<int, TaskKind>, double> sums;
    const auto& node = sim.cluster().node(node_id);
    for (int attempt_id : node.running_attempts) {
      const TaskAttempt& a = sim.attempt(attempt_id);
      if (!a.running() || a.start_time > prev) continue;
      sums[{a.job_id, a.kind}] += a.reported_score - a.hb_prev_score;
    }

    auto it = delta_prev_.begin();
    while (it != delta_prev_.end()) {
      const auto& [key_node, key_job, key_kind] = it->first;
      if (key_node == node_id && !sums.count({key_job, key_kind})) {
        it = delta_prev_.erase(it);  // no on-going tasks left: no sample
      } else {
        ++it;
      }
    }
    for (const auto& [group, sum] : sums) {
      const auto [job_id, task_kind] = group;
      const double curr = sum / dt;
      const DeltaKey key{node_id, job_id, task_kind};
      auto prev_delta = delta_prev_.find(key);
      if (prev_delta != delta_prev_.end() &&
          temporally_slow(prev_delta->second, curr, cfg_.threshold_slowdown)) {
        ++stats_.temporal_verdicts;
        sim.queue().trace_note("verdict,temporal,job=" + std::to_string(job_id) +
                               ",node=" + std::to_string(node_id));
        open_straggler_episode(sim, job_id, node_id);
      }
      delta_prev_[key] = curr;
    }
  }

  // A node that stopped heartbeating produces no samples, so a stall would go
  // unnoticed; synthesize one zero delta per silent node.
  void silent_node_scan(Simulator& sim, SimTime now) {
    for (const auto& node : sim.cluster().nodes()) {
      if (node.running_attempts.empty()) continue;
      if (now - node.last_heartbeat_at < 2 * heartbeat_ms_) continue;
      std::set<std::pair<int, TaskKind>> groups;
      for (int attempt_id : node.running_attempts) {
        const TaskAttempt& a = sim.attempt(attempt_id);
        if (a.running()) groups.insert({a.job_id, a.kind});
      }
      for (const auto& [job_id, task_kind] : groups) {
        const DeltaKey key{node.node_id, job_id, task_kind};
        auto prev_delta = delta_prev_.find(key);
        if (prev_delta == delta_prev_.end()) continue;
        if (temporally_slow(prev_delta->second, 0.0, cfg_.threshold_slowdown)) {
          ++stats_.temporal_verdicts;
          sim.queue().trace_note("verdict,silent,job=" + std::to_string(job_id) +
                                 ",node=" + std::to_string(node.node_id));
          open_straggler_episode(sim, job_id, node.node_id);
        }
        prev_delta->second = 0.0;  // one verdict per silence
      }
    }
  }

  // ---- spatial assessment (progress rate vs neighborhood) ----

  void spatial_scan(Simulator& sim) {
    for (const auto& j : sim.jobs()) {
      if (j.state != JobState::Running) continue;
      for (const auto& hood : sim.cluster().neighborhoods()) {
        for (TaskKind task_kind : {TaskKind::Map, TaskKind::Reduce}) {
          std::vector<std::optional<double>> rates;
          rates.reserve(hood.size());
          for (int member : hood)
            rates.push_back(sim.node_job_rate(member, j.job_id, task_kind));
          for (std::size_t i = 0; i < hood.size(); ++i) {
            if (!rates[i]) continue;
            if (spatially_slow(rates, i, cfg_.spatial_exclude_self)) {
              ++stats_.spatial_verdicts;
              sim.queue().trace_note("verdict,spatial,job=" + std::to_string(j.job_id) +
                                     ",node=" + std::to_string(hood[i]));
              open_straggler_episode(sim, j.job_id, hood[i]);
            }
          }
        }
      }
    }
  }

  // ---- failure assessment (heartbeat gap vs adaptive threshold) ----

  void failure_scan(Simulator& sim, SimTime now) {
    for (const auto& node : sim.cluster().nodes()) {
      if (!failure_assessed(now, node.last_heartbeat_at,
                            sim.failure_threshold_ms(node))) {
        continue;
      }
      auto handled = fail_handled_.find(node.node_id);
      if (handled != fail_handled_.end() && handled->second == node.last_heartbeat_at) {
        continue;
      }
      fail_handled_[node.node_id] = node.last_heartbeat_at;
      ++stats_.failure_assessments;
      marked_failed_.insert(node.node_id);
      handle_presumed_failure(sim, node.node_id);
    }
  }

  void handle_presumed_failure(Simulator& sim, int node_id) {
    const auto affected = sim.declare_node_dead(node_id, false);
    for (int task_id : affected) {
      Task& t = sim.task(task_id);
      if (sim.job(t.job_id).state != JobState::Running) continue;

      auto claim = claim_.find(task_id);
      if (claim != claim_.end()) {
        Episode& e = episodes_[static_cast<std::size_t>(claim->second)];
        auto launched = e.launched.find(task_id);
        if (launched != e.launched.end() &&
            !sim.attempt(launched->second).running()) {
          e.launched.erase(launched);
          insert_sorted(e.queue, task_id);
          e.force_wave = true;
          if (e.monitor_attempt >= 0 &&
              !sim.attempt(e.monitor_attempt).running()) {
            e.monitor_attempt = -1;
          }
        }
        continue;  // the episode owns this task either way
      }
      if (t.completed) continue;  // respec scan below covers lost outputs
      if (sim.running_attempt_count(task_id) > 0) continue;
      const TaskAttempt& dead = last_failed_attempt(sim, t);
      if (t.kind == TaskKind::Map) {
        plan_rollback(sim, dead);
      } else {
        SpeculationDecision d;
        d.task_id = task_id;
        d.reason = LaunchReason::Relaunch;
        d.preferred_nodes = fast_node_order(sim, t.job_id, node_id);
        sim.request_launch(std::move(d));
      }
    }

    // outputs stored on the node are presumed gone with it
    for (const auto& o : sim.outputs()) {
      if (o.node_id != node_id) continue;
      Task& t = sim.task(o.map_task_id);
      if (!t.completed || t.recovery_pending) continue;
      if (sim.job(t.job_id).state != JobState::Running) continue;
      if (sim.output_available(o.map_task_id)) continue;
      if (sim.running_attempt_count(o.map_task_id) > 0) continue;
      t.recovery_pending = true;
      stats_.completed_respecs.push_back({o.map_task_id, sim.now(), 0, true});
      open_respec_episode(sim, t.job_id, node_id, o.map_task_id);
    }
  }

  // ---- rollback (resume from the spill log, race a fresh copy) ----

  void plan_rollback(Simulator& sim, const TaskAttempt& dead) {
    const auto& origin = sim.cluster().node(dead.node_id);
    const bool origin_ok = origin.health == NodeHealth::Healthy &&
                           !marked_failed_.count(origin.node_id);
    if (origin_ok) {
      SpeculationDecision a;
      a.task_id = dead.task_id;
      a.reason = LaunchReason::RollbackResume;
      a.pin_node = dead.node_id;
      a.resume_spill_index = static_cast<int>(dead.spill_log.size());
      a.resume_from_attempt = dead.attempt_id;
      ++stats_.rollback_resume_launches;
      sim.request_launch(std::move(a));
    }
    SpeculationDecision b;
    b.task_id = dead.task_id;
    b.reason = LaunchReason::RollbackFresh;
    b.preferred_nodes = fast_node_order(sim, dead.job_id, dead.node_id);
    ++stats_.rollback_fresh_launches;
    sim.request_launch(std::move(b));
  }

  // ---- collective speculation episodes ----

  void open_straggler_episode(Simulator& sim, int job_id, int origin_node) {
    for (const auto& e : episodes_) {
      if (!e.finished() && e.job_id == job_id && e.origin_node == origin_node) return;
    }
    std::vector<int> stragglers;
    const Job& j = sim.job(job_id);
    auto& raced = raced_[{job_id, origin_node}];
    const auto collect = [&](const std::vector<int>& task_ids) {
      for (int task_id : task_ids) {
        const Task& t = sim.task(task_id);
        if (t.completed || t.recovery_pending || claim_.count(task_id)) continue;
        if (raced.count(task_id)) continue;
        if (sim.running_attempt_count(task_id) != 1) continue;
        for (int attempt_id : t.attempts) {
          const TaskAttempt& a = sim.attempt(attempt_id);
          if (a.running() && a.node_id == origin_node) {
            stragglers.push_back(task_id);
            break;
          }
        }
      }
    };
    collect(j.map_tasks);
    collect(j.reduce_tasks);
    if (stragglers.empty()) return;
    std::sort(stragglers.begin(), stragglers.end());

    Episode e;
    e.episode_id = static_cast<int>(episodes_.size());
    e.job_id = job_id;
    e.origin_node = origin_node;
    e.queue.assign(stragglers.begin(), stragglers.end());
    for (int task_id : stragglers) {
      claim_[task_id] = e.episode_id;
      raced.insert(task_id);
    }
    episodes_.push_back(std::move(e));
    stats_.episodes.push_back({episodes_.back().episode_id, job_id, origin_node, 0, {}});
    pump_episode(sim, episodes_.back());
  }

  void open_respec_episode(Simulator& sim, int job_id, int origin_node, int task_id) {
    Episode e;
    e.episode_id = static_cast<int>(episodes_.size());
    e.job_id = job_id;
    e.origin_node = origin_node;
    e.respec = true;
    e.queue.push_back(task_id);
    claim_[task_id] = e.episode_id;
    episodes_.push_back(std::move(e));
    stats_.episodes.push_back({episodes_.back().episode_id, job_id, origin_node, 0, {}});
    pump_episode(sim, episodes_.back());
  }

  void pump_episodes(Simulator& sim) {
    for (auto& e : episodes_) {
      if (!e.finished()) pump_episode(sim, e);
    }
  }

  void pump_episode(Simulator& sim, Episode& e) {
    if (e.queue.empty()) return;

    // neighborhood slots first, origin excluded
    for (int member : sim.cluster().neighborhood_of(e.origin_node)) {
      if (member == e.origin_node) continue;
      const auto& node = sim.cluster().node(member);
      if (node.health == NodeHealth::Failed || marked_failed_.count(member)) continue;
      while (node.free_slots() > 0 && !e.queue.empty()) {
        const int task_id = e.queue.front();
        e.queue.pop_front();
        launch_copy(sim, e, task_id, -1, member);
        stats_.episodes[static_cast<std::size_t>(e.episode_id)].neighborhood_launches++;
      }
      if (e.queue.empty()) return;
    }

    // then waves beyond the neighborhood
    if (e.await_monitor && monitor_confirms(sim, e)) e.await_monitor = false;
    if (e.await_monitor && !e.force_wave) return;
    e.force_wave = false;
    ++e.wave_index;
    const int size = wave_size(cfg_.coll_init_num, cfg_.coll_multiply, e.wave_index);
    const int count = std::min<int>(size, static_cast<int>(e.queue.size()));
    stats_.episodes[static_cast<std::size_t>(e.episode_id)].wave_sizes.push_back(count);
    e.await_monitor = true;
    e.monitor_attempt = -1;
    const auto& hood = sim.cluster().neighborhood_of(e.origin_node);
    std::vector<int> outside;
    std::vector<int> inside;
    for (const auto& node : sim.cluster().nodes()) {
      if (node.node_id == e.origin_node) continue;
      const bool member = std::find(hood.begin(), hood.end(), node.node_id) != hood.end();
      (member ? inside : outside).push_back(node.node_id);
    }
    outside.insert(outside.end(), inside.begin(), inside.end());
    for (int i = 0; i < count; ++i) {
      const int task_id = e.queue.front();
      e.queue.pop_front();
      launch_copy(sim, e, task_id, e.wave_index, -1, outside);
    }
  }

  bool monitor_confirms(Simulator& sim, Episode& e) {
    if (e.monitor_attempt < 0) {
      // wave still waiting for a slot; re-point to any running copy
      for (const auto& [task_id, attempt_id] : e.launched) {
        if (sim.attempt(attempt_id).running()) {
          e.monitor_attempt = attempt_id;
          break;
        }
      }
      if (e.monitor_attempt < 0) return false;
    }
    const TaskAttempt& m = sim.attempt(e.monitor_attempt);
    if (!m.running()) return m.state == AttemptState::Succeeded;
    // clock-anchored rates on both sides: an original that stopped reporting
    // must look slower than a copy that is visibly moving
    const auto copy_rate = sim.observed_rate(m);
    if (!copy_rate) return false;
    const Task& t = sim.task(m.task_id);
    const TaskAttempt* original = nullptr;
    for (int attempt_id : t.attempts) {
      if (attempt_id == m.attempt_id) continue;
      const TaskAttempt& a = sim.attempt(attempt_id);
      if (a.running()) {
        original = &a;
        break;
      }
    }
    if (original) {
      const auto original_rate = sim.observed_rate(*original);
      return original_rate && *copy_rate > *original_rate;
    }
    return m.reported_score > m.initial_score + 1e-12;  // any progress counts
  }

  void launch_copy(Simulator& sim, Episode& e, int task_id, int wave_index,
                   int pin_node, std::vector<int> preferred = {}) {
    SpeculationDecision d;
    d.task_id = task_id;
    d.reason = e.respec ? LaunchReason::CompletedTaskRecovery
               : wave_index < 0 ? LaunchReason::NeighborhoodSpeculation
                                : LaunchReason::CollectiveWave;
    d.episode_id = e.episode_id;
    d.wave_index = wave_index;
    d.pin_node = pin_node;
    d.preferred_nodes = std::move(preferred);
    claim_[task_id] = e.episode_id;
    sim.request_launch(std::move(d));
  }

  // ---- shared helpers ----

  // Nodes ordered fastest first by per-job progress rate, ties and rate-less
  // nodes by ascending id; excludes the given node and presumed-failed ones.
  std::vector<int> fast_node_order(Simulator& sim, int job_id, int exclude) {
    struct Entry {
      bool has_rate;
      double rate;
      int node_id;
    };
    std::vector<Entry> entries;
    for (const auto& node : sim.cluster().nodes()) {
      if (node.node_id == exclude || node.health == NodeHealth::Failed) continue;
      if (marked_failed_.count(node.node_id)) continue;
      // map rate as the speed proxy: present on every working node and on one
      // scale, unlike reduce rates
      const auto rate = sim.node_job_rate(node.node_id, job_id, TaskKind::Map);
      entries.push_back({rate.has_value(), rate.value_or(0.0), node.node_id});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.has_rate != b.has_rate) return a.has_rate;
      if (a.rate != b.rate) return a.rate > b.rate;
      return a.node_id < b.node_id;
    });
    std::vector<int> order;
    order.reserve(entries.size());
    for (const auto& entry : entries) order.push_back(entry.node_id);
    return order;
  }

  const TaskAttempt& last_failed_attempt(Simulator& sim, const Task& t) {
    const TaskAttempt* last = nullptr;
    for (int attempt_id : t.attempts) {
      const TaskAttempt& a = sim.attempt(attempt_id);
      if (a.state == AttemptState::Failed) last = &a;
    }
    return *last;  // callers only ask after a failure happened
  }

  int lost_output_node(Simulator& sim, int map_task_id) {
    int node = 0;
    for (int output_id : sim.outputs_of(map_task_id)) {
      node = sim.outputs()[static_cast<std::size_t>(output_id)].node_id;
    }
    return node;  // newest output's home
  }

  BinoConfig cfg_;
  SimTime heartbeat_ms_;
  // map and reduce scores climb on different scales, so every aggregate the
  // assessments consume is kept per task kind
  using DeltaKey = std::tuple<int, int, TaskKind>;  // (node, job, kind)
  std::map<int, SimTime> prev_hb_;
  std::map<DeltaKey, double> delta_prev_;
  std::map<int, SimTime> fail_handled_;
  std::set<int> marked_failed_;
  std::vector<Episode> episodes_;
  std::map<int, int> claim_;  // task id -> owning episode
  // a long-lived attempt keeps its lifetime rate depressed long after the
  // node recovered, so the same verdict re-fires every check; one race per
  // task per accusing node, rearmed only by the failure paths
  std::map<std::pair<int, int>, std::set<int>> raced_;  // (job, node) -> tasks
};

}  // namespace

std::unique_ptr<SpeculationPolicy> make_bino_policy(const ScenarioConfig& cfg) {
  return std::make_unique<BinoPolicy>(cfg);
}

}  // namespace mrsim
