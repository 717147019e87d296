#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrsim/cluster.hpp"
#include "mrsim/engine.hpp"
#include "mrsim/faults.hpp"
#include "mrsim/mapreduce.hpp"
#include "mrsim/policy.hpp"
#include "mrsim/rng.hpp"
#include "mrsim/scenario.hpp"

namespace mrsim {

struct JobOutcome {
  int job_id = 0;
  SimTime arrival_ms = 0;
  double input_mb = 0.0;
  bool completed = false;
  SimTime completion_ms = 0;
  SimTime exec_ms = 0;  // completion - arrival, queueing included
  int speculative_launches = 0;
  double wasted_work_ms = 0.0;  // discarded compute, in nominal task-ms
};

struct TaskOutcome {
  int task_id = 0;
  int job_id = 0;
  TaskKind kind = TaskKind::Map;
  int index_in_job = 0;
  bool completed = false;
  SimTime completed_at = 0;
  SimTime first_failure_at = 0;
  bool ever_failed = false;
};

struct FetchFailureEvent {
  int reduce_task_id = 0;
  int map_task_id = 0;
  SimTime at_ms = 0;
  int consecutive = 0;
};

struct RunResult {
  PolicyKind policy = PolicyKind::None;
  std::uint64_t seed = 0;
  SimSummary summary;
  std::vector<JobOutcome> jobs;
  std::vector<TaskOutcome> tasks;
  std::vector<FetchFailureEvent> fetch_failures;
  PolicyStats policy_stats;
  int tasks_with_duplicate_running = 0;  // tasks holding >= 2 Running attempts at job end
  std::string trace;
};

// One simulation instance. Strictly single-threaded and deterministic: a given
// (scenario, policy, seed) always produces the same event trace and results.
class Simulator {
 public:
  Simulator(const ScenarioConfig& config, PolicyKind policy, std::uint64_t seed,
            bool capture_trace = false);
  ~Simulator();

  RunResult run();

  // ---- state surface shared with the policies ----
  SimTime now() const { return queue_.now(); }
  EventQueue& queue() { return queue_; }
  Cluster& cluster() { return *cluster_; }
  const ScenarioConfig& config() const { return config_; }
  const ModelConfig& model() const { return config_.model; }

  std::vector<Job>& jobs() { return jobs_; }
  std::vector<Task>& tasks() { return tasks_; }
  // deque: launches grow it mid-event while references are held
  std::deque<TaskAttempt>& attempts() { return attempts_; }
  Job& job(int id) { return jobs_[static_cast<std::size_t>(id)]; }
  Task& task(int id) { return tasks_[static_cast<std::size_t>(id)]; }
  TaskAttempt& attempt(int id) { return attempts_[static_cast<std::size_t>(id)]; }
  const std::vector<MofOutput>& outputs() const { return outputs_; }

  // Exact progress at `now`, without mutating the attempt.
  double current_score(const TaskAttempt& a) const;
  // rho anchored at the last report: score gain over the age the report
  // covers. Stays put when a node stops reporting; empty before any report.
  std::optional<double> reported_rate(const TaskAttempt& a) const;
  // rho anchored at the clock: score gain over the attempt's whole life so
  // far. Decays while the attempt reports nothing, which is what a head-to-
  // head race between two specific attempts must see.
  std::optional<double> observed_rate(const TaskAttempt& a) const;
  // average reported progress rate of the job's running attempts of one kind
  // on the node; map and reduce scores move on different scales, so callers
  // must never pool them
  std::optional<double> node_job_rate(int node_id, int job_id, TaskKind kind) const;
  // Mean best-known progress over a job's map tasks.
  double job_map_progress(int job_id) const;

  int running_attempt_count(int task_id) const;
  bool output_available(int map_task_id) const;
  std::vector<int> outputs_of(int map_task_id) const;  // output ids, any status

  // Places the attempt now or queues the decision until a slot frees up.
  void request_launch(SpeculationDecision decision);
  void fail_attempt(int attempt_id, bool notify_policy);
  void kill_attempt(int attempt_id);
  // Fails every running attempt on the node; returns the affected task ids
  // (ascending, unique). With notify_policy=false the caller owns recovery.
  std::vector<int> declare_node_dead(int node_id, bool notify_policy);

  int fetch_failure_count(int reduce_task_id, int map_task_id) const;
  double failure_threshold_ms(const NodeState& node) const;

  Rng& rng(std::string_view name) { return rngs_.stream(name); }
  PolicyStats& policy_stats();

 private:
  struct PendingKey {
    int task_id;
    std::uint64_t order;
    bool operator<(const PendingKey& other) const {
      return task_id != other.task_id ? task_id < other.task_id : order < other.order;
    }
  };

  // setup
  void materialize_jobs();
  void prepare_faults();
  void schedule_job_arrivals();

  // event handlers
  void on_job_arrival(int job_id);
  void on_heartbeat(int node_id);
  void on_map_progress(int attempt_id);
  void on_reduce_progress(int attempt_id);
  void on_fetch_complete(int attempt_id, int slot_index);
  void on_probe(int attempt_id, int slot_index);
  void on_wakeup();

  // task lifecycle
  void try_drain_pending();
  bool try_place(const SpeculationDecision& decision);
  void start_attempt(const SpeculationDecision& decision, int node_id);
  void schedule_map_progress(TaskAttempt& a);
  void schedule_reduce_progress(TaskAttempt& a);
  void flush_progress(TaskAttempt& a);
  void cancel_attempt_events(TaskAttempt& a);
  void attempt_succeeded(TaskAttempt& a);
  void maybe_launch_reduces(Job& j);
  void init_shuffle(TaskAttempt& a);
  void shuffle_kick(TaskAttempt& a);
  void register_fetch_failure(TaskAttempt& reduce_attempt, int slot_index);
  void schedule_probe(TaskAttempt& a, int slot_index);
  void output_became_available(int map_task_id);
  void output_lost(int map_task_id);
  void check_job_done(Job& j);
  void finalize_job(Job& j, JobState final_state);
  void purge_pending_for_job(int job_id);
  void purge_pending_for_node(int node_id);
  void note_all_done_maybe();

  // faults
  void activate_fault(FaultEntry& entry);
  void apply_fault(FaultEntry& entry);
  void restore_node_health(int node_id);
  void restore_net(int node_id);
  void evaluate_progress_triggers();
  std::optional<int> resolve_target_node(const FaultEntry& entry);
  std::optional<int> resolve_target_task(const FaultEntry& entry) const;

  double attempt_nominal_ms(const TaskAttempt& a) const;
  double partition_mb(const Task& map_task, const Job& j) const;

  ScenarioConfig config_;
  PolicyKind policy_kind_;
  std::uint64_t seed_;
  bool capture_trace_;

  EventQueue queue_;
  RngStream rngs_;
  std::unique_ptr<Cluster> cluster_;
  std::unique_ptr<SpeculationPolicy> policy_;

  std::vector<Job> jobs_;
  std::vector<int> job_reduce_counts_;
  std::vector<Task> tasks_;
  std::deque<TaskAttempt> attempts_;
  std::vector<MofOutput> outputs_;
  std::vector<FaultEntry> fault_entries_;
  std::map<std::pair<int, int>, int> fetch_fail_counts_;
  std::map<PendingKey, SpeculationDecision> pending_;
  std::uint64_t pending_order_ = 0;
  std::vector<FetchFailureEvent> fetch_failure_events_;
  int tasks_with_duplicate_running_ = 0;
  int terminal_jobs_ = 0;
  bool all_done_ = false;
  std::string trace_;
};

RunResult run_scenario(const ScenarioConfig& config, PolicyKind policy,
                       std::uint64_t seed, bool capture_trace = false);

}  // namespace mrsim
