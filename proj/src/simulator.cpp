#include "mrsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mrsim/workload.hpp"

namespace mrsim {

namespace {

constexpr double kScoreEps = 1e-9;

SimTime ceil_ms(double ms) {
  if (ms <= 0.0) return 0;
  return static_cast<SimTime>(std::ceil(ms - 1e-9));
}

}  // namespace

Simulator::Simulator(const ScenarioConfig& config, PolicyKind policy,
                     std::uint64_t seed, bool capture_trace)
    : config_(config),
      policy_kind_(policy),
      seed_(seed),
      capture_trace_(capture_trace),
      queue_(config.max_events),
      rngs_(seed) {
  cluster_ = std::make_unique<Cluster>(config_.cluster.nodes,
                                       config_.cluster.slots_per_node,
                                       config_.cluster.size_neighbor,
                                       config_.cluster.heartbeat_interval_ms);
  // nodes start with the default silence tolerance; the responsiveness history
  // tightens or relaxes it per node as transient losses are observed
  const double initial_threshold =
      10.0 * static_cast<double>(config_.cluster.heartbeat_interval_ms);
  for (auto& node : cluster_->nodes()) {
    node.responsiveness.limit = config_.bino.window_length;
    node.responsiveness.fail_threshold_ms = initial_threshold;
  }
  policy_ = make_policy(policy_kind_, config_);
  if (capture_trace_) queue_.set_trace_sink(&trace_);
}

Simulator::~Simulator() = default;

double Simulator::failure_threshold_ms(const NodeState& node) const {
  return node.responsiveness.fail_threshold_ms;
}

PolicyStats& Simulator::policy_stats() { return policy_->stats(); }

// ---------------------------------------------------------------- setup ----

void Simulator::materialize_jobs() {
  std::vector<JobSpec> specs = config_.jobs;
  if (config_.workload) {
    auto generated = generate_workload(*config_.workload, rng("workload"));
    specs.insert(specs.end(), generated.begin(), generated.end());
  }
  std::stable_sort(specs.begin(), specs.end(),
                   [](const JobSpec& a, const JobSpec& b) {
                     return a.arrival_ms < b.arrival_ms;
                   });
  if (specs.empty()) throw ScenarioError("scenario produced no jobs");
  jobs_.reserve(specs.size());
  for (const auto& spec : specs) {
    Job j;
    j.job_id = static_cast<int>(jobs_.size());
    j.arrival_ms = spec.arrival_ms;
    j.input_mb = spec.input_mb;
    j.pin_node = spec.pin_node;
    // reduce count rides along in the spec until tasks are created on arrival
    jobs_.push_back(j);
    job_reduce_counts_.push_back(spec.reduces);
  }
}

void Simulator::prepare_faults() {
  fault_entries_ = config_.faults.entries;
  if (config_.random_faults) {
    auto expanded =
        expand_random_faults(*config_.random_faults, cluster_->size(), rng("faults"));
    fault_entries_.insert(fault_entries_.end(), expanded.begin(), expanded.end());
  }
  for (std::size_t i = 0; i < fault_entries_.size(); ++i) {
    auto& entry = fault_entries_[i];
    if (entry.trigger.kind == FaultTrigger::Kind::AtRandomTime) {
      const SimTime span = entry.trigger.window_hi_ms - entry.trigger.window_lo_ms;
      entry.trigger.at_ms = entry.trigger.window_lo_ms + rng("faults").uniform_u64(span);
      entry.trigger.kind = FaultTrigger::Kind::AtTime;
    }
    if (entry.trigger.kind == FaultTrigger::Kind::AtTime) {
      const std::int64_t index = static_cast<std::int64_t>(i);
      queue_.schedule(entry.trigger.at_ms, EventKind::FaultActivation, index, 0,
                      [this, index](SimTime) {
                        activate_fault(fault_entries_[static_cast<std::size_t>(index)]);
                      });
    }
  }
}

void Simulator::schedule_job_arrivals() {
  for (const auto& j : jobs_) {
    const int id = j.job_id;
    queue_.schedule(j.arrival_ms, EventKind::JobArrival, id, 0,
                    [this, id](SimTime) { on_job_arrival(id); });
  }
}

RunResult Simulator::run() {
  materialize_jobs();
  prepare_faults();
  schedule_job_arrivals();
  for (auto& node : cluster_->nodes()) {
    const int id = node.node_id;
    node.heartbeat_event = queue_.schedule(0, EventKind::Heartbeat, id, 0,
                                           [this, id](SimTime) { on_heartbeat(id); });
  }
  const SimTime wakeup = policy_->wakeup_interval();
  if (wakeup > 0) {
    queue_.schedule(wakeup, EventKind::SpeculatorWakeup, 0, 0,
                    [this](SimTime) { on_wakeup(); });
  }

  RunResult result;
  result.policy = policy_kind_;
  result.seed = seed_;
  result.summary = queue_.run();

  for (const auto& j : jobs_) {
    JobOutcome out;
    out.job_id = j.job_id;
    out.arrival_ms = j.arrival_ms;
    out.input_mb = j.input_mb;
    out.completed = j.state == JobState::Done;
    out.completion_ms = j.completion_ms;
    out.exec_ms = out.completed ? j.completion_ms - j.arrival_ms : 0;
    out.speculative_launches = j.speculative_launches;
    out.wasted_work_ms = j.wasted_work;
    result.jobs.push_back(out);
  }
  for (const auto& t : tasks_) {
    TaskOutcome out;
    out.task_id = t.task_id;
    out.job_id = t.job_id;
    out.kind = t.kind;
    out.index_in_job = t.index_in_job;
    out.completed = t.completed;
    out.completed_at = t.completed_at;
    out.first_failure_at = t.first_failure_at;
    out.ever_failed = t.failed_attempts > 0;
    result.tasks.push_back(out);
  }
  result.fetch_failures = fetch_failure_events_;
  result.policy_stats = policy_->stats();
  result.tasks_with_duplicate_running = tasks_with_duplicate_running_;
  result.trace = std::move(trace_);
  return result;
}

// ------------------------------------------------------------- queries ----

double Simulator::current_score(const TaskAttempt& a) const {
  if (a.state != AttemptState::Running) return a.score;
  const auto& node = cluster_->node(a.node_id);
  if (node.health == NodeHealth::Failed) return a.score;
  const SimTime now = queue_.now();
  if (a.kind == TaskKind::Map) {
    const double nominal = attempt_nominal_ms(a);
    const double dt = static_cast<double>(now - a.last_update);
    return std::min(1.0, a.score + dt / (nominal * node.progress_stretch()));
  }
  // reduce
  if (a.phase == ReducePhase::Reduce) {
    const double nominal = attempt_nominal_ms(a);
    const double dt = static_cast<double>(now - a.last_update);
    const double rs = std::min(1.0, a.reduce_score + dt / (nominal * node.progress_stretch()));
    return reduce_attempt_score(a.fetched_count, static_cast<int>(a.shuffle.size()), 0.0,
                                ReducePhase::Reduce, rs);
  }
  double fraction = 0.0;
  if (a.fetching_slot >= 0) {
    const auto& slot = a.shuffle[static_cast<std::size_t>(a.fetching_slot)];
    if (slot.fetch_ms > 0.0) {
      fraction = std::min(1.0, static_cast<double>(now - slot.fetch_start) / slot.fetch_ms);
    }
  }
  return reduce_attempt_score(a.fetched_count, static_cast<int>(a.shuffle.size()),
                              fraction, ReducePhase::Shuffle, a.reduce_score);
}

std::optional<double> Simulator::reported_rate(const TaskAttempt& a) const {
  // score and elapsed time must come from the same instant, or staggered
  // heartbeats make freshly reported nodes look faster than stale ones; an
  // attempt no report has covered yet contributes nothing rather than zero
  const SimTime age = a.reported_at - a.start_time;
  if (age == 0) return std::nullopt;
  return (a.reported_score - a.initial_score) / static_cast<double>(age);
}

std::optional<double> Simulator::observed_rate(const TaskAttempt& a) const {
  const SimTime age = queue_.now() - a.start_time;
  if (age == 0) return std::nullopt;
  return (a.reported_score - a.initial_score) / static_cast<double>(age);
}

std::optional<double> Simulator::node_job_rate(int node_id, int job_id,
                                               TaskKind kind) const {
  const auto& node = cluster_->node(node_id);
  double sum = 0.0;
  int count = 0;
  for (int attempt_id : node.running_attempts) {
    const auto& a = attempts_[static_cast<std::size_t>(attempt_id)];
    if (a.job_id != job_id || a.kind != kind || !a.running()) continue;
    if (auto rate = reported_rate(a)) {
      sum += *rate;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

double Simulator::job_map_progress(int job_id) const {
  const auto& j = jobs_[static_cast<std::size_t>(job_id)];
  if (j.map_tasks.empty()) return 0.0;
  double sum = 0.0;
  for (int task_id : j.map_tasks) {
    const auto& t = tasks_[static_cast<std::size_t>(task_id)];
    if (t.completed) {
      sum += 1.0;
      continue;
    }
    double best = 0.0;
    for (int attempt_id : t.attempts) {
      best = std::max(best, current_score(attempts_[static_cast<std::size_t>(attempt_id)]));
    }
    sum += best;
  }
  return sum / static_cast<double>(j.map_tasks.size());
}

int Simulator::running_attempt_count(int task_id) const {
  const auto& t = tasks_[static_cast<std::size_t>(task_id)];
  int count = 0;
  for (int attempt_id : t.attempts) {
    if (attempts_[static_cast<std::size_t>(attempt_id)].running()) ++count;
  }
  return count;
}

bool Simulator::output_available(int map_task_id) const {
  for (const auto& o : outputs_) {
    if (o.map_task_id == map_task_id && o.status == MofStatus::Available) return true;
  }
  return false;
}

std::vector<int> Simulator::outputs_of(int map_task_id) const {
  std::vector<int> ids;
  for (const auto& o : outputs_) {
    if (o.map_task_id == map_task_id) ids.push_back(o.output_id);
  }
  return ids;
}

int Simulator::fetch_failure_count(int reduce_task_id, int map_task_id) const {
  auto it = fetch_fail_counts_.find({reduce_task_id, map_task_id});
  return it == fetch_fail_counts_.end() ? 0 : it->second;
}

double Simulator::attempt_nominal_ms(const TaskAttempt& a) const {
  const auto& t = tasks_[static_cast<std::size_t>(a.task_id)];
  if (a.kind == TaskKind::Map) return config_.model.map_nominal_ms(t.input_mb);
  return config_.model.reduce_nominal_ms(t.input_mb);
}

double Simulator::partition_mb(const Task& map_task, const Job& j) const {
  const int reducers = std::max<std::size_t>(1, j.reduce_tasks.size());
  return map_task.input_mb * config_.model.map_output_ratio / reducers;
}

// ------------------------------------------------------------ lifecycle ----

void Simulator::on_job_arrival(int job_id) {
  Job& j = job(job_id);
  j.state = JobState::Running;
  const double split = config_.model.split_mb;
  const int map_count = static_cast<int>(std::ceil(j.input_mb / split - 1e-9));
  double remaining = j.input_mb;
  for (int i = 0; i < map_count; ++i) {
    Task t;
    t.task_id = static_cast<int>(tasks_.size());
    t.job_id = job_id;
    t.index_in_job = i;
    t.kind = TaskKind::Map;
    t.input_mb = std::min(split, remaining);
    remaining -= t.input_mb;
    j.map_tasks.push_back(t.task_id);
    tasks_.push_back(t);
  }
  const int reduce_count = job_reduce_counts_[static_cast<std::size_t>(job_id)];
  const double shuffle_mb =
      reduce_count > 0 ? j.input_mb * config_.model.map_output_ratio / reduce_count : 0.0;
  for (int i = 0; i < reduce_count; ++i) {
    Task t;
    t.task_id = static_cast<int>(tasks_.size());
    t.job_id = job_id;
    t.index_in_job = i;
    t.kind = TaskKind::Reduce;
    t.input_mb = shuffle_mb;
    j.reduce_tasks.push_back(t.task_id);
    tasks_.push_back(t);
  }
  for (int task_id : j.map_tasks) {
    SpeculationDecision d;
    d.task_id = task_id;
    d.reason = LaunchReason::Initial;
    d.pin_node = j.pin_node;
    request_launch(d);
  }
  if (j.map_tasks.empty()) check_job_done(j);
  evaluate_progress_triggers();
}

void Simulator::request_launch(SpeculationDecision decision) {
  Task& t = task(decision.task_id);
  const Job& j = job(t.job_id);
  if (j.state != JobState::Running && j.state != JobState::Pending) return;
  if (!try_place(decision)) {
    pending_.emplace(PendingKey{decision.task_id, pending_order_++}, std::move(decision));
  }
}

bool Simulator::try_place(const SpeculationDecision& decision) {
  if (decision.pin_node >= 0 &&
      cluster_->node(decision.pin_node).health == NodeHealth::Failed) {
    // a resume launch is tied to its spill log's node; anything else falls
    // back to ordinary placement
    if (decision.reason == LaunchReason::RollbackResume) return true;
    SpeculationDecision relaxed = decision;
    relaxed.pin_node = -1;
    return try_place(relaxed);
  }
  int node_id = -1;
  if (decision.pin_node >= 0) {
    const auto& node = cluster_->node(decision.pin_node);
    if (!node.has_free_slot()) return false;
    node_id = decision.pin_node;
  } else {
    auto choice = cluster_->allocate(decision.preferred_nodes);
    if (!choice) return false;
    node_id = *choice;
  }
  start_attempt(decision, node_id);
  return true;
}

void Simulator::try_drain_pending() {
  auto it = pending_.begin();
  while (it != pending_.end()) {
    const Task& t = task(it->second.task_id);
    const Job& j = jobs_[static_cast<std::size_t>(t.job_id)];
    const bool stale = j.state != JobState::Running ||
                       (t.completed && it->second.reason != LaunchReason::CompletedTaskRecovery);
    if (stale) {
      it = pending_.erase(it);
      continue;
    }
    SpeculationDecision d = it->second;
    if (try_place(d)) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

void Simulator::start_attempt(const SpeculationDecision& decision, int node_id) {
  Task& t = task(decision.task_id);
  Job& j = job(t.job_id);
  const SimTime now = queue_.now();

  TaskAttempt a;
  a.attempt_id = static_cast<int>(attempts_.size());
  a.task_id = t.task_id;
  a.job_id = t.job_id;
  a.kind = t.kind;
  a.node_id = node_id;
  a.start_time = now;
  a.last_update = now;
  a.is_speculative = is_speculative(decision.reason);
  if (t.kind == TaskKind::Map && decision.resume_spill_index > 0 &&
      decision.resume_from_attempt >= 0) {
    const auto& source = attempts_[static_cast<std::size_t>(decision.resume_from_attempt)];
    const int k = std::min(decision.resume_spill_index,
                           static_cast<int>(source.spill_log.size()));
    a.resume_spill_index = k;
    a.score = static_cast<double>(k) / config_.model.num_spills;
    a.initial_score = a.score;
    a.spill_log.assign(source.spill_log.begin(), source.spill_log.begin() + k);
  }
  a.reported_score = a.score;
  a.reported_at = now;
  a.hb_prev_score = a.score;

  t.attempts.push_back(a.attempt_id);
  if (a.is_speculative) ++j.speculative_launches;
  cluster_->node(node_id).running_attempts.insert(a.attempt_id);
  queue_.trace_note("launch," + std::to_string(a.attempt_id) + ",task=" +
                    std::to_string(t.task_id) + ",node=" + std::to_string(node_id) +
                    ",reason=" + to_string(decision.reason));
  attempts_.push_back(std::move(a));
  TaskAttempt& stored = attempts_.back();
  if (t.kind == TaskKind::Map) {
    schedule_map_progress(stored);
  } else {
    init_shuffle(stored);
  }
  policy_->on_launched(*this, decision, stored.attempt_id);
}

void Simulator::schedule_map_progress(TaskAttempt& a) {
  if (a.progress_event) queue_.cancel(a.progress_event);
  a.progress_event = 0;
  const auto& node = cluster_->node(a.node_id);
  if (!a.running() || node.health == NodeHealth::Failed) return;
  const int spills = config_.model.num_spills;
  int next = static_cast<int>(std::floor(a.score * spills + kScoreEps)) + 1;
  next = std::min(next, spills);
  const double target = static_cast<double>(next) / spills;
  const double nominal = attempt_nominal_ms(a);
  const double remaining = (target - a.score) * nominal * node.progress_stretch();
  const int id = a.attempt_id;
  a.progress_event =
      queue_.schedule(queue_.now() + ceil_ms(remaining), EventKind::ProgressQuantum, id,
                      next, [this, id](SimTime) { on_map_progress(id); });
}

void Simulator::schedule_reduce_progress(TaskAttempt& a) {
  if (a.progress_event) queue_.cancel(a.progress_event);
  a.progress_event = 0;
  const auto& node = cluster_->node(a.node_id);
  if (!a.running() || node.health == NodeHealth::Failed) return;
  if (a.phase != ReducePhase::Reduce) return;
  const double nominal = attempt_nominal_ms(a);
  const double remaining = (1.0 - a.reduce_score) * nominal * node.progress_stretch();
  const int id = a.attempt_id;
  a.progress_event =
      queue_.schedule(queue_.now() + ceil_ms(remaining), EventKind::AttemptComplete, id, 0,
                      [this, id](SimTime) { on_reduce_progress(id); });
}

void Simulator::flush_progress(TaskAttempt& a) {
  const SimTime now = queue_.now();
  if (!a.running()) {
    a.last_update = now;
    return;
  }
  const auto& node = cluster_->node(a.node_id);
  if (node.health == NodeHealth::Failed) {
    a.last_update = now;
    return;
  }
  const double dt = static_cast<double>(now - a.last_update);
  if (a.kind == TaskKind::Map) {
    const double nominal = attempt_nominal_ms(a);
    const double previous = a.score;
    a.score = std::min(1.0, a.score + dt / (nominal * node.progress_stretch()));
    const int spills = config_.model.num_spills;
    int k = static_cast<int>(a.spill_log.size()) + 1;
    while (k <= spills && a.score + kScoreEps >= static_cast<double>(k) / spills) {
      SpillEntry entry;
      entry.index = k;
      entry.input_offset_bytes = spill_offset_bytes(
          k, spills, tasks_[static_cast<std::size_t>(a.task_id)].input_mb * 1024.0 * 1024.0);
      const double crossing =
          (static_cast<double>(k) / spills - previous) * nominal * node.progress_stretch();
      entry.produced_at = a.last_update + static_cast<SimTime>(std::llround(std::max(0.0, crossing)));
      a.spill_log.push_back(entry);
      ++k;
    }
  } else if (a.phase == ReducePhase::Reduce) {
    const double nominal = attempt_nominal_ms(a);
    a.reduce_score = std::min(1.0, a.reduce_score + dt / (nominal * node.progress_stretch()));
    a.score = reduce_attempt_score(a.fetched_count, static_cast<int>(a.shuffle.size()), 0.0,
                                   ReducePhase::Reduce, a.reduce_score);
  } else {
    double fraction = 0.0;
    if (a.fetching_slot >= 0) {
      const auto& slot = a.shuffle[static_cast<std::size_t>(a.fetching_slot)];
      if (slot.fetch_ms > 0.0) {
        fraction = std::min(1.0, static_cast<double>(now - slot.fetch_start) / slot.fetch_ms);
      }
    }
    a.score = reduce_attempt_score(a.fetched_count, static_cast<int>(a.shuffle.size()),
                                   fraction, ReducePhase::Shuffle, a.reduce_score);
  }
  a.last_update = now;
}

void Simulator::cancel_attempt_events(TaskAttempt& a) {
  if (a.progress_event) {
    queue_.cancel(a.progress_event);
    a.progress_event = 0;
  }
  for (auto& slot : a.shuffle) {
    if (slot.transfer_event) {
      queue_.cancel(slot.transfer_event);
      slot.transfer_event = 0;
    }
    if (slot.probe_event) {
      queue_.cancel(slot.probe_event);
      slot.probe_event = 0;
    }
  }
}

void Simulator::on_map_progress(int attempt_id) {
  TaskAttempt& a = attempt(attempt_id);
  a.progress_event = 0;
  if (!a.running()) return;
  flush_progress(a);
  if (a.score >= 1.0 - kScoreEps) {
    attempt_succeeded(a);
  } else {
    schedule_map_progress(a);
  }
  // triggers see post-completion state, so a loss aimed at full progress
  // finds the output it is meant to destroy
  evaluate_progress_triggers();
}

void Simulator::on_reduce_progress(int attempt_id) {
  TaskAttempt& a = attempt(attempt_id);
  a.progress_event = 0;
  if (!a.running()) return;
  flush_progress(a);
  if (a.phase == ReducePhase::Reduce && a.reduce_score >= 1.0 - kScoreEps) {
    attempt_succeeded(a);
  } else {
    schedule_reduce_progress(a);
  }
  evaluate_progress_triggers();
}

void Simulator::attempt_succeeded(TaskAttempt& a) {
  const SimTime now = queue_.now();
  a.state = AttemptState::Succeeded;
  a.end_time = now;
  a.score = 1.0;
  cancel_attempt_events(a);
  cluster_->node(a.node_id).running_attempts.erase(a.attempt_id);

  Task& t = task(a.task_id);
  Job& j = job(a.job_id);
  t.completed = true;
  t.completed_at = now;
  t.recovery_pending = false;

  // the winner's siblings are killed on completion; their work is wasted
  for (int other_id : std::vector<int>(t.attempts)) {
    TaskAttempt& other = attempt(other_id);
    if (other.attempt_id != a.attempt_id && other.running()) kill_attempt(other_id);
  }

  if (t.kind == TaskKind::Map) {
    MofOutput output;
    output.output_id = static_cast<int>(outputs_.size());
    output.map_task_id = t.task_id;
    output.attempt_id = a.attempt_id;
    output.node_id = a.node_id;
    output.status = MofStatus::Available;
    outputs_.push_back(output);
    output_became_available(t.task_id);
    maybe_launch_reduces(j);
  }
  policy_->on_attempt_finished(*this, a.attempt_id);
  try_drain_pending();
  check_job_done(j);
}

void Simulator::maybe_launch_reduces(Job& j) {
  if (j.reduces_launched || j.reduce_tasks.empty() || j.state != JobState::Running) return;
  j.reduces_launched = true;
  for (int task_id : j.reduce_tasks) {
    SpeculationDecision d;
    d.task_id = task_id;
    d.reason = LaunchReason::Initial;
    d.pin_node = j.pin_node;
    request_launch(d);
  }
}

void Simulator::fail_attempt(int attempt_id, bool notify_policy) {
  TaskAttempt& a = attempt(attempt_id);
  if (!a.running()) return;
  flush_progress(a);
  a.state = AttemptState::Failed;
  a.end_time = queue_.now();
  cancel_attempt_events(a);
  cluster_->node(a.node_id).running_attempts.erase(a.attempt_id);

  Task& t = task(a.task_id);
  Job& j = job(a.job_id);
  j.wasted_work += (a.score - a.initial_score) * attempt_nominal_ms(a);
  t.failed_attempts += 1;
  if (t.first_failure_at == 0) t.first_failure_at = queue_.now();

  if (t.failed_attempts >= config_.model.max_attempts_per_task && !t.completed) {
    finalize_job(j, JobState::Failed);
    return;
  }
  if (notify_policy && j.state == JobState::Running) {
    policy_->on_attempt_failed(*this, attempt_id);
  }
  try_drain_pending();
}

void Simulator::kill_attempt(int attempt_id) {
  TaskAttempt& a = attempt(attempt_id);
  if (!a.running()) return;
  flush_progress(a);
  a.state = AttemptState::Killed;
  a.end_time = queue_.now();
  cancel_attempt_events(a);
  cluster_->node(a.node_id).running_attempts.erase(a.attempt_id);
  job(a.job_id).wasted_work += (a.score - a.initial_score) * attempt_nominal_ms(a);
  try_drain_pending();
}

std::vector<int> Simulator::declare_node_dead(int node_id, bool notify_policy) {
  auto& node = cluster_->node(node_id);
  const std::vector<int> running(node.running_attempts.begin(),
                                 node.running_attempts.end());
  std::set<int> affected;
  for (int attempt_id : running) {
    affected.insert(attempts_[static_cast<std::size_t>(attempt_id)].task_id);
    fail_attempt(attempt_id, notify_policy);
  }
  return std::vector<int>(affected.begin(), affected.end());
}

// -------------------------------------------------------------- shuffle ----

void Simulator::init_shuffle(TaskAttempt& a) {
  const Job& j = job(a.job_id);
  a.shuffle.assign(j.map_tasks.size(), ShuffleSlot{});
  a.phase = ReducePhase::Shuffle;
  a.fetched_count = 0;
  a.fetching_slot = -1;
  // discover the state of every source map up front; sources that finished but
  // lost their output count as an immediate fetch failure
  for (std::size_t i = 0; i < j.map_tasks.size(); ++i) {
    const int map_task = j.map_tasks[static_cast<std::size_t>(i)];
    auto& slot = a.shuffle[i];
    const auto ids = outputs_of(map_task);
    if (ids.empty()) {
      slot.state = ShuffleSlot::State::WaitingProduce;
    } else if (output_available(map_task)) {
      slot.state = ShuffleSlot::State::Fetchable;
    } else {
      slot.state = ShuffleSlot::State::Missing;
      register_fetch_failure(a, static_cast<int>(i));
      if (a.running()) schedule_probe(a, static_cast<int>(i));
    }
    if (!a.running()) return;  // a fetch-failure cascade may have failed it
  }
  shuffle_kick(a);
}

void Simulator::shuffle_kick(TaskAttempt& a) {
  if (!a.running() || a.phase != ReducePhase::Shuffle || a.fetching_slot >= 0) return;
  if (cluster_->node(a.node_id).health == NodeHealth::Failed) return;
  const Job& j = job(a.job_id);
  int pick = -1;
  for (std::size_t i = 0; i < a.shuffle.size(); ++i) {
    if (a.shuffle[i].state == ShuffleSlot::State::Fetchable) {
      pick = static_cast<int>(i);
      break;
    }
  }
  if (pick < 0) {
    if (a.fetched_count == static_cast<int>(a.shuffle.size()) && !a.shuffle.empty()) {
      a.phase = ReducePhase::Reduce;
      a.reduce_score = 0.0;
      a.last_update = queue_.now();
      schedule_reduce_progress(a);
    } else if (a.shuffle.empty()) {
      a.phase = ReducePhase::Reduce;
      a.reduce_score = 0.0;
      a.last_update = queue_.now();
      schedule_reduce_progress(a);
    }
    return;
  }
  const int map_task = j.map_tasks[static_cast<std::size_t>(pick)];
  // lowest node id wins when several copies of the output are available
  int source = -1;
  for (int output_id : outputs_of(map_task)) {
    const auto& o = outputs_[static_cast<std::size_t>(output_id)];
    if (o.status != MofStatus::Available) continue;
    if (source < 0 || o.node_id < outputs_[static_cast<std::size_t>(source)].node_id) {
      source = output_id;
    }
  }
  if (source < 0) {
    // raced with a loss; treat like a discovered miss
    auto& slot = a.shuffle[static_cast<std::size_t>(pick)];
    slot.state = ShuffleSlot::State::Missing;
    register_fetch_failure(a, pick);
    if (a.running()) schedule_probe(a, pick);
    if (a.running()) shuffle_kick(a);
    return;
  }
  auto& slot = a.shuffle[static_cast<std::size_t>(pick)];
  const auto& o = outputs_[static_cast<std::size_t>(source)];
  const auto& consumer = cluster_->node(a.node_id);
  const auto& producer = cluster_->node(o.node_id);
  const double nominal = config_.model.fetch_nominal_ms(
      partition_mb(tasks_[static_cast<std::size_t>(map_task)], j));
  const double stretch = consumer.progress_stretch() *
                         std::max(consumer.net_delay_factor, producer.net_delay_factor);
  slot.state = ShuffleSlot::State::Fetching;
  slot.fetch_start = queue_.now();
  slot.fetch_ms = std::max(1.0, nominal * stretch);
  slot.source_output = source;
  a.fetching_slot = pick;
  const int id = a.attempt_id;
  slot.transfer_event = queue_.schedule(
      queue_.now() + ceil_ms(slot.fetch_ms), EventKind::ShuffleFetch, id, pick,
      [this, id, pick](SimTime) { on_fetch_complete(id, pick); });
}

void Simulator::on_fetch_complete(int attempt_id, int slot_index) {
  TaskAttempt& a = attempt(attempt_id);
  if (!a.running()) return;
  auto& slot = a.shuffle[static_cast<std::size_t>(slot_index)];
  slot.transfer_event = 0;
  if (slot.state != ShuffleSlot::State::Fetching) return;
  slot.state = ShuffleSlot::State::Fetched;
  a.fetching_slot = -1;
  a.fetched_count += 1;
  const Job& j = job(a.job_id);
  const int map_task = j.map_tasks[static_cast<std::size_t>(slot_index)];
  fetch_fail_counts_[{a.task_id, map_task}] = 0;  // consecutive counter resets
  flush_progress(a);
  shuffle_kick(a);
  evaluate_progress_triggers();
}

void Simulator::schedule_probe(TaskAttempt& a, int slot_index) {
  auto& slot = a.shuffle[static_cast<std::size_t>(slot_index)];
  if (slot.probe_event) queue_.cancel(slot.probe_event);
  const int id = a.attempt_id;
  slot.probe_event = queue_.schedule(
      queue_.now() + config_.model.fetch_retry_interval_ms, EventKind::ShuffleFetch, id,
      -(slot_index + 1), [this, id, slot_index](SimTime) { on_probe(id, slot_index); });
}

void Simulator::on_probe(int attempt_id, int slot_index) {
  TaskAttempt& a = attempt(attempt_id);
  auto& slot = a.shuffle[static_cast<std::size_t>(slot_index)];
  slot.probe_event = 0;
  if (!a.running() || slot.state != ShuffleSlot::State::Missing) return;
  const Job& j = job(a.job_id);
  const int map_task = j.map_tasks[static_cast<std::size_t>(slot_index)];
  if (output_available(map_task)) {
    slot.state = ShuffleSlot::State::Fetchable;
    shuffle_kick(a);
    return;
  }
  register_fetch_failure(a, slot_index);
  if (a.running() && slot.state == ShuffleSlot::State::Missing) {
    schedule_probe(a, slot_index);
  }
}

void Simulator::register_fetch_failure(TaskAttempt& reduce_attempt, int slot_index) {
  const Job& j = job(reduce_attempt.job_id);
  const int map_task_id = j.map_tasks[static_cast<std::size_t>(slot_index)];
  Task& map_task = task(map_task_id);
  if (map_task.recovery_pending) return;  // a replacement is already on its way

  const int count = ++fetch_fail_counts_[{reduce_attempt.task_id, map_task_id}];
  fetch_failure_events_.push_back(
      {reduce_attempt.task_id, map_task_id, queue_.now(), count});
  policy_->on_fetch_failure(*this, reduce_attempt.task_id, map_task_id, count);

  // framework backstop: after max_fetch_failures consecutive misses the map is
  // reported failed and re-executed from scratch, and the reducer attempt that
  // kept starving is failed so it can restart
  const int max_failures = config_.model.max_fetch_failures;
  if (count % max_failures == 0) {
    if (!map_task.recovery_pending && running_attempt_count(map_task_id) == 0 &&
        !output_available(map_task_id) && j.state == JobState::Running) {
      SpeculationDecision d;
      d.task_id = map_task_id;
      d.reason = LaunchReason::Relaunch;
      request_launch(d);
    }
    if (count == max_failures) {
      fail_attempt(reduce_attempt.attempt_id, true);
    }
  }
}

void Simulator::output_became_available(int map_task_id) {
  const Task& t = task(map_task_id);
  const Job& j = job(t.job_id);
  // wake up any reducer waiting on this source
  for (int reduce_task : j.reduce_tasks) {
    for (int attempt_id : tasks_[static_cast<std::size_t>(reduce_task)].attempts) {
      TaskAttempt& a = attempt(attempt_id);
      if (!a.running() || a.phase != ReducePhase::Shuffle) continue;
      if (cluster_->node(a.node_id).health == NodeHealth::Failed) continue;
      const auto& maps = j.map_tasks;
      const auto it = std::find(maps.begin(), maps.end(), map_task_id);
      const int slot_index = static_cast<int>(it - maps.begin());
      auto& slot = a.shuffle[static_cast<std::size_t>(slot_index)];
      if (slot.state == ShuffleSlot::State::WaitingProduce ||
          slot.state == ShuffleSlot::State::Missing) {
        if (slot.probe_event) {
          queue_.cancel(slot.probe_event);
          slot.probe_event = 0;
        }
        slot.state = ShuffleSlot::State::Fetchable;
        shuffle_kick(a);
      }
    }
  }
}

void Simulator::output_lost(int map_task_id) {
  const Task& t = task(map_task_id);
  const Job& j = job(t.job_id);
  if (j.state != JobState::Running) return;
  const bool still_available = output_available(map_task_id);
  for (int reduce_task : j.reduce_tasks) {
    for (int attempt_id : std::vector<int>(tasks_[static_cast<std::size_t>(reduce_task)].attempts)) {
      TaskAttempt& a = attempt(attempt_id);
      if (!a.running() || a.phase != ReducePhase::Shuffle) continue;
      if (cluster_->node(a.node_id).health == NodeHealth::Failed) continue;
      const auto& maps = j.map_tasks;
      const auto it = std::find(maps.begin(), maps.end(), map_task_id);
      const int slot_index = static_cast<int>(it - maps.begin());
      auto& slot = a.shuffle[static_cast<std::size_t>(slot_index)];
      if (slot.state == ShuffleSlot::State::Fetched) continue;  // local copy is safe
      if (still_available) continue;  // another copy still serves fetches
      if (slot.state == ShuffleSlot::State::Fetching) {
        if (slot.transfer_event) {
          queue_.cancel(slot.transfer_event);
          slot.transfer_event = 0;
        }
        a.fetching_slot = -1;
        slot.state = ShuffleSlot::State::Missing;
        register_fetch_failure(a, slot_index);
        if (a.running()) {
          schedule_probe(a, slot_index);
          shuffle_kick(a);
        }
      } else if (slot.state == ShuffleSlot::State::Fetchable) {
        slot.state = ShuffleSlot::State::Missing;
        register_fetch_failure(a, slot_index);
        if (a.running()) schedule_probe(a, slot_index);
      }
    }
  }
}

// ------------------------------------------------------------ heartbeat ----

void Simulator::on_heartbeat(int node_id) {
  if (all_done_) return;
  auto& node = cluster_->node(node_id);
  node.heartbeat_event = 0;
  if (node.health == NodeHealth::Failed) return;

  const SimTime now = queue_.now();
  const SimTime gap = now - node.last_heartbeat_at;
  if (node.last_heartbeat_at != 0 || now != 0) {
    if (gap > cluster_->heartbeat_interval() && node.last_heartbeat_at != now) {
      // the node went quiet and came back: fold the loss into its history
      node.responsiveness.record(static_cast<double>(gap),
                                 static_cast<double>(cluster_->heartbeat_interval()),
                                 config_.bino.safety_factor);
    }
  }

  for (int attempt_id : std::vector<int>(node.running_attempts.begin(),
                                         node.running_attempts.end())) {
    TaskAttempt& a = attempt(attempt_id);
    if (!a.running()) continue;
    flush_progress(a);
    a.hb_prev_score = a.reported_score;
    a.reported_score = a.score;
    a.reported_at = now;
  }
  const SimTime prev = node.last_heartbeat_at;
  node.last_heartbeat_at = now;

  policy_->on_heartbeat(*this, node_id, now);
  (void)prev;

  const double stretch = node.progress_stretch();
  const SimTime next =
      now + ceil_ms(static_cast<double>(cluster_->heartbeat_interval()) * stretch);
  node.heartbeat_event = queue_.schedule(next, EventKind::Heartbeat, node_id, 0,
                                         [this, node_id](SimTime) { on_heartbeat(node_id); });
  evaluate_progress_triggers();
}

void Simulator::on_wakeup() {
  if (all_done_) return;
  policy_->on_wakeup(*this, queue_.now());
  const SimTime interval = policy_->wakeup_interval();
  queue_.schedule(queue_.now() + interval, EventKind::SpeculatorWakeup, 0, 0,
                  [this](SimTime) { on_wakeup(); });
}

// ------------------------------------------------------------ job close ----

void Simulator::check_job_done(Job& j) {
  if (j.state != JobState::Running) return;
  const auto all_completed = [this](const std::vector<int>& ids) {
    for (int id : ids) {
      if (!tasks_[static_cast<std::size_t>(id)].completed) return false;
    }
    return true;
  };
  const bool done = j.reduce_tasks.empty() ? all_completed(j.map_tasks)
                                           : all_completed(j.reduce_tasks);
  if (done) finalize_job(j, JobState::Done);
}

void Simulator::finalize_job(Job& j, JobState final_state) {
  j.state = final_state;
  j.completion_ms = queue_.now();

  // the either-copy-wins rule must leave no task with two live attempts
  const auto audit = [this](const std::vector<int>& ids) {
    for (int id : ids) {
      if (running_attempt_count(id) >= 2) ++tasks_with_duplicate_running_;
    }
  };
  audit(j.map_tasks);
  audit(j.reduce_tasks);

  for (int task_id : j.map_tasks) {
    for (int attempt_id : std::vector<int>(tasks_[static_cast<std::size_t>(task_id)].attempts)) {
      if (attempt(attempt_id).running()) kill_attempt(attempt_id);
    }
  }
  for (int task_id : j.reduce_tasks) {
    for (int attempt_id : std::vector<int>(tasks_[static_cast<std::size_t>(task_id)].attempts)) {
      if (attempt(attempt_id).running()) kill_attempt(attempt_id);
    }
  }
  purge_pending_for_job(j.job_id);

  // retained duplicate outputs are only needed until the job finishes
  for (int task_id : j.map_tasks) {
    Task& t = task(task_id);
    int kept = -1;
    for (int output_id : outputs_of(task_id)) {
      auto& o = outputs_[static_cast<std::size_t>(output_id)];
      if (o.status != MofStatus::Available) continue;
      if (kept < 0) {
        kept = output_id;
      } else if (o.node_id < outputs_[static_cast<std::size_t>(kept)].node_id) {
        outputs_[static_cast<std::size_t>(kept)].status = MofStatus::Discarded;
        kept = output_id;
      } else {
        o.status = MofStatus::Discarded;
      }
    }
    t.consumed_output = kept;
  }

  ++terminal_jobs_;
  note_all_done_maybe();
}

void Simulator::purge_pending_for_job(int job_id) {
  auto it = pending_.begin();
  while (it != pending_.end()) {
    if (task(it->second.task_id).job_id == job_id) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

void Simulator::purge_pending_for_node(int node_id) {
  auto it = pending_.begin();
  while (it != pending_.end()) {
    if (it->second.pin_node == node_id) {
      if (it->second.reason == LaunchReason::RollbackResume) {
        it = pending_.erase(it);
      } else {
        it->second.pin_node = -1;  // pin target gone, queue as unpinned
        ++it;
      }
    } else {
      ++it;
    }
  }
}

void Simulator::note_all_done_maybe() {
  if (terminal_jobs_ == static_cast<int>(jobs_.size())) {
    all_done_ = true;
    queue_.halt();
  }
}

// --------------------------------------------------------------- faults ----

std::optional<int> Simulator::resolve_target_node(const FaultEntry& entry) {
  switch (entry.target.kind) {
    case FaultTarget::Kind::Node:
      if (entry.target.node_id >= cluster_->size()) return std::nullopt;
      return entry.target.node_id;
    case FaultTarget::Kind::RandomNode:
      return static_cast<int>(
          rng("faults").uniform_u64(static_cast<std::uint64_t>(cluster_->size())));
    case FaultTarget::Kind::RandomMapNode: {
      std::vector<int> hosts;
      for (const auto& node : cluster_->nodes()) {
        for (int attempt_id : node.running_attempts) {
          const auto& a = attempts_[static_cast<std::size_t>(attempt_id)];
          if (a.kind == TaskKind::Map && a.running()) {
            hosts.push_back(node.node_id);
            break;
          }
        }
      }
      if (hosts.empty()) return std::nullopt;
      return hosts[rng("faults").uniform_u64(hosts.size())];
    }
    case FaultTarget::Kind::MapTask:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<int> Simulator::resolve_target_task(const FaultEntry& entry) const {
  const int job_index = entry.target.job_index;
  if (job_index < 0 || job_index >= static_cast<int>(jobs_.size())) return std::nullopt;
  const auto& j = jobs_[static_cast<std::size_t>(job_index)];
  const int task_index = entry.target.task_index;
  if (task_index < 0 || task_index >= static_cast<int>(j.map_tasks.size())) {
    return std::nullopt;
  }
  return j.map_tasks[static_cast<std::size_t>(task_index)];
}

void Simulator::activate_fault(FaultEntry& entry) {
  if (entry.fired || all_done_) return;
  entry.fired = true;
  apply_fault(entry);
}

void Simulator::apply_fault(FaultEntry& entry) {
  if (all_done_) return;
  switch (entry.kind) {
    case FaultKind::NodeFail: {
      auto target = resolve_target_node(entry);
      if (!target) {
        queue_.trace_note("fault_miss," + describe(entry));
        return;
      }
      auto& node = cluster_->node(*target);
      if (node.health == NodeHealth::Failed) return;
      queue_.trace_note("fault," + describe(entry) + ",node=" + std::to_string(*target));
      // freeze progress exactly at the fault instant, then silence the node
      for (int attempt_id : std::vector<int>(node.running_attempts.begin(),
                                             node.running_attempts.end())) {
        TaskAttempt& a = attempt(attempt_id);
        flush_progress(a);
        cancel_attempt_events(a);
        if (a.kind == TaskKind::Reduce && a.fetching_slot >= 0) {
          a.shuffle[static_cast<std::size_t>(a.fetching_slot)].state =
              ShuffleSlot::State::Fetchable;
          a.fetching_slot = -1;
        }
      }
      node.health = NodeHealth::Failed;
      node.slow_factor = 1.0;
      if (node.heartbeat_event) {
        queue_.cancel(node.heartbeat_event);
        node.heartbeat_event = 0;
      }
      if (node.health_restore_event) {
        queue_.cancel(node.health_restore_event);
        node.health_restore_event = 0;
      }
      purge_pending_for_node(node.node_id);
      // every map output stored on the node is gone
      std::set<int> lost_tasks;
      for (auto& o : outputs_) {
        if (o.node_id == node.node_id && o.status == MofStatus::Available) {
          o.status = MofStatus::Lost;
          lost_tasks.insert(o.map_task_id);
        }
      }
      for (int task_id : lost_tasks) output_lost(task_id);
      if (entry.duration_ms > 0) {
        const int id = node.node_id;
        node.health_restore_event =
            queue_.schedule(queue_.now() + entry.duration_ms, EventKind::FaultActivation,
                            id, 1, [this, id](SimTime) { restore_node_health(id); });
      }
      break;
    }
    case FaultKind::NodeSlow: {
      auto target = resolve_target_node(entry);
      if (!target) {
        queue_.trace_note("fault_miss," + describe(entry));
        return;
      }
      auto& node = cluster_->node(*target);
      if (node.health == NodeHealth::Failed) return;
      queue_.trace_note("fault," + describe(entry) + ",node=" + std::to_string(*target));
      for (int attempt_id : std::vector<int>(node.running_attempts.begin(),
                                             node.running_attempts.end())) {
        flush_progress(attempt(attempt_id));
      }
      node.health = NodeHealth::Slow;
      node.slow_factor = entry.factor;
      for (int attempt_id : std::vector<int>(node.running_attempts.begin(),
                                             node.running_attempts.end())) {
        TaskAttempt& a = attempt(attempt_id);
        if (a.kind == TaskKind::Map) {
          schedule_map_progress(a);
        } else {
          schedule_reduce_progress(a);
        }
      }
      if (node.health_restore_event) {
        queue_.cancel(node.health_restore_event);
        node.health_restore_event = 0;
      }
      if (entry.duration_ms > 0) {
        const int id = node.node_id;
        node.health_restore_event =
            queue_.schedule(queue_.now() + entry.duration_ms, EventKind::FaultActivation,
                            id, 2, [this, id](SimTime) { restore_node_health(id); });
      }
      break;
    }
    case FaultKind::MofLoss: {
      auto target = resolve_target_task(entry);
      bool lost_any = false;
      if (target) {
        for (int output_id : outputs_of(*target)) {
          auto& o = outputs_[static_cast<std::size_t>(output_id)];
          if (o.status == MofStatus::Available) {
            o.status = MofStatus::Lost;
            lost_any = true;
          }
        }
      }
      if (!lost_any) {
        queue_.trace_note("fault_miss," + describe(entry));
        return;
      }
      queue_.trace_note("fault," + describe(entry));
      output_lost(*target);
      break;
    }
    case FaultKind::DiskException: {
      auto target = resolve_target_task(entry);
      int victim = -1;
      if (target) {
        for (int attempt_id : task(*target).attempts) {
          if (attempt(attempt_id).running()) {
            victim = attempt_id;
            break;
          }
        }
      }
      if (victim < 0) {
        queue_.trace_note("fault_miss," + describe(entry));
        return;
      }
      queue_.trace_note("fault," + describe(entry) +
                        ",attempt=" + std::to_string(victim));
      fail_attempt(victim, true);
      break;
    }
    case FaultKind::NetDelay: {
      auto target = resolve_target_node(entry);
      if (!target) {
        queue_.trace_note("fault_miss," + describe(entry));
        return;
      }
      auto& node = cluster_->node(*target);
      queue_.trace_note("fault," + describe(entry) + ",node=" + std::to_string(*target));
      node.net_delay_factor = entry.factor;
      if (node.net_restore_event) {
        queue_.cancel(node.net_restore_event);
        node.net_restore_event = 0;
      }
      if (entry.duration_ms > 0) {
        const int id = node.node_id;
        node.net_restore_event =
            queue_.schedule(queue_.now() + entry.duration_ms, EventKind::FaultActivation,
                            id, 3, [this, id](SimTime) { restore_net(id); });
      }
      break;
    }
  }
}

void Simulator::restore_node_health(int node_id) {
  if (all_done_) return;
  auto& node = cluster_->node(node_id);
  node.health_restore_event = 0;
  if (node.health == NodeHealth::Failed) {
    queue_.trace_note("node_restore," + std::to_string(node_id));
    node.health = NodeHealth::Healthy;
    node.slow_factor = 1.0;
    // the node re-registers and resumes heartbeating immediately; containers
    // it held are gone, so still-running attempts are reported failed (their
    // spill logs survive on disk)
    node.heartbeat_event = queue_.schedule(queue_.now(), EventKind::Heartbeat, node_id, 0,
                                           [this, node_id](SimTime) { on_heartbeat(node_id); });
    declare_node_dead(node_id, true);
  } else if (node.health == NodeHealth::Slow) {
    queue_.trace_note("node_restore," + std::to_string(node_id));
    for (int attempt_id : std::vector<int>(node.running_attempts.begin(),
                                           node.running_attempts.end())) {
      flush_progress(attempt(attempt_id));
    }
    node.health = NodeHealth::Healthy;
    node.slow_factor = 1.0;
    for (int attempt_id : std::vector<int>(node.running_attempts.begin(),
                                           node.running_attempts.end())) {
      TaskAttempt& a = attempt(attempt_id);
      if (a.kind == TaskKind::Map) {
        schedule_map_progress(a);
      } else {
        schedule_reduce_progress(a);
      }
    }
    if (node.heartbeat_event) queue_.cancel(node.heartbeat_event);
    node.heartbeat_event =
        queue_.schedule(queue_.now() + cluster_->heartbeat_interval(), EventKind::Heartbeat,
                        node_id, 0, [this, node_id](SimTime) { on_heartbeat(node_id); });
  }
  try_drain_pending();
}

void Simulator::restore_net(int node_id) {
  auto& node = cluster_->node(node_id);
  node.net_restore_event = 0;
  node.net_delay_factor = 1.0;
}

void Simulator::evaluate_progress_triggers() {
  for (std::size_t i = 0; i < fault_entries_.size(); ++i) {
    auto& entry = fault_entries_[i];
    if (entry.fired) continue;
    bool crossed = false;
    if (entry.trigger.kind == FaultTrigger::Kind::MapProgress) {
      const int job_index = entry.trigger.job_index;
      if (job_index < 0 || job_index >= static_cast<int>(jobs_.size())) {
        entry.fired = true;
        queue_.trace_note("fault_miss," + describe(entry));
        continue;
      }
      const auto& j = jobs_[static_cast<std::size_t>(job_index)];
      if (j.state == JobState::Pending) continue;
      crossed = job_map_progress(j.job_id) + kScoreEps >= entry.trigger.progress;
    } else if (entry.trigger.kind == FaultTrigger::Kind::TaskProgress) {
      auto target = resolve_target_task(entry);
      if (!target) continue;  // job not arrived yet
      const Task& t = tasks_[static_cast<std::size_t>(*target)];
      double best = t.completed ? 1.0 : 0.0;
      for (int attempt_id : t.attempts) {
        best = std::max(best, current_score(attempts_[static_cast<std::size_t>(attempt_id)]));
      }
      crossed = best + kScoreEps >= entry.trigger.progress;
    }
    if (!crossed) continue;
    // activate in a fresh event so every completion already queued at this
    // instant lands first; scores hit the threshold the moment the clock
    // does, before the publishing event itself has run
    entry.fired = true;
    queue_.schedule(queue_.now(), EventKind::FaultActivation,
                    static_cast<std::int64_t>(i), 0, [this, i](SimTime) {
                      apply_fault(fault_entries_[i]);
                    });
  }
}

RunResult run_scenario(const ScenarioConfig& config, PolicyKind policy,
                       std::uint64_t seed, bool capture_trace) {
  Simulator sim(config, policy, seed, capture_trace);
  return sim.run();
}

}  // namespace mrsim
