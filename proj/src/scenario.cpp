#include "mrsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mrsim {

using nlohmann::json;

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::None: return "none";
    case PolicyKind::Yarn: return "yarn";
    case PolicyKind::Bino: return "bino";
  }
  return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "none") return PolicyKind::None;
  if (name == "yarn") return PolicyKind::Yarn;
  if (name == "bino") return PolicyKind::Bino;
  throw ScenarioError("unknown policy '" + name + "' (expected yarn, bino or none)");
}

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ScenarioError(context + ": " + what);
}

void check_keys(const json& obj, const std::string& context,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.count(it.key()) == 0) {
      fail(context, "unknown key '" + it.key() + "'");
    }
  }
}

double get_number(const json& obj, const std::string& context, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(context, "'" + key + "' must be a number");
  return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& context, const std::string& key,
                     std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(context, "'" + key + "' must be an integer");
  return obj[key].get<std::int64_t>();
}

bool get_bool(const json& obj, const std::string& context, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(context, "'" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

SimTime get_time(const json& obj, const std::string& context, const std::string& key,
                 SimTime fallback) {
  std::int64_t v = get_int(obj, context, key, static_cast<std::int64_t>(fallback));
  if (v < 0) fail(context, "'" + key + "' must be >= 0");
  return static_cast<SimTime>(v);
}

void require_positive(double v, const std::string& context, const std::string& key) {
  if (!(v > 0.0)) fail(context, "'" + key + "' must be > 0");
}

ClusterConfig parse_cluster(const json& obj) {
  const std::string ctx = "cluster";
  check_keys(obj, ctx, {"nodes", "slots_per_node", "size_neighbor", "heartbeat_interval_ms"});
  ClusterConfig c;
  c.nodes = static_cast<int>(get_int(obj, ctx, "nodes", c.nodes));
  c.slots_per_node = static_cast<int>(get_int(obj, ctx, "slots_per_node", c.slots_per_node));
  c.size_neighbor = static_cast<int>(get_int(obj, ctx, "size_neighbor", c.size_neighbor));
  c.heartbeat_interval_ms = get_time(obj, ctx, "heartbeat_interval_ms", c.heartbeat_interval_ms);
  if (c.nodes < 1) fail(ctx, "'nodes' must be >= 1");
  if (c.slots_per_node < 1) fail(ctx, "'slots_per_node' must be >= 1");
  if (c.size_neighbor < 2) fail(ctx, "'size_neighbor' must be >= 2");
  if (c.heartbeat_interval_ms == 0) fail(ctx, "'heartbeat_interval_ms' must be > 0");
  return c;
}

ModelConfig parse_model(const json& obj) {
  const std::string ctx = "model";
  check_keys(obj, ctx,
             {"split_mb", "map_rate_mb_s", "reduce_rate_mb_s", "shuffle_rate_mb_s",
              "map_output_ratio", "num_spills", "fetch_retry_interval_ms",
              "max_fetch_failures", "max_attempts_per_task"});
  ModelConfig m;
  m.split_mb = get_number(obj, ctx, "split_mb", m.split_mb);
  m.map_rate_mb_s = get_number(obj, ctx, "map_rate_mb_s", m.map_rate_mb_s);
  m.reduce_rate_mb_s = get_number(obj, ctx, "reduce_rate_mb_s", m.reduce_rate_mb_s);
  m.shuffle_rate_mb_s = get_number(obj, ctx, "shuffle_rate_mb_s", m.shuffle_rate_mb_s);
  m.map_output_ratio = get_number(obj, ctx, "map_output_ratio", m.map_output_ratio);
  m.num_spills = static_cast<int>(get_int(obj, ctx, "num_spills", m.num_spills));
  m.fetch_retry_interval_ms =
      get_time(obj, ctx, "fetch_retry_interval_ms", m.fetch_retry_interval_ms);
  m.max_fetch_failures =
      static_cast<int>(get_int(obj, ctx, "max_fetch_failures", m.max_fetch_failures));
  m.max_attempts_per_task =
      static_cast<int>(get_int(obj, ctx, "max_attempts_per_task", m.max_attempts_per_task));
  require_positive(m.split_mb, ctx, "split_mb");
  require_positive(m.map_rate_mb_s, ctx, "map_rate_mb_s");
  require_positive(m.reduce_rate_mb_s, ctx, "reduce_rate_mb_s");
  require_positive(m.shuffle_rate_mb_s, ctx, "shuffle_rate_mb_s");
  require_positive(m.map_output_ratio, ctx, "map_output_ratio");
  if (m.num_spills < 1) fail(ctx, "'num_spills' must be >= 1");
  if (m.fetch_retry_interval_ms == 0) fail(ctx, "'fetch_retry_interval_ms' must be > 0");
  if (m.max_fetch_failures < 1) fail(ctx, "'max_fetch_failures' must be >= 1");
  if (m.max_attempts_per_task < 1) fail(ctx, "'max_attempts_per_task' must be >= 1");
  return m;
}

JobSpec parse_job(const json& obj, int index) {
  const std::string ctx = "jobs[" + std::to_string(index) + "]";
  check_keys(obj, ctx, {"arrival_ms", "input_mb", "reduces", "pin_node"});
  JobSpec j;
  j.arrival_ms = get_time(obj, ctx, "arrival_ms", 0);
  j.input_mb = get_number(obj, ctx, "input_mb", 0.0);
  j.reduces = static_cast<int>(get_int(obj, ctx, "reduces", 1));
  j.pin_node = static_cast<int>(get_int(obj, ctx, "pin_node", -1));
  require_positive(j.input_mb, ctx, "input_mb");
  if (j.reduces < 0) fail(ctx, "'reduces' must be >= 0");
  return j;
}

WorkloadConfig parse_workload(const json& obj) {
  const std::string ctx = "workload";
  check_keys(obj, ctx, {"size_mix", "jobs_per_s", "total_jobs"});
  if (!obj.contains("size_mix") || !obj["size_mix"].is_array() || obj["size_mix"].empty()) {
    fail(ctx, "'size_mix' must be a non-empty array");
  }
  WorkloadConfig w;
  double total_prob = 0.0;
  int i = 0;
  for (const auto& e : obj["size_mix"]) {
    const std::string ectx = ctx + ".size_mix[" + std::to_string(i++) + "]";
    check_keys(e, ectx, {"mb", "probability", "reduces"});
    SizeClass c;
    c.mb = get_number(e, ectx, "mb", 0.0);
    c.probability = get_number(e, ectx, "probability", -1.0);
    c.reduces = static_cast<int>(get_int(e, ectx, "reduces", 1));
    require_positive(c.mb, ectx, "mb");
    if (c.probability < 0.0) fail(ectx, "'probability' must be >= 0");
    if (c.reduces < 0) fail(ectx, "'reduces' must be >= 0");
    total_prob += c.probability;
    w.size_mix.push_back(c);
  }
  if (std::abs(total_prob - 1.0) > 1e-9) {
    fail(ctx, "size_mix probabilities must sum to 1 (got " + std::to_string(total_prob) + ")");
  }
  w.jobs_per_s = get_number(obj, ctx, "jobs_per_s", 0.0);
  w.total_jobs = static_cast<int>(get_int(obj, ctx, "total_jobs", 0));
  require_positive(w.jobs_per_s, ctx, "jobs_per_s");
  if (w.total_jobs < 1) fail(ctx, "'total_jobs' must be >= 1");
  return w;
}

BaselineConfig parse_baseline(const json& obj) {
  const std::string ctx = "baseline";
  check_keys(obj, ctx,
             {"wakeup_interval_ms", "slow_task_threshold", "fixed_delay_ms",
              "concurrent_cap", "task_timeout_ms"});
  BaselineConfig b;
  b.wakeup_interval_ms = get_time(obj, ctx, "wakeup_interval_ms", b.wakeup_interval_ms);
  b.slow_task_threshold = get_number(obj, ctx, "slow_task_threshold", b.slow_task_threshold);
  b.fixed_delay_ms = get_time(obj, ctx, "fixed_delay_ms", b.fixed_delay_ms);
  b.concurrent_cap = static_cast<int>(get_int(obj, ctx, "concurrent_cap", b.concurrent_cap));
  b.task_timeout_ms = get_time(obj, ctx, "task_timeout_ms", b.task_timeout_ms);
  if (b.wakeup_interval_ms == 0) fail(ctx, "'wakeup_interval_ms' must be > 0");
  if (b.slow_task_threshold < 0.0) fail(ctx, "'slow_task_threshold' must be >= 0");
  if (b.concurrent_cap < 1) fail(ctx, "'concurrent_cap' must be >= 1");
  if (b.task_timeout_ms == 0) fail(ctx, "'task_timeout_ms' must be > 0");
  return b;
}

BinoConfig parse_bino(const json& obj) {
  const std::string ctx = "bino";
  check_keys(obj, ctx,
             {"threshold_slowdown", "window_length", "coll_init_num", "coll_multiply",
              "progress_check_interval_ms", "safety_factor", "assess_spatial",
              "assess_temporal", "assess_failure", "spatial_exclude_self"});
  BinoConfig b;
  b.threshold_slowdown = get_number(obj, ctx, "threshold_slowdown", b.threshold_slowdown);
  b.window_length = static_cast<int>(get_int(obj, ctx, "window_length", b.window_length));
  b.coll_init_num = static_cast<int>(get_int(obj, ctx, "coll_init_num", b.coll_init_num));
  b.coll_multiply = static_cast<int>(get_int(obj, ctx, "coll_multiply", b.coll_multiply));
  b.progress_check_interval_ms =
      get_time(obj, ctx, "progress_check_interval_ms", b.progress_check_interval_ms);
  b.safety_factor = get_number(obj, ctx, "safety_factor", b.safety_factor);
  b.assess_spatial = get_bool(obj, ctx, "assess_spatial", b.assess_spatial);
  b.assess_temporal = get_bool(obj, ctx, "assess_temporal", b.assess_temporal);
  b.assess_failure = get_bool(obj, ctx, "assess_failure", b.assess_failure);
  b.spatial_exclude_self = get_bool(obj, ctx, "spatial_exclude_self", b.spatial_exclude_self);
  if (!(b.threshold_slowdown > 0.0 && b.threshold_slowdown < 1.0)) {
    fail(ctx, "'threshold_slowdown' must lie in (0, 1)");
  }
  if (b.window_length < 1) fail(ctx, "'window_length' must be >= 1");
  if (b.coll_init_num < 1) fail(ctx, "'coll_init_num' must be >= 1");
  if (b.coll_multiply < 1) fail(ctx, "'coll_multiply' must be >= 1");
  if (b.progress_check_interval_ms == 0) fail(ctx, "'progress_check_interval_ms' must be > 0");
  require_positive(b.safety_factor, ctx, "safety_factor");
  return b;
}

FaultEntry parse_fault(const json& obj, int index) {
  const std::string ctx = "faults[" + std::to_string(index) + "]";
  check_keys(obj, ctx,
             {"kind", "at_ms", "at_random_ms", "map_progress", "task_progress", "node",
              "job", "map", "factor", "duration_ms"});
  if (!obj.contains("kind") || !obj["kind"].is_string()) {
    fail(ctx, "'kind' must be a string");
  }
  FaultEntry e;
  const std::string kind = obj["kind"].get<std::string>();
  if (kind == "node_fail") e.kind = FaultKind::NodeFail;
  else if (kind == "node_slow") e.kind = FaultKind::NodeSlow;
  else if (kind == "mof_loss") e.kind = FaultKind::MofLoss;
  else if (kind == "disk_exception") e.kind = FaultKind::DiskException;
  else if (kind == "net_delay") e.kind = FaultKind::NetDelay;
  else fail(ctx, "unknown fault kind '" + kind + "'");

  int triggers = 0;
  if (obj.contains("at_ms")) {
    ++triggers;
    e.trigger.kind = FaultTrigger::Kind::AtTime;
    e.trigger.at_ms = get_time(obj, ctx, "at_ms", 0);
  }
  if (obj.contains("at_random_ms")) {
    ++triggers;
    const auto& w = obj["at_random_ms"];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
        !w[1].is_number_integer()) {
      fail(ctx, "'at_random_ms' must be an array [lo_ms, hi_ms]");
    }
    e.trigger.kind = FaultTrigger::Kind::AtRandomTime;
    e.trigger.window_lo_ms = static_cast<SimTime>(w[0].get<std::int64_t>());
    e.trigger.window_hi_ms = static_cast<SimTime>(w[1].get<std::int64_t>());
    if (e.trigger.window_hi_ms <= e.trigger.window_lo_ms) {
      fail(ctx, "'at_random_ms' window must be non-empty");
    }
  }
  if (obj.contains("map_progress")) {
    ++triggers;
    e.trigger.kind = FaultTrigger::Kind::MapProgress;
    e.trigger.progress = get_number(obj, ctx, "map_progress", 0.0);
    if (e.trigger.progress < 0.0 || e.trigger.progress > 1.0) {
      fail(ctx, "'map_progress' must lie in [0, 1]");
    }
  }
  if (obj.contains("task_progress")) {
    ++triggers;
    e.trigger.kind = FaultTrigger::Kind::TaskProgress;
    e.trigger.progress = get_number(obj, ctx, "task_progress", 0.0);
    if (e.trigger.progress < 0.0 || e.trigger.progress > 1.0) {
      fail(ctx, "'task_progress' must lie in [0, 1]");
    }
  }
  if (triggers != 1) {
    fail(ctx, "exactly one of at_ms / at_random_ms / map_progress / task_progress required");
  }
  e.trigger.job_index = static_cast<int>(get_int(obj, ctx, "job", 0));

  const bool task_target =
      e.kind == FaultKind::MofLoss || e.kind == FaultKind::DiskException;
  if (task_target) {
    if (!obj.contains("map")) fail(ctx, "'map' (task index) required for this fault kind");
    e.target.kind = FaultTarget::Kind::MapTask;
    e.target.job_index = static_cast<int>(get_int(obj, ctx, "job", 0));
    e.target.task_index = static_cast<int>(get_int(obj, ctx, "map", 0));
    if (e.target.task_index < 0) fail(ctx, "'map' must be >= 0");
  } else {
    if (!obj.contains("node")) fail(ctx, "'node' required for this fault kind");
    const auto& node = obj["node"];
    if (node.is_string()) {
      const std::string s = node.get<std::string>();
      if (s == "random") e.target.kind = FaultTarget::Kind::RandomNode;
      else if (s == "random_map") e.target.kind = FaultTarget::Kind::RandomMapNode;
      else fail(ctx, "'node' must be an id, \"random\" or \"random_map\"");
    } else if (node.is_number_integer()) {
      e.target.kind = FaultTarget::Kind::Node;
      e.target.node_id = node.get<int>();
      if (e.target.node_id < 0) fail(ctx, "'node' must be >= 0");
    } else {
      fail(ctx, "'node' must be an id, \"random\" or \"random_map\"");
    }
  }

  e.factor = get_number(obj, ctx, "factor", 1.0);
  e.duration_ms = get_time(obj, ctx, "duration_ms", 0);
  if ((e.kind == FaultKind::NodeSlow || e.kind == FaultKind::NetDelay) && e.factor < 1.0) {
    fail(ctx, "'factor' must be >= 1 for slow/delay faults");
  }
  return e;
}

RandomFaultSpec parse_random_faults(const json& obj) {
  const std::string ctx = "random_faults";
  check_keys(obj, ctx,
             {"count", "failure_ratio", "slow_factor", "delay_mean_s", "window_ms",
              "fail_duration_ms"});
  RandomFaultSpec r;
  r.count = static_cast<int>(get_int(obj, ctx, "count", 0));
  r.failure_ratio = get_number(obj, ctx, "failure_ratio", 0.0);
  r.slow_factor = get_number(obj, ctx, "slow_factor", r.slow_factor);
  r.delay_mean_s = get_number(obj, ctx, "delay_mean_s", r.delay_mean_s);
  r.fail_duration_ms = get_time(obj, ctx, "fail_duration_ms", 0);
  if (!obj.contains("window_ms") || !obj["window_ms"].is_array() ||
      obj["window_ms"].size() != 2) {
    fail(ctx, "'window_ms' must be an array [lo_ms, hi_ms]");
  }
  r.window_lo_ms = static_cast<SimTime>(obj["window_ms"][0].get<std::int64_t>());
  r.window_hi_ms = static_cast<SimTime>(obj["window_ms"][1].get<std::int64_t>());
  if (r.count < 0) fail(ctx, "'count' must be >= 0");
  if (r.failure_ratio < 0.0 || r.failure_ratio > 1.0) {
    fail(ctx, "'failure_ratio' must lie in [0, 1]");
  }
  if (r.slow_factor < 1.0) fail(ctx, "'slow_factor' must be >= 1");
  require_positive(r.delay_mean_s, ctx, "delay_mean_s");
  if (r.count > 0 && r.window_hi_ms <= r.window_lo_ms) {
    fail(ctx, "'window_ms' must be non-empty");
  }
  return r;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ScenarioError(std::string("invalid JSON: ") + err.what());
  }
  if (!root.is_object()) throw ScenarioError("scenario root must be an object");
  check_keys(root, "scenario",
             {"cluster", "model", "jobs", "workload", "faults", "random_faults", "policy",
              "baseline", "bino", "output", "max_events", "seed"});

  ScenarioConfig cfg;
  if (root.contains("cluster")) cfg.cluster = parse_cluster(root["cluster"]);
  if (root.contains("model")) cfg.model = parse_model(root["model"]);
  if (root.contains("jobs")) {
    if (!root["jobs"].is_array()) throw ScenarioError("'jobs' must be an array");
    int i = 0;
    for (const auto& j : root["jobs"]) cfg.jobs.push_back(parse_job(j, i++));
  }
  if (root.contains("workload")) cfg.workload = parse_workload(root["workload"]);
  if (root.contains("faults")) {
    if (!root["faults"].is_array()) throw ScenarioError("'faults' must be an array");
    int i = 0;
    for (const auto& f : root["faults"]) {
      cfg.faults.entries.push_back(parse_fault(f, i++));
    }
  }
  if (root.contains("random_faults")) {
    cfg.random_faults = parse_random_faults(root["random_faults"]);
  }
  if (root.contains("policy")) {
    if (!root["policy"].is_string()) throw ScenarioError("'policy' must be a string");
    cfg.policy = parse_policy(root["policy"].get<std::string>());
  }
  if (root.contains("baseline")) cfg.baseline = parse_baseline(root["baseline"]);
  if (root.contains("bino")) cfg.bino = parse_bino(root["bino"]);
  if (root.contains("output")) {
    check_keys(root["output"], "output", {"pdf_bin_width"});
    cfg.output.pdf_bin_width =
        get_number(root["output"], "output", "pdf_bin_width", cfg.output.pdf_bin_width);
    require_positive(cfg.output.pdf_bin_width, "output", "pdf_bin_width");
  }
  if (root.contains("max_events")) {
    std::int64_t v = get_int(root, "scenario", "max_events", 0);
    if (v < 1000) throw ScenarioError("'max_events' must be >= 1000");
    cfg.max_events = static_cast<std::uint64_t>(v);
  }
  if (root.contains("seed")) {
    std::int64_t v = get_int(root, "scenario", "seed", 1);
    if (v < 0) throw ScenarioError("'seed' must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(v);
  }

  if (cfg.jobs.empty() && !cfg.workload) {
    throw ScenarioError("scenario needs 'jobs' and/or 'workload'");
  }
  for (std::size_t i = 0; i < cfg.jobs.size(); ++i) {
    if (cfg.jobs[i].pin_node >= cfg.cluster.nodes) {
      throw ScenarioError("jobs[" + std::to_string(i) + "]: pin_node out of range");
    }
  }
  if (cfg.cluster.size_neighbor < 2) {
    throw ScenarioError("cluster.size_neighbor must be >= 2");
  }
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str());
  } catch (const ScenarioError& err) {
    throw ScenarioError(path + ": " + err.what());
  }
}

namespace {

json parse_override_value(const std::string& value) {
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded() || parsed.is_object() || parsed.is_array()) {
    return json(value);  // treat as string
  }
  return parsed;
}

}  // namespace

std::string apply_override(const std::string& json_text, const std::string& dotted_key,
                           const std::string& value) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ScenarioError(std::string("invalid JSON: ") + err.what());
  }
  json* cursor = &root;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', pos);
    const std::string part = dotted_key.substr(pos, dot - pos);
    if (part.empty()) throw ScenarioError("bad override key '" + dotted_key + "'");
    const bool numeric = part.find_first_not_of("0123456789") == std::string::npos;
    if (cursor->is_array()) {
      if (!numeric) {
        throw ScenarioError("override key '" + dotted_key + "' needs an index here");
      }
      const std::size_t index = std::stoul(part);
      if (index >= cursor->size()) {
        throw ScenarioError("override key '" + dotted_key + "' indexes past the array");
      }
      if (dot == std::string::npos) {
        (*cursor)[index] = parse_override_value(value);
        break;
      }
      cursor = &(*cursor)[index];
    } else {
      if (dot == std::string::npos) {
        (*cursor)[part] = parse_override_value(value);
        break;
      }
      cursor = &(*cursor)[part];
      if (!cursor->is_object() && !cursor->is_array() && !cursor->is_null()) {
        throw ScenarioError("override key '" + dotted_key + "' crosses a scalar");
      }
    }
    pos = dot + 1;
  }
  return root.dump(2);
}

ScenarioConfig reference_variant(const ScenarioConfig& config) {
  ScenarioConfig ref = config;
  ref.faults.entries.clear();
  ref.random_faults.reset();
  ref.policy = PolicyKind::None;
  return ref;
}

}  // namespace mrsim
