#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mrsim/policy.hpp"
#include "mrsim/scenario.hpp"
#include "mrsim/simulator.hpp"
#include "oracles.hpp"

using namespace mrsim;

namespace {

std::string scenario_dir() {
  if (const char* env = std::getenv("MRSIM_SCENARIO_DIR")) return env;
  return "scenarios";
}

using Rates = std::vector<std::optional<double>>;

}  // namespace

TEST_CASE("a rate one sigma under the group mean is spatially slow") {
  // {2, 10, 12}: mean 8, sigma ~4.32, cutoff ~3.68
  const Rates rates{2.0, 10.0, 12.0};
  CHECK(spatially_slow(rates, 0, false));
  CHECK_FALSE(spatially_slow(rates, 1, false));
  CHECK_FALSE(spatially_slow(rates, 2, false));
}

TEST_CASE("spatial verdicts abstain without a comparison population") {
  CHECK_FALSE(spatially_slow(Rates{2.0, std::nullopt, std::nullopt}, 0, false));
  CHECK_FALSE(spatially_slow(Rates{std::nullopt, 4.0, 5.0}, 0, false));
  CHECK_FALSE(spatially_slow(Rates{2.0, 9.0}, 0, true));  // self excluded, one left
}

TEST_CASE("uniform rates are never spatially slow") {
  const Rates rates{10.0, 10.0, 10.0};
  for (std::size_t i = 0; i < rates.size(); ++i) {
    CHECK_FALSE(spatially_slow(rates, i, false));
  }
}

TEST_CASE("the exact boundary is not slow") {
  // two values put the minimum exactly one sigma under the mean
  const Rates rates{1.0, 3.0};
  CHECK_FALSE(spatially_slow(rates, 0, false));
  const Rates scaled{1e-6, 3e-6};
  CHECK_FALSE(spatially_slow(scaled, 0, false));
}

TEST_CASE("spatial verdicts are scale invariant") {
  std::mt19937_64 gen(11);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 2 + gen() % 6;
    Rates rates(n);
    for (auto& r : rates) {
      if (gen() % 5 == 0) continue;  // leave some rates undefined
      r = 1e-6 + static_cast<double>(gen() % 1000) * 1e-6;
    }
    const std::size_t self = gen() % n;
    for (const double c : {1e-3, 7.0, 1e6}) {
      Rates scaled = rates;
      for (auto& r : scaled) {
        if (r) r = *r * c;
      }
      CHECK(spatially_slow(rates, self, false) == spatially_slow(scaled, self, false));
      CHECK(spatially_slow(rates, self, true) == spatially_slow(scaled, self, true));
    }
  }
}

TEST_CASE("a collapsed progress delta is temporally slow") {
  CHECK(temporally_slow(5e-4, 4e-5, 0.1));
  CHECK_FALSE(temporally_slow(5e-4, 5e-4, 0.1));   // steady is fine
  CHECK_FALSE(temporally_slow(5e-4, 5e-5, 0.1));   // exactly the threshold: strict
  CHECK_FALSE(temporally_slow(0.0, 0.0, 0.1));     // no baseline, no verdict
  CHECK_FALSE(temporally_slow(-1e-5, 0.0, 0.1));
}

TEST_CASE("temporal verdicts are scale invariant") {
  std::mt19937_64 gen(13);
  for (int round = 0; round < 200; ++round) {
    const double prev = static_cast<double>(gen() % 1000) * 1e-6;
    const double curr = static_cast<double>(gen() % 1000) * 1e-7;
    for (const double c : {1e-3, 7.0, 1e6}) {
      CHECK(temporally_slow(prev, curr, 0.1) == temporally_slow(prev * c, curr * c, 0.1));
    }
  }
}

TEST_CASE("failure is presumed only strictly past the threshold") {
  CHECK_FALSE(failure_assessed(15000, 10000, 10000.0));
  CHECK_FALSE(failure_assessed(20000, 10000, 10000.0));  // exactly at: not yet
  CHECK(failure_assessed(20001, 10000, 10000.0));
}

TEST_CASE("assessment arithmetic matches the reference evaluator") {
  std::mt19937_64 gen(2025);
  int spatial_checked = 0;
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 2 + gen() % 7;
    Rates rates(n);
    for (auto& r : rates) {
      if (gen() % 4 == 0) continue;
      r = static_cast<double>(gen() % 100000) * 1e-8;
    }
    const std::size_t self = gen() % n;
    for (const bool exclude : {false, true}) {
      CHECK(spatially_slow(rates, self, exclude) ==
            oracle::spatial_verdict(rates, self, exclude));
      ++spatial_checked;
    }
    const double prev = static_cast<double>(gen() % 2000) * 1e-6 - 1e-4;
    const double curr = static_cast<double>(gen() % 2000) * 1e-7;
    const double thr = (gen() % 2) ? 0.1 : 0.5;
    CHECK(temporally_slow(prev, curr, thr) == oracle::temporal_verdict(prev, curr, thr));
    const SimTime now = 10000 + gen() % 100000;
    const SimTime last = gen() % 10000;
    const double threshold = static_cast<double>(gen() % 120000);
    CHECK(failure_assessed(now, last, threshold) ==
          oracle::failure_verdict(now, last, threshold));
  }
  CHECK(spatial_checked == 400);
}

TEST_CASE("wave sizes follow the geometric schedule") {
  for (const int init : {1, 2, 3}) {
    for (const int mult : {1, 2, 3}) {
      long long cumulative = 0;
      for (int i = 0; i <= 6; ++i) {
        cumulative += wave_size(init, mult, i);
        CHECK(cumulative == oracle::wave_cumulative(init, mult, i));
      }
    }
  }
}

TEST_CASE("the serial speculator stays quiet without variance") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 4, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 1024, "reduces": 1 } ],
    "policy": "yarn", "seed": 1
  })");
  const RunResult result = run_scenario(cfg, PolicyKind::Yarn, 1);
  CHECK(result.jobs[0].completed);
  CHECK(result.policy_stats.baseline_launches.empty());
  CHECK(result.jobs[0].speculative_launches == 0);
}

TEST_CASE("the serial speculator picks one straggler at a time") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 4, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 2048, "reduces": 2 } ],
    "faults": [ { "kind": "node_slow", "node": 2, "factor": 10.0, "at_ms": 4000 } ],
    "policy": "yarn", "seed": 1
  })");
  const RunResult result = run_scenario(cfg, PolicyKind::Yarn, 1);
  CHECK(result.jobs[0].completed);
  const auto& launches = result.policy_stats.baseline_launches;
  CHECK(!launches.empty());
  // one pick per wakeup and a mandatory gap between picks
  for (std::size_t i = 1; i < launches.size(); ++i) {
    CHECK(launches[i] - launches[i - 1] >= 15000);
  }
}

TEST_CASE("failed attempts are relaunched from scratch until the cap") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 2, "slots_per_node": 4, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 128, "reduces": 0 } ],
    "faults": [
      { "kind": "disk_exception", "job": 0, "map": 0, "task_progress": 0.3 }
    ],
    "policy": "yarn", "seed": 1
  })");
  Simulator sim(cfg, PolicyKind::Yarn, 1);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);
  REQUIRE(sim.attempts().size() == 2);
  CHECK(sim.attempts()[0].state == AttemptState::Failed);
  CHECK(sim.attempts()[1].initial_score == doctest::Approx(0.0));  // no rollback here
  // first attempt died at 0.3 of 16000 ms, retry runs in full
  CHECK(result.jobs[0].exec_ms == 16000 + 4800);
}

TEST_CASE("a task failing too often fails the job") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 2, "slots_per_node": 4, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 128, "reduces": 0 } ],
    "faults": [
      { "kind": "disk_exception", "job": 0, "map": 0, "task_progress": 0.3 },
      { "kind": "disk_exception", "job": 0, "map": 0, "task_progress": 0.35 },
      { "kind": "disk_exception", "job": 0, "map": 0, "task_progress": 0.4 },
      { "kind": "disk_exception", "job": 0, "map": 0, "task_progress": 0.45 }
    ],
    "policy": "yarn", "seed": 1
  })");
  const RunResult result = run_scenario(cfg, PolicyKind::Yarn, 1);
  CHECK_FALSE(result.jobs[0].completed);
}

TEST_CASE("collective episodes ramp in geometric waves") {
  auto cfg = load_scenario_file(scenario_dir() + "/speculation_waves.json");
  const RunResult result = run_scenario(cfg, PolicyKind::Bino, 1);
  for (const auto& j : result.jobs) CHECK(j.completed);
  CHECK(result.tasks_with_duplicate_running == 0);

  REQUIRE(!result.policy_stats.episodes.empty());
  const WaveRecord& e = result.policy_stats.episodes.front();
  CHECK(e.neighborhood_launches == 0);  // the neighbor was saturated on purpose
  REQUIRE(e.wave_sizes.size() >= 4);
  for (std::size_t i = 0; i < e.wave_sizes.size(); ++i) {
    CHECK(e.wave_sizes[i] == wave_size(1, 2, static_cast<int>(i)));
  }
}

TEST_CASE("a multiplier of one keeps every wave at the initial size") {
  auto cfg = load_scenario_file(scenario_dir() + "/speculation_waves.json");
  cfg.bino.coll_init_num = 1;
  cfg.bino.coll_multiply = 1;
  const RunResult result = run_scenario(cfg, PolicyKind::Bino, 1);
  for (const auto& j : result.jobs) CHECK(j.completed);
  REQUIRE(!result.policy_stats.episodes.empty());
  for (const auto& e : result.policy_stats.episodes) {
    for (int w : e.wave_sizes) CHECK(w == 1);
  }
}

TEST_CASE("a lost output is re-executed at the second consecutive fetch failure") {
  auto cfg = load_scenario_file(scenario_dir() + "/lost_map_output.json");
  const RunResult bino = run_scenario(cfg, PolicyKind::Bino, 1);
  const RunResult yarn = run_scenario(cfg, PolicyKind::Yarn, 1);
  CHECK(bino.jobs[0].completed);
  CHECK(yarn.jobs[0].completed);
  CHECK(bino.jobs[0].exec_ms < yarn.jobs[0].exec_ms);

  REQUIRE(bino.policy_stats.completed_respecs.size() == 1);
  const RespecRecord& r = bino.policy_stats.completed_respecs.front();
  CHECK(r.consecutive_failures == 2);
  CHECK_FALSE(r.via_failure_assessment);
  // the respec instant is the second failure event of that pair
  bool matched = false;
  for (const auto& f : bino.fetch_failures) {
    if (f.map_task_id == r.map_task_id && f.consecutive == 2 && f.at_ms == r.at_ms) {
      matched = true;
    }
  }
  CHECK(matched);
}

TEST_CASE("rollback resumes from the last spill and races a fresh copy") {
  auto cfg = load_scenario_file(scenario_dir() + "/disk_exception_resume.json");
  cfg.faults.entries[0].trigger.progress = 0.9;  // four spills logged
  Simulator sim(cfg, PolicyKind::Bino, 1);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);
  CHECK(result.policy_stats.rollback_resume_launches == 1);
  CHECK(result.policy_stats.rollback_fresh_launches == 1);

  const TaskAttempt& original = sim.attempts()[0];
  CHECK(original.state == AttemptState::Failed);
  REQUIRE(original.spill_log.size() == 4);

  bool saw_resume = false;
  for (const TaskAttempt& a : sim.attempts()) {
    if (a.attempt_id == original.attempt_id) continue;
    if (a.initial_score > 0.0) {
      saw_resume = true;
      CHECK(a.initial_score == doctest::Approx(0.8));
      CHECK(a.node_id == original.node_id);  // pinned to the spill log's node
      CHECK(a.state == AttemptState::Succeeded);  // 1/5 of the work left: it wins
    }
  }
  CHECK(saw_resume);
}

TEST_CASE("rollback before the first spill starts everything from scratch") {
  auto cfg = load_scenario_file(scenario_dir() + "/disk_exception_resume.json");
  cfg.faults.entries[0].trigger.progress = 0.1;  // nothing spilled yet
  Simulator sim(cfg, PolicyKind::Bino, 1);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);
  CHECK(result.policy_stats.rollback_resume_launches == 0);
  for (const TaskAttempt& a : sim.attempts()) {
    CHECK(a.initial_score == doctest::Approx(0.0));
  }
}

TEST_CASE("a slow origin suppresses the pinned resume") {
  auto cfg = load_scenario_file(scenario_dir() + "/disk_exception_resume.json");
  cfg.faults.entries[0].trigger.progress = 0.9;
  FaultEntry slow;
  slow.kind = FaultKind::NodeSlow;
  slow.trigger.kind = FaultTrigger::Kind::AtTime;
  slow.trigger.at_ms = 1000;
  slow.target.kind = FaultTarget::Kind::Node;
  slow.target.node_id = 0;  // where the pinned job spills
  slow.factor = 4.0;
  cfg.faults.entries.push_back(slow);
  const RunResult result = run_scenario(cfg, PolicyKind::Bino, 1);
  CHECK(result.jobs[0].completed);
  CHECK(result.policy_stats.rollback_resume_launches == 0);
  CHECK(result.policy_stats.rollback_fresh_launches >= 1);
}

TEST_CASE("more spills before the fault mean faster recovery") {
  auto base = load_scenario_file(scenario_dir() + "/disk_exception_resume.json");
  std::vector<SimTime> completion;
  for (int k = 0; k <= 4; ++k) {
    auto cfg = base;
    cfg.faults.entries[0].trigger.progress = 0.1 + 0.2 * k;  // k spills logged
    const RunResult result = run_scenario(cfg, PolicyKind::Bino, 1);
    REQUIRE(result.jobs[0].completed);
    completion.push_back(result.jobs[0].exec_ms);
  }
  for (std::size_t i = 1; i < completion.size(); ++i) {
    CHECK(completion[i] < completion[i - 1]);
  }
}

TEST_CASE("each assessment can run alone") {
  // a slow node inside a four-node neighborhood: detectable by comparison
  auto slow_cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 4, "size_neighbor": 4 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 2048, "reduces": 2 } ],
    "faults": [ { "kind": "node_slow", "node": 2, "factor": 10.0, "at_ms": 4000 } ],
    "policy": "bino", "seed": 1
  })");
  // a dead pinned node: detectable by silence, not by comparing reports
  auto dead_cfg = load_scenario_file(scenario_dir() + "/pinned_job_outage.json");

  auto only = [](ScenarioConfig cfg, int keep) {
    cfg.bino.assess_spatial = keep == 0;
    cfg.bino.assess_temporal = keep == 1;
    cfg.bino.assess_failure = keep == 2;
    return cfg;
  };

  const RunResult spatial = run_scenario(only(slow_cfg, 0), PolicyKind::Bino, 1);
  CHECK(spatial.jobs[0].completed);
  CHECK(spatial.policy_stats.spatial_verdicts > 0);
  CHECK(spatial.policy_stats.temporal_verdicts == 0);
  CHECK(spatial.policy_stats.failure_assessments == 0);

  const RunResult temporal = run_scenario(only(dead_cfg, 1), PolicyKind::Bino, 1);
  CHECK(temporal.jobs[0].completed);
  CHECK(temporal.policy_stats.temporal_verdicts > 0);
  CHECK(temporal.policy_stats.spatial_verdicts == 0);
  CHECK(temporal.policy_stats.failure_assessments == 0);

  const RunResult failure = run_scenario(only(dead_cfg, 2), PolicyKind::Bino, 1);
  CHECK(failure.jobs[0].completed);
  CHECK(failure.policy_stats.failure_assessments > 0);
  CHECK(failure.policy_stats.spatial_verdicts == 0);
  CHECK(failure.policy_stats.temporal_verdicts == 0);

  // with every assessment off nothing fires; the slow node still finishes on
  // its own, just late
  const RunResult none = run_scenario(only(slow_cfg, -1), PolicyKind::Bino, 1);
  CHECK(none.jobs[0].completed);
  CHECK(none.policy_stats.spatial_verdicts == 0);
  CHECK(none.policy_stats.temporal_verdicts == 0);
  CHECK(none.policy_stats.failure_assessments == 0);
}
