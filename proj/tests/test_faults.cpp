#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrsim/faults.hpp"
#include "mrsim/scenario.hpp"
#include "mrsim/simulator.hpp"

using namespace mrsim;

namespace {

std::vector<FaultEntry> expand(int count, double ratio, std::uint64_t seed,
                               int nodes = 10) {
  RandomFaultSpec spec;
  spec.count = count;
  spec.failure_ratio = ratio;
  spec.window_lo_ms = 10000;
  spec.window_hi_ms = 200000;
  Rng rng(seed);
  return expand_random_faults(spec, nodes, rng);
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("ratio one makes every random fault a node failure") {
  const auto entries = expand(5, 1.0, 42);
  REQUIRE(entries.size() == 5);
  for (const auto& e : entries) CHECK(e.kind == FaultKind::NodeFail);
}

TEST_CASE("ratio zero makes every random fault a slowdown") {
  const auto entries = expand(5, 0.0, 42);
  REQUIRE(entries.size() == 5);
  for (const auto& e : entries) {
    CHECK(e.kind == FaultKind::NodeSlow);
    CHECK(e.duration_ms > 0);
  }
}

TEST_CASE("fractional ratios round to an exact failure count") {
  const auto entries = expand(10, 0.4, 7);
  REQUIRE(entries.size() == 10);
  int fails = 0;
  int slows = 0;
  std::set<int> failed_nodes;
  for (const auto& e : entries) {
    if (e.kind == FaultKind::NodeFail) {
      ++fails;
      failed_nodes.insert(e.target.node_id);
    } else {
      CHECK(e.kind == FaultKind::NodeSlow);
      ++slows;
    }
  }
  CHECK(fails == 4);
  CHECK(slows == 6);
  CHECK(failed_nodes.size() == 4);  // failures target distinct nodes

  // same spec, same seed, same concrete script
  const auto again = expand(10, 0.4, 7);
  REQUIRE(again.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].kind == again[i].kind);
    CHECK(entries[i].trigger.at_ms == again[i].trigger.at_ms);
    CHECK(entries[i].target.node_id == again[i].target.node_id);
    CHECK(entries[i].duration_ms == again[i].duration_ms);
  }
}

TEST_CASE("random fault expansion orders entries by firing time") {
  const auto entries = expand(20, 0.3, 99);
  for (std::size_t i = 1; i < entries.size(); ++i) {
    CHECK(entries[i - 1].trigger.at_ms <= entries[i].trigger.at_ms);
  }
}

TEST_CASE("expansion never fails every node") {
  // more requested failures than nodes: at least one node must survive
  const auto entries = expand(12, 1.0, 3, 4);
  std::set<int> failed;
  for (const auto& e : entries) {
    if (e.kind == FaultKind::NodeFail) failed.insert(e.target.node_id);
  }
  CHECK(failed.size() < 4);
}

TEST_CASE("out-of-range ratios are rejected") {
  RandomFaultSpec spec;
  spec.count = 1;
  spec.failure_ratio = 1.5;
  spec.window_hi_ms = 1000;
  Rng rng(1);
  CHECK_THROWS_AS(expand_random_faults(spec, 4, rng), std::invalid_argument);
  spec.failure_ratio = -0.1;
  CHECK_THROWS_AS(expand_random_faults(spec, 4, rng), std::invalid_argument);
}

TEST_CASE("node failure at half map progress kills the node and its outputs") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 2, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 1024, "reduces": 0 } ],
    "faults": [ { "kind": "node_fail", "node": 1, "map_progress": 0.5 } ],
    "policy": "bino", "seed": 1
  })");
  Simulator sim(cfg, PolicyKind::Bino, 1);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);

  CHECK(sim.cluster().node(1).health == NodeHealth::Failed);
  // disk is node-local: nothing on the dead node is fetchable afterwards
  for (const MofOutput& o : sim.outputs()) {
    if (o.node_id == 1) CHECK(o.status == MofStatus::Lost);
  }
  // every completed map left exactly one usable output somewhere else
  for (int task_id : sim.job(0).map_tasks) {
    const Task& t = sim.task(task_id);
    CHECK(t.completed);
    REQUIRE(t.consumed_output >= 0);
    CHECK(sim.outputs()[static_cast<std::size_t>(t.consumed_output)].node_id != 1);
  }
}

TEST_CASE("failing an already failed node changes nothing") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 2, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 512, "reduces": 0 } ],
    "faults": [
      { "kind": "node_fail", "node": 1, "at_ms": 3000 },
      { "kind": "node_fail", "node": 1, "at_ms": 5000 }
    ],
    "policy": "bino", "seed": 1
  })");
  auto single = cfg;
  single.faults.entries.pop_back();

  const RunResult twice = run_scenario(cfg, PolicyKind::Bino, 1);
  const RunResult once = run_scenario(single, PolicyKind::Bino, 1);
  CHECK(twice.jobs[0].completed);
  CHECK(twice.jobs[0].exec_ms == once.jobs[0].exec_ms);
  CHECK(twice.jobs[0].speculative_launches == once.jobs[0].speculative_launches);
}

TEST_CASE("a transient node failure restores an empty node") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 2, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 1024, "reduces": 1 } ],
    "faults": [ { "kind": "node_fail", "node": 1, "at_ms": 3000, "duration_ms": 10000 } ],
    "policy": "bino", "seed": 1
  })");
  Simulator sim(cfg, PolicyKind::Bino, 1);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);
  CHECK(sim.cluster().node(1).health == NodeHealth::Healthy);
  // lost intermediate data needs recomputation even after the node returns
  for (const MofOutput& o : sim.outputs()) {
    if (o.node_id == 1 && o.status == MofStatus::Lost) {
      const Task& t = sim.task(o.map_task_id);
      CHECK(t.consumed_output != o.output_id);
    }
  }
}

TEST_CASE("a disk exception fails the attempt but keeps its spill log") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 2, "slots_per_node": 4, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 128, "reduces": 0 } ],
    "faults": [ { "kind": "disk_exception", "job": 0, "map": 0, "task_progress": 0.8 } ],
    "policy": "none", "seed": 1
  })");
  Simulator sim(cfg, PolicyKind::None, 1);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);

  const TaskAttempt& first = sim.attempts().front();
  CHECK(first.state == AttemptState::Failed);
  REQUIRE(first.spill_log.size() == 4);
  CHECK(first.spill_log.back().index == 4);
}

TEST_CASE("network delay stretches fetches that traverse the node") {
  const std::string base = R"({
    "cluster": { "nodes": 2, "slots_per_node": 8, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 1024, "reduces": 1, "pin_node": 0 } ],
    %FAULTS%
    "policy": "none", "seed": 1
  })";
  auto with = [&](const std::string& faults) {
    std::string json = base;
    json.replace(json.find("%FAULTS%"), 8, faults);
    return run_scenario(parse_scenario(json), PolicyKind::None, 1);
  };
  const RunResult plain = with("\"faults\": [],");
  const RunResult delayed = with(
      R"("faults": [ { "kind": "net_delay", "node": 0, "factor": 2.0, "at_ms": 0 } ],)");
  REQUIRE(plain.jobs[0].completed);
  REQUIRE(delayed.jobs[0].completed);
  // 8 fetches of 128 MB at 20 MB/s double: one extra 6400 ms per fetch
  CHECK(delayed.jobs[0].exec_ms - plain.jobs[0].exec_ms == 8 * 6400);
}

TEST_CASE("progress triggers fire exactly once") {
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 2, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 512, "reduces": 1 } ],
    "faults": [ { "kind": "mof_loss", "job": 0, "map": 0, "map_progress": 0.5 } ],
    "policy": "bino", "seed": 1
  })");
  const RunResult result = run_scenario(cfg, PolicyKind::Bino, 1, true);
  CHECK(result.jobs[0].completed);
  CHECK(count_occurrences(result.trace, ",-,note,fault,mof_loss") == 1);
}

TEST_CASE("a selector that matches nothing records a miss and mutates nothing") {
  // the trigger lands after the map phase: no node hosts a running map
  auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 2, "slots_per_node": 4, "size_neighbor": 2 },
    "jobs": [ { "arrival_ms": 0, "input_mb": 128, "reduces": 1 } ],
    "faults": [ { "kind": "node_fail", "node": "random_map", "at_ms": 20000 } ],
    "policy": "none", "seed": 1
  })");
  Simulator sim(cfg, PolicyKind::None, 1, true);
  const RunResult result = sim.run();
  CHECK(result.jobs[0].completed);
  CHECK(result.jobs[0].exec_ms == 28800);  // untouched critical path
  CHECK(count_occurrences(result.trace, ",-,note,fault_miss,") == 1);
  for (const auto& node : sim.cluster().nodes()) {
    CHECK(node.health == NodeHealth::Healthy);
  }
}
