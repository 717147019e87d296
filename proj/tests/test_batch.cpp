#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "mrsim/batch.hpp"
#include "mrsim/metrics.hpp"
#include "mrsim/scenario.hpp"

using namespace mrsim;

namespace {

std::vector<BatchItem> make_items() {
  const auto cfg = parse_scenario(R"({
    "cluster": { "nodes": 4, "slots_per_node": 2, "size_neighbor": 2 },
    "jobs": [
      { "arrival_ms": 0, "input_mb": 512, "reduces": 1 },
      { "arrival_ms": 4000, "input_mb": 256, "reduces": 1 }
    ],
    "faults": [ { "kind": "node_slow", "node": 1, "factor": 5.0, "at_ms": 3000,
                  "duration_ms": 20000 } ],
    "policy": "bino", "seed": 1
  })");
  std::vector<BatchItem> items;
  for (const auto policy : {PolicyKind::Yarn, PolicyKind::Bino}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      BatchItem item;
      item.label = std::string(to_string(policy)) + "-" + std::to_string(seed);
      item.scenario = cfg;
      item.policy = policy;
      item.seed = seed;
      items.push_back(item);
    }
  }
  return items;
}

}  // namespace

TEST_CASE("parallel batches are byte-identical to serial ones") {
  const auto items = make_items();
  const auto serial = BatchRunner(false).run(items);
  const auto parallel = BatchRunner(true).run(items);
  REQUIRE(serial.size() == items.size());
  REQUIRE(parallel.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(serial[i].label == items[i].label);  // outcomes keep item order
    CHECK(parallel[i].label == serial[i].label);
    CHECK(records_csv(parallel[i].records) == records_csv(serial[i].records));
    CHECK(parallel[i].run.summary.events_processed ==
          serial[i].run.summary.events_processed);
    CHECK(parallel[i].reference.summary.events_processed ==
          serial[i].reference.summary.events_processed);
  }
}

TEST_CASE("every batch outcome carries its fault-free reference") {
  const auto outcomes = BatchRunner(true).run(make_items());
  for (const auto& o : outcomes) {
    CHECK(o.reference.policy == PolicyKind::None);
    for (const auto& r : o.records) {
      if (!r.complete) continue;
      CHECK(r.baseline_ms > 0);
      CHECK(r.slowdown >= 1.0 - 1e-9);
    }
  }
}
