#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "mrsim/cluster.hpp"
#include "oracles.hpp"

using namespace mrsim;

TEST_CASE("loss estimate over a single observation is that observation") {
  const std::vector<double> window{4000.0};
  CHECK(weighted_loss_estimate(window) == doctest::Approx(4000.0));
}

TEST_CASE("loss estimate weighs the newest observation twice as much") {
  // window [8000, 4000] newest last: (4*4000 + 2*8000) / 6
  const std::vector<double> window{8000.0, 4000.0};
  CHECK(weighted_loss_estimate(window) == doctest::Approx(32000.0 / 6.0));
}

TEST_CASE("loss estimate of a constant window is the constant") {
  const std::vector<double> window{1000.0, 1000.0, 1000.0};
  CHECK(weighted_loss_estimate(window) == doctest::Approx(1000.0));
}

TEST_CASE("loss estimate matches direct summation on random windows") {
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + gen() % 8;
    std::vector<double> window(n);
    for (auto& w : window) w = 1.0 + static_cast<double>(gen() % 1000000);
    const double got = weighted_loss_estimate(window);
    const double want = oracle::loss_estimate(window);
    CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
  }
}

// the newest observation dominates: perturbing it moves the estimate more
// than the same perturbation applied to the oldest
TEST_CASE("loss estimate recency dominance") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + gen() % 7;
    std::vector<double> window(n);
    for (auto& w : window) w = 100.0 + static_cast<double>(gen() % 10000);
    const double base = weighted_loss_estimate(window);
    auto newest = window;
    newest.back() += 1000.0;
    auto oldest = window;
    oldest.front() += 1000.0;
    CHECK(weighted_loss_estimate(newest) - base >
          weighted_loss_estimate(oldest) - base);
  }
}

TEST_CASE("responsiveness history trims its window and refreshes the threshold") {
  ResponsivenessHistory h;
  h.limit = 4;
  for (double v : {1000.0, 2000.0, 3000.0, 4000.0, 5000.0}) {
    h.record(v, 1000.0, 1.5);
  }
  CHECK(h.window == std::vector<double>{2000.0, 3000.0, 4000.0, 5000.0});
  CHECK(h.estimated_next_ms ==
        doctest::Approx(oracle::loss_estimate(h.window)));
  CHECK(h.fail_threshold_ms == doctest::Approx(1.5 * h.estimated_next_ms));
}

TEST_CASE("threshold never drops below three heartbeat intervals") {
  ResponsivenessHistory h;
  h.record(100.0, 1000.0, 1.5);  // 1.5 * 100 would be far too trigger-happy
  CHECK(h.fail_threshold_ms == doctest::Approx(3000.0));
}

TEST_CASE("neighborhoods partition node ids in ascending order") {
  const auto groups = build_neighborhoods(8, 4);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(groups[1] == std::vector<int>{4, 5, 6, 7});
}

TEST_CASE("a trailing singleton folds into the previous group") {
  const auto groups = build_neighborhoods(9, 4);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(groups[1] == std::vector<int>{4, 5, 6, 7, 8});
}

TEST_CASE("a single-node cluster keeps its singleton group") {
  const auto groups = build_neighborhoods(1, 4);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0] == std::vector<int>{0});
}

TEST_CASE("every node lands in exactly one neighborhood") {
  for (int nodes = 1; nodes <= 40; ++nodes) {
    for (int size : {2, 3, 4, 7}) {
      const auto groups = build_neighborhoods(nodes, size);
      std::vector<int> seen;
      for (const auto& g : groups) {
        if (nodes > 1) CHECK(g.size() >= 2);
        for (int id : g) seen.push_back(id);
      }
      std::vector<int> want(static_cast<std::size_t>(nodes));
      for (int i = 0; i < nodes; ++i) want[static_cast<std::size_t>(i)] = i;
      CHECK(seen == want);
    }
  }
}

TEST_CASE("allocation prefers the requested nodes then falls back ascending") {
  Cluster c(5, 1, 2, 1000);

  const std::vector<int> prefer{3};
  auto got = c.allocate(prefer);
  REQUIRE(got.has_value());
  CHECK(*got == 3);

  c.node(3).running_attempts.insert(0);  // node 3 saturated
  got = c.allocate(prefer);
  REQUIRE(got.has_value());
  CHECK(*got == 0);  // fallback is ascending id order

  c.node(0).health = NodeHealth::Failed;  // failed nodes never offer slots
  got = c.allocate(prefer);
  REQUIRE(got.has_value());
  CHECK(*got == 1);

  for (int id : {1, 2, 4}) c.node(id).running_attempts.insert(id + 10);
  CHECK_FALSE(c.allocate(prefer).has_value());
}

TEST_CASE("preferred order wins over id order") {
  Cluster c(4, 2, 2, 1000);
  const std::vector<int> prefer{2, 1};
  const auto got = c.allocate(prefer);
  REQUIRE(got.has_value());
  CHECK(*got == 2);
}

TEST_CASE("free slot count ignores failed nodes") {
  Cluster c(3, 2, 2, 1000);
  CHECK(c.free_slot_count() == 6);
  c.node(1).health = NodeHealth::Failed;
  CHECK(c.free_slot_count() == 4);
  c.node(0).running_attempts.insert(1);
  CHECK(c.free_slot_count() == 3);
}

TEST_CASE("progress stretch applies only while slow") {
  NodeState n;
  n.health = NodeHealth::Slow;
  n.slow_factor = 2.0;
  CHECK(n.progress_stretch() == doctest::Approx(2.0));
  n.health = NodeHealth::Healthy;
  CHECK(n.progress_stretch() == doctest::Approx(1.0));
}
