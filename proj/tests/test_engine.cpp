#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrsim/engine.hpp"

using namespace mrsim;

TEST_CASE("event fires at its scheduled instant") {
  EventQueue q;
  SimTime fired_at = 0;
  q.schedule(1000, EventKind::Heartbeat, 0, 0, [&](SimTime t) { fired_at = t; });
  const SimSummary s = q.run();
  CHECK(fired_at == 1000);
  CHECK(s.events_processed == 1);
  CHECK(s.final_time == 1000);
  CHECK(q.now() == 1000);
}

TEST_CASE("same-instant events fire in scheduling order") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(500, EventKind::Heartbeat, 1, 0, [&](SimTime) { order.push_back(1); });
  q.schedule(500, EventKind::Heartbeat, 2, 0, [&](SimTime) { order.push_back(2); });
  q.schedule(500, EventKind::Heartbeat, 3, 0, [&](SimTime) { order.push_back(3); });
  q.run();
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("scheduling in the past is an error") {
  EventQueue q;
  q.schedule(100, EventKind::Heartbeat, 0, 0, [&](SimTime) {
    CHECK_THROWS_AS(q.schedule(99, EventKind::Heartbeat, 0, 0, [](SimTime) {}),
                    std::logic_error);
  });
  q.run();
}

TEST_CASE("cancel semantics") {
  EventQueue q;
  bool fired = false;
  const auto h = q.schedule(10, EventKind::Heartbeat, 0, 0,
                            [&](SimTime) { fired = true; });
  CHECK(q.pending(h));
  CHECK(q.cancel(h));
  CHECK_FALSE(q.cancel(h));  // second cancel is a no-op
  CHECK_FALSE(q.pending(h));
  q.run();
  CHECK_FALSE(fired);

  const auto h2 = q.schedule(20, EventKind::Heartbeat, 0, 0, [](SimTime) {});
  q.run();
  CHECK_FALSE(q.cancel(h2));  // already fired
}

TEST_CASE("run until horizon processes events at the horizon inclusive") {
  EventQueue q;
  int count = 0;
  for (SimTime t : {SimTime{1}, SimTime{2}, SimTime{3}}) {
    q.schedule(t, EventKind::Heartbeat, 0, 0, [&](SimTime) { ++count; });
  }
  const SimSummary s = q.run(SimTime{2});
  CHECK(count == 2);
  CHECK(s.events_processed == 2);
  CHECK(q.pending_count() == 1);
}

TEST_CASE("running an empty queue is a no-op") {
  EventQueue q;
  const SimSummary s = q.run();
  CHECK(s.events_processed == 0);
  CHECK(s.final_time == 0);
}

TEST_CASE("halt stops processing after the current callback") {
  EventQueue q;
  int count = 0;
  q.schedule(1, EventKind::Heartbeat, 0, 0, [&](SimTime) {
    ++count;
    q.halt();
  });
  q.schedule(2, EventKind::Heartbeat, 0, 0, [&](SimTime) { ++count; });
  q.run();
  CHECK(count == 1);
}

TEST_CASE("runaway simulations abort with a diagnostic") {
  EventQueue q(50);
  std::function<void(SimTime)> again = [&](SimTime t) {
    q.schedule(t + 1, EventKind::Heartbeat, 0, 0, again);
  };
  q.schedule(1, EventKind::Heartbeat, 0, 0, again);
  CHECK_THROWS_AS(q.run(), std::runtime_error);
}

TEST_CASE("trace lines carry time, sequence, kind and payload") {
  EventQueue q;
  std::string trace;
  q.set_trace_sink(&trace);
  q.schedule(7, EventKind::Heartbeat, 3, 0, [](SimTime) {});
  q.schedule(9, EventKind::JobArrival, 5, 0, [&](SimTime) { q.trace_note("hello"); });
  q.run();
  CHECK(trace == "7,1,heartbeat,3:0\n9,2,job_arrival,5:0\n9,-,note,hello\n");
}

// every firing respects the (fire_at, sequence) total order, no matter the
// insertion pattern
TEST_CASE("total order over randomized schedules") {
  std::mt19937_64 gen(42);
  for (int round = 0; round < 20; ++round) {
    EventQueue q;
    std::vector<std::pair<SimTime, std::uint64_t>> fired;
    std::uint64_t seq = 0;
    for (int i = 0; i < 200; ++i) {
      const SimTime at = gen() % 1000;
      const std::uint64_t s = ++seq;
      q.schedule(at, EventKind::Heartbeat, static_cast<std::int64_t>(i), 0,
                 [&fired, at, s](SimTime) { fired.emplace_back(at, s); });
    }
    q.run();
    CHECK(fired.size() == 200);
    CHECK(std::is_sorted(fired.begin(), fired.end()));
  }
}

// a canceled event never fires even when the cancellation happens from inside
// another callback at the same instant
TEST_CASE("cancellation is safe mid-run") {
  std::mt19937_64 gen(7);
  for (int round = 0; round < 20; ++round) {
    EventQueue q;
    std::vector<EventQueue::Handle> handles;
    std::set<int> fired;
    std::set<int> canceled;
    for (int i = 0; i < 100; ++i) {
      const SimTime at = 1 + gen() % 50;
      handles.push_back(q.schedule(at, EventKind::Heartbeat, i, 0,
                                   [&fired, i](SimTime) { fired.insert(i); }));
    }
    for (int i = 0; i < 100; ++i) {
      if (gen() % 3 != 0) continue;
      const int victim = static_cast<int>(gen() % 100);
      const SimTime at = 1 + gen() % 50;
      q.schedule(at, EventKind::Heartbeat, -1, 0, [&, victim](SimTime) {
        if (q.cancel(handles[static_cast<std::size_t>(victim)])) {
          canceled.insert(victim);
        }
      });
    }
    q.run();
    for (int v : canceled) CHECK(fired.count(v) == 0);
    for (int i = 0; i < 100; ++i) {
      CHECK((fired.count(i) ^ canceled.count(i)) == 1);
    }
  }
}

TEST_CASE("identical schedules produce identical traces") {
  auto drive = [] {
    EventQueue q;
    std::string trace;
    q.set_trace_sink(&trace);
    std::mt19937_64 gen(123);
    for (int i = 0; i < 500; ++i) {
      q.schedule(gen() % 2000, EventKind::ProgressQuantum, i, static_cast<std::int64_t>(gen() % 10),
                 [](SimTime) {});
    }
    q.run();
    return trace;
  };
  CHECK(drive() == drive());
}
