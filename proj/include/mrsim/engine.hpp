#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mrsim {

// Virtual time in milliseconds. The simulation has no relation to wall-clock
// time; all durations are expressed in this unit.
using SimTime = std::uint64_t;

enum class EventKind : std::uint8_t {
  Heartbeat,
  ProgressQuantum,
  FaultActivation,
  SpeculatorWakeup,
  ShuffleFetch,
  JobArrival,
  AttemptComplete,
};

const char* to_string(EventKind kind);

struct SimSummary {
  std::uint64_t events_processed = 0;
  SimTime final_time = 0;
};

// Deterministic event queue. Events fire in (fire_at, sequence) order, so two
// events scheduled for the same instant fire in the order they were scheduled.
class EventQueue {
 public:
  using Handle = std::uint64_t;  // 0 is never a valid handle
  using Callback = std::function<void(SimTime)>;

  static constexpr std::uint64_t kDefaultMaxEvents = 20'000'000;

  explicit EventQueue(std::uint64_t max_events = kDefaultMaxEvents)
      : max_events_(max_events) {}

  SimTime now() const { return now_; }
  std::uint64_t processed() const { return processed_; }
  std::size_t pending_count() const { return live_.size(); }

  // Schedules an event; fire_at must not be in the past. The payload pair
  // (a, b) only feeds the trace, the callback carries the real work.
  Handle schedule(SimTime fire_at, EventKind kind, std::int64_t a, std::int64_t b,
                  Callback fn);

  // True if the event was still pending and is now guaranteed never to fire.
  bool cancel(Handle h);
  bool pending(Handle h) const { return live_.count(h) != 0; }

  // Processes events until the queue empties or the horizon passes. Events
  // scheduled exactly at `until` are still processed. Throws std::runtime_error
  // once more than max_events have fired (runaway-simulation guard).
  SimSummary run(std::optional<SimTime> until = std::nullopt);

  // Makes run() return after the current callback; later events never fire.
  void halt() { halted_ = true; }

  // When set, every fired event appends "time,sequence,kind,a:b\n" and
  // trace_note lines are recorded as "time,-,note,<text>\n".
  void set_trace_sink(std::string* sink) { trace_ = sink; }
  void trace_note(const std::string& text);

 private:
  struct Entry {
    SimTime fire_at;
    EventKind kind;
    std::int64_t a;
    std::int64_t b;
    Callback fn;
  };

  using QueueItem = std::pair<SimTime, Handle>;
  struct ItemOrder {
    bool operator()(const QueueItem& lhs, const QueueItem& rhs) const {
      return lhs.first != rhs.first ? lhs.first > rhs.first
                                    : lhs.second > rhs.second;
    }
  };

  SimTime now_ = 0;
  std::uint64_t next_handle_ = 1;
  std::uint64_t processed_ = 0;
  std::uint64_t max_events_;
  bool halted_ = false;
  std::priority_queue<QueueItem, std::vector<QueueItem>, ItemOrder> queue_;
  std::unordered_map<Handle, Entry> live_;
  std::string* trace_ = nullptr;
};

}  // namespace mrsim
