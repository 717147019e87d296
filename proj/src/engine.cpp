#include "mrsim/engine.hpp"

#include <cstdio>
#include <stdexcept>

namespace mrsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Heartbeat: return "heartbeat";
    case EventKind::ProgressQuantum: return "progress";
    case EventKind::FaultActivation: return "fault";
    case EventKind::SpeculatorWakeup: return "wakeup";
    case EventKind::ShuffleFetch: return "fetch";
    case EventKind::JobArrival: return "job_arrival";
    case EventKind::AttemptComplete: return "attempt_complete";
  }
  return "unknown";
}

EventQueue::Handle EventQueue::schedule(SimTime fire_at, EventKind kind,
                                        std::int64_t a, std::int64_t b,
                                        Callback fn) {
  if (fire_at < now_) {
    throw std::logic_error("EventQueue::schedule: fire_at is in the past");
  }
  const Handle h = next_handle_++;
  live_.emplace(h, Entry{fire_at, kind, a, b, std::move(fn)});
  queue_.emplace(fire_at, h);
  return h;
}

bool EventQueue::cancel(Handle h) {
  // The heap entry stays behind as a tombstone and is skipped on pop.
  return live_.erase(h) != 0;
}

void EventQueue::trace_note(const std::string& text) {
  if (!trace_) return;
  char head[32];
  std::snprintf(head, sizeof(head), "%llu,-,note,",
                static_cast<unsigned long long>(now_));
  *trace_ += head;
  *trace_ += text;
  *trace_ += '\n';
}

SimSummary EventQueue::run(std::optional<SimTime> until) {
  std::uint64_t fired = 0;
  halted_ = false;
  while (!queue_.empty() && !halted_) {
    const QueueItem top = queue_.top();
    auto it = live_.find(top.second);
    if (it == live_.end()) {
      queue_.pop();  // cancelled
      continue;
    }
    if (until && top.first > *until) break;
    queue_.pop();
    Entry entry = std::move(it->second);
    live_.erase(it);
    now_ = entry.fire_at;
    ++fired;
    ++processed_;
    if (processed_ > max_events_) {
      throw std::runtime_error(
          "EventQueue::run: exceeded max event budget (" +
          std::to_string(max_events_) + "); simulation is likely stuck");
    }
    if (trace_) {
      char line[96];
      std::snprintf(line, sizeof(line), "%llu,%llu,%s,%lld:%lld\n",
                    static_cast<unsigned long long>(entry.fire_at),
                    static_cast<unsigned long long>(top.second),
                    to_string(entry.kind), static_cast<long long>(entry.a),
                    static_cast<long long>(entry.b));
      *trace_ += line;
    }
    entry.fn(now_);
  }
  return SimSummary{fired, now_};
}

}  // namespace mrsim
