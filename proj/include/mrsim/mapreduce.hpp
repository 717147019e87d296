#pragma once

#include <optional>
#include <vector>

#include "mrsim/engine.hpp"

namespace mrsim {

enum class TaskKind { Map, Reduce };
enum class AttemptState { Running, Succeeded, Failed, Killed };
enum class MofStatus { Available, Lost, Discarded };

const char* to_string(TaskKind kind);
const char* to_string(AttemptState state);

// A map attempt appends one entry each time its progress crosses a multiple of
// 1/num_spills. Offsets are a pure function of split size and spill count, so
// a restarted attempt can resume from the last entry.
struct SpillEntry {
  int index = 0;                  // 1-based spill number
  double input_offset_bytes = 0;  // index / num_spills * split bytes
  SimTime produced_at = 0;
};

// Map output file: one record per succeeded map attempt, holding all reducer
// partitions of that attempt on the node that ran it.
struct MofOutput {
  int output_id = 0;
  int map_task_id = 0;
  int attempt_id = 0;
  int node_id = 0;
  MofStatus status = MofStatus::Available;
};

// Per-source-map fetch state inside one reduce attempt's shuffle.
struct ShuffleSlot {
  enum class State {
    WaitingProduce,  // source map not finished yet
    Fetchable,       // an Available output exists, not fetched yet
    Fetching,        // transfer in flight
    Fetched,
    Missing,         // outputs exist but none Available; retry probes pending
  };
  State state = State::WaitingProduce;
  SimTime fetch_start = 0;
  double fetch_ms = 0.0;
  int source_output = -1;  // output being / last fetched
  EventQueue::Handle transfer_event = 0;
  EventQueue::Handle probe_event = 0;
};

enum class ReducePhase { Shuffle, Reduce };

struct TaskAttempt {
  int attempt_id = 0;
  int task_id = 0;
  int job_id = 0;
  TaskKind kind = TaskKind::Map;
  int node_id = 0;
  AttemptState state = AttemptState::Running;
  bool is_speculative = false;

  SimTime start_time = 0;
  SimTime end_time = 0;
  SimTime last_update = 0;   // progress integrated up to this instant
  double score = 0.0;        // exact progress in [0, 1]
  double reported_score = 0.0;  // last value carried by a heartbeat
  SimTime reported_at = 0;      // when that report was taken
  double hb_prev_score = 0.0;   // reported value one heartbeat earlier
  double initial_score = 0.0;   // > 0 when resumed from a spill log

  // map-side state
  std::vector<SpillEntry> spill_log;
  int resume_spill_index = 0;

  // reduce-side state
  ReducePhase phase = ReducePhase::Shuffle;
  std::vector<ShuffleSlot> shuffle;
  int fetching_slot = -1;
  int fetched_count = 0;
  double reduce_score = 0.0;  // progress of the post-shuffle third

  EventQueue::Handle progress_event = 0;

  bool running() const { return state == AttemptState::Running; }
};

struct Task {
  int task_id = 0;
  int job_id = 0;
  int index_in_job = 0;
  TaskKind kind = TaskKind::Map;
  double input_mb = 0.0;  // map: split size; reduce: total shuffle volume
  std::vector<int> attempts;
  bool completed = false;
  int failed_attempts = 0;
  bool recovery_pending = false;  // a replacement for lost output is in flight
  int consumed_output = -1;       // output kept at job completion (maps)
  SimTime first_failure_at = 0;
  SimTime completed_at = 0;
};

enum class JobState { Pending, Running, Done, Failed };

struct Job {
  int job_id = 0;
  SimTime arrival_ms = 0;
  double input_mb = 0.0;
  int pin_node = -1;  // force every attempt of this job onto one node
  JobState state = JobState::Pending;
  SimTime completion_ms = 0;
  bool reduces_launched = false;
  std::vector<int> map_tasks;
  std::vector<int> reduce_tasks;
  int speculative_launches = 0;
  double wasted_work = 0.0;  // progress thrown away by killed/failed attempts
};

// Progress rate rho = score / runtime; undefined until the attempt has aged.
inline std::optional<double> progress_rate(double score, SimTime runtime_ms) {
  if (runtime_ms == 0) return std::nullopt;
  return score / static_cast<double>(runtime_ms);
}

// Shuffle accounts for two thirds of a reduce attempt's score, the reduce
// phase for the remaining third. fetch_fraction is the in-flight transfer's
// completion in [0, 1).
double reduce_attempt_score(int fetched, int total_sources, double fetch_fraction,
                            ReducePhase phase, double reduce_score);

double spill_offset_bytes(int spill_index, int num_spills, double split_bytes);

}  // namespace mrsim
