#include "mrsim/mapreduce.hpp"

namespace mrsim {

const char* to_string(TaskKind kind) {
  return kind == TaskKind::Map ? "map" : "reduce";
}

const char* to_string(AttemptState state) {
  switch (state) {
    case AttemptState::Running: return "running";
    case AttemptState::Succeeded: return "succeeded";
    case AttemptState::Failed: return "failed";
    case AttemptState::Killed: return "killed";
  }
  return "unknown";
}

double reduce_attempt_score(int fetched, int total_sources, double fetch_fraction,
                            ReducePhase phase, double reduce_score) {
  if (phase == ReducePhase::Reduce) {
    return 2.0 / 3.0 + reduce_score / 3.0;
  }
  if (total_sources == 0) return 2.0 / 3.0;
  const double shuffled =
      (static_cast<double>(fetched) + fetch_fraction) / total_sources;
  return 2.0 / 3.0 * shuffled;
}

double spill_offset_bytes(int spill_index, int num_spills, double split_bytes) {
  return static_cast<double>(spill_index) / num_spills * split_bytes;
}

}  // namespace mrsim
