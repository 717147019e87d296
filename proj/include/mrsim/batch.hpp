#pragma once

#include <string>
#include <vector>

#include "mrsim/metrics.hpp"
#include "mrsim/simulator.hpp"

namespace mrsim {

struct BatchItem {
  std::string label;
  ScenarioConfig scenario;
  PolicyKind policy = PolicyKind::Yarn;
  std::uint64_t seed = 1;
  bool capture_trace = false;
};

struct BatchOutcome {
  std::string label;
  RunResult run;
  RunResult reference;  // fault-free, policy disabled, same seed
  std::vector<MetricsRecord> records;
};

// Executes (scenario, policy, seed) items plus their fault-free references.
// Items are independent simulations, so the parallel path fans them out over
// OpenMP threads; outcomes always come back in item order, byte-identical to
// the serial path.
class BatchRunner {
 public:
  explicit BatchRunner(bool parallel) : parallel_(parallel) {}

  std::vector<BatchOutcome> run(const std::vector<BatchItem>& items) const;

 private:
  bool parallel_;
};

}  // namespace mrsim
