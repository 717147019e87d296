#include "mrsim/batch.hpp"

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mrsim {

namespace {

BatchOutcome run_item(const BatchItem& item) {
  BatchOutcome outcome;
  outcome.label = item.label;
  outcome.run = run_scenario(item.scenario, item.policy, item.seed, item.capture_trace);
  outcome.reference =
      run_scenario(reference_variant(item.scenario), PolicyKind::None, item.seed);
  outcome.records = build_records(outcome.run, outcome.reference);
  return outcome;
}

}  // namespace

std::vector<BatchOutcome> BatchRunner::run(const std::vector<BatchItem>& items) const {
  std::vector<BatchOutcome> outcomes(items.size());
#if defined(_OPENMP)
  if (parallel_) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(items.size()); ++i) {
      outcomes[static_cast<std::size_t>(i)] =
          run_item(items[static_cast<std::size_t>(i)]);
    }
    return outcomes;
  }
#endif
  for (std::size_t i = 0; i < items.size(); ++i) {
    outcomes[i] = run_item(items[i]);
  }
  return outcomes;
}

}  // namespace mrsim
