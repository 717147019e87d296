#include "mrsim/policy.hpp"

#include <cmath>

#include "mrsim/simulator.hpp"
#include "policy_impl.hpp"

namespace mrsim {
namespace {

// No speculation at all; failed attempts still get the framework's plain
// from-scratch retry so fault-free reference runs are well defined.
class NullPolicy final : public SpeculationPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::None; }
  SimTime wakeup_interval() const override { return 0; }
  void on_wakeup(Simulator&, SimTime) override {}
  void on_heartbeat(Simulator&, int, SimTime) override {}
  void on_attempt_finished(Simulator&, int) override {}
  void on_fetch_failure(Simulator&, int, int, int) override {}
  void on_launched(Simulator&, const SpeculationDecision&, int) override {}

  void on_attempt_failed(Simulator& sim, int attempt_id) override {
    const TaskAttempt& a = sim.attempt(attempt_id);
    const Task& t = sim.task(a.task_id);
    if (t.completed || sim.running_attempt_count(t.task_id) > 0) return;
    SpeculationDecision d;
    d.task_id = t.task_id;
    d.reason = LaunchReason::Relaunch;
    sim.request_launch(std::move(d));
  }
};

}  // namespace

const char* to_string(LaunchReason reason) {
  switch (reason) {
    case LaunchReason::Initial: return "initial";
    case LaunchReason::Relaunch: return "relaunch";
    case LaunchReason::BaselineSpeculation: return "baseline_spec";
    case LaunchReason::NeighborhoodSpeculation: return "neighborhood_spec";
    case LaunchReason::CollectiveWave: return "collective_wave";
    case LaunchReason::CompletedTaskRecovery: return "completed_recovery";
    case LaunchReason::RollbackResume: return "rollback_resume";
    case LaunchReason::RollbackFresh: return "rollback_fresh";
  }
  return "unknown";
}

double population_stddev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double accum = 0.0;
  for (double v : values) accum += (v - mean) * (v - mean);
  return std::sqrt(accum / static_cast<double>(values.size()));
}

bool spatially_slow(std::span<const std::optional<double>> rates, std::size_t self,
                    bool exclude_self) {
  if (self >= rates.size() || !rates[self]) return false;
  std::vector<double> defined;
  defined.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (exclude_self && i == self) continue;
    if (rates[i]) defined.push_back(*rates[i]);
  }
  if (defined.size() < 2) return false;
  double mean = 0.0;
  for (double v : defined) mean += v;
  mean /= static_cast<double>(defined.size());
  const double sigma = population_stddev(defined);
  // boundary cases are not slow: rounding in mean/sigma must not let a value
  // that equals the cutoff in exact arithmetic slip under it (a two-value
  // population puts the minimum exactly on the cutoff)
  const double cutoff = mean - sigma;
  return *rates[self] < cutoff - 1e-9 * std::abs(cutoff);
}

bool temporally_slow(double delta_prev, double delta_curr, double threshold) {
  if (delta_prev <= 0.0) return false;
  return delta_curr < threshold * delta_prev;
}

bool failure_assessed(SimTime now, SimTime last_heartbeat, double fail_threshold_ms) {
  if (now <= last_heartbeat) return false;
  return static_cast<double>(now - last_heartbeat) > fail_threshold_ms;
}

std::unique_ptr<SpeculationPolicy> make_policy(PolicyKind kind, const ScenarioConfig& cfg) {
  switch (kind) {
    case PolicyKind::Yarn:
      return make_yarn_policy(cfg);
    case PolicyKind::Bino:
      return make_bino_policy(cfg);
    case PolicyKind::None:
      break;
  }
  return std::make_unique<NullPolicy>();
}

}  // namespace mrsim
