#pragma once

#include <memory>

#include "mrsim/policy.hpp"

namespace mrsim {

std::unique_ptr<SpeculationPolicy> make_yarn_policy(const ScenarioConfig& cfg);
std::unique_ptr<SpeculationPolicy> make_bino_policy(const ScenarioConfig& cfg);

}  // namespace mrsim
