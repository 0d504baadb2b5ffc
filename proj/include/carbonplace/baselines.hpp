#pragma once

#include <memory>
#include <string>
#include <vector>

#include "carbonplace/simulator.hpp"

namespace carbonplace {

struct SamplingConfig {
  int samples = 256;
  double hysteresis = 0.10;
};

std::unique_ptr<Strategy> aceso_strategy();
std::unique_ptr<Strategy> static_strategy();
std::unique_ptr<Strategy> vanilla_ga_strategy();
std::unique_ptr<Strategy> stochastic_sampling_strategy(const SamplingConfig& config = {});
std::unique_ptr<Strategy> brute_force_strategy();

const std::vector<std::string>& strategy_names();
// Throws ValidationError for unknown names.
std::unique_ptr<Strategy> make_strategy(const std::string& name);

// The context the vanilla GA searches: no region filter, no activation
// pinning, no greenest-region seed.
OptContext vanilla_context(OptContext ctx);

}  // namespace carbonplace
