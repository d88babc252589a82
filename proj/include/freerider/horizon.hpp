#pragma once

#include <variant>

#include "freerider/rng.hpp"

namespace freerider {

struct FixedHorizon {
  int length;
};

// Episode length on support {1, 2, ...} with per-step termination probability
// stop_prob, truncated at cap (all remaining mass collapses onto cap).
struct GeometricHorizon {
  double stop_prob;
  int cap;
};

using HorizonModel = std::variant<FixedHorizon, GeometricHorizon>;

// Throws std::invalid_argument on out-of-range parameters.
void validate(const HorizonModel& model);

// Deterministic given the rng state. Fixed(n) consumes no randomness.
int sample_horizon(const HorizonModel& model, Rng& rng);

}  // namespace freerider
