#pragma once

#include <array>
#include <utility>

#include "freerider/matrix_game.hpp"
#include "freerider/policy.hpp"

namespace freerider {

struct ValuePair {
  double v1;
  double v2;
};

struct StateValues {
  std::array<double, kNumStates> player1;
  std::array<double, kNumStates> player2;
};

// Per-state discounted values of both players under a fixed memory-one
// policy pair: solves v = r + gamma * P * v directly (5x5 linear system).
// Guaranteed residual sup-norm <= 1e-10; throws std::invalid_argument for
// gamma outside [0, 1).
StateValues exact_state_values(const MatrixGame& game, const MemoryOnePolicy& policy1,
                               const MemoryOnePolicy& policy2, double gamma);

// Start-state values only.
ValuePair exact_discounted_values(const MatrixGame& game, const MemoryOnePolicy& policy1,
                                  const MemoryOnePolicy& policy2, double gamma);

// Normalized discounted state-visitation from Start under the policy pair:
// d = (1 - gamma) * sum_t gamma^t P(s_t = s). Sums to 1.
std::array<double, kNumStates> discounted_visitation(const MemoryOnePolicy& policy1,
                                                     const MemoryOnePolicy& policy2, double gamma);

}  // namespace freerider
