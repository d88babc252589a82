#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freerider/horizon.hpp"
#include "freerider/matrix_game.hpp"
#include "freerider/policy.hpp"

namespace freerider {

struct TimeStep {
  GameState state;
  Action action1;
  Action action2;
  double reward1;
  double reward2;
};

struct Trajectory {
  std::vector<TimeStep> steps;
  std::uint64_t seed = 0;
  int realized_length() const { return static_cast<int>(steps.size()); }
};

// Plays one episode. The horizon is sampled first from the episode's own rng,
// then actions are drawn per step (player 1 before player 2). Reproducible:
// the same seed yields the same trajectory.
Trajectory rollout(const MatrixGame& game, const MemoryOnePolicy& policy1,
                   const MemoryOnePolicy& policy2, const HorizonModel& horizon,
                   std::uint64_t seed);

// Sum of gamma^t * r_t for the given player (0 or 1); gamma = 1 gives the
// undiscounted episode return.
double episode_return(const Trajectory& traj, int player, double gamma);

// CSV schema: step,state,action_p1,action_p2,reward_p1,reward_p2
std::string trajectory_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text);

}  // namespace freerider
