#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "freerider/horizon.hpp"
#include "freerider/matrix_game.hpp"
#include "freerider/policy.hpp"
#include "freerider/trajectory.hpp"

namespace freerider {

struct ZerosInit {};
struct GaussianInit {
  double sigma;
};
using ParamInit = std::variant<ZerosInit, GaussianInit>;

// Hyperparameters for the tabular actor-critic. The defaults reproduce the
// vs-fixed and self-play convergence endpoints in well under a minute.
struct TrainConfig {
  double gamma = 0.96;
  double actor_lr = 0.02;
  double critic_lr = 0.2;
  double entropy_coef = 0.01;
  int episodes_per_update = 32;
  int total_updates = 2000;
  HorizonModel horizon = GeometricHorizon{0.04, 500};
  std::uint64_t seed = 0;
  ParamInit init = ZerosInit{};
  bool share_params = false;  // self-play: both seats share one parameter set
  int learner_slot = 1;       // vs-fixed: which seat learns

  void validate() const;  // throws std::invalid_argument
};

// A learner's own view of a state: seat 1 sees the global state, seat 2 sees
// the mirrored one, so "CD" always reads "I cooperated, they defected".
GameState own_view(GameState global_state, int slot);

// Engine-side (global-state) policy induced by learner parameters in a seat.
MemoryOnePolicy induced_policy(const PolicyParams& params, int slot);

struct CurvePoint {
  int update;
  std::array<double, kNumStates> p_defect;  // own-view, after the update
  double mean_return;                       // undiscounted batch mean, learner's seat
  double mean_discounted_return;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  std::uint64_t seed = 0;
  int slot = 1;
  int stage = 0;
};

// CSV schema:
// update,seed,stage,slot,p_defect_start,p_defect_cc,p_defect_cd,p_defect_dc,
// p_defect_dd,mean_return,mean_discounted_return
std::string learning_curve_csv(const std::vector<LearningCurve>& curves);

// One advantage-weighted actor sample; the state is in the learner's own view.
struct AdvantageSample {
  GameState state;
  Action action;
  double advantage;
};

// Surrogate the actor step ascends, advantages held constant:
//   (1/E) * sum_episodes sum_t [ A_t log pi(a_t|s_t) + entropy_coef * H(pi(.|s_t)) ]
double actor_surrogate(const PolicyParams& params, const std::vector<AdvantageSample>& samples,
                       double entropy_coef, int num_episodes);

std::array<std::array<double, 2>, kNumStates> actor_gradient(
    const PolicyParams& params, const std::vector<AdvantageSample>& samples, double entropy_coef,
    int num_episodes);

// One synchronous update from a batch of trajectories generated under
// `params` for config.learner_slot. Actor: advantage-weighted score-function
// step with entropy bonus. Critic: per-state regression toward discounted
// Monte Carlo returns. Pure; inputs are not modified.
PolicyParams a2c_update(const PolicyParams& params, const std::vector<Trajectory>& batch,
                        const TrainConfig& config);

struct TrainResult {
  PolicyParams params;
  LearningCurve curve;
};

// Full A2C loop against a fixed opponent. `opponent` is the global-state
// policy of the seat opposite config.learner_slot.
TrainResult train_vs_fixed(const MatrixGame& game, const MemoryOnePolicy& opponent,
                           const TrainConfig& config);

struct SelfPlayResult {
  PolicyParams params1;
  PolicyParams params2;
  LearningCurve curve1;
  LearningCurve curve2;
};

// Two learners updated simultaneously from shared rollouts (or one shared
// parameter set when config.share_params is set).
SelfPlayResult train_self_play(const MatrixGame& game, const TrainConfig& config);

struct FixedOpponentStage {
  MemoryOnePolicy opponent;  // global-state policy of the non-learner seat
  std::string name;          // for reporting only
};
struct SelfPlayStage {
  bool clone_learner = true;  // seat 1's params copied into seat 2 on entry
};
struct CurriculumStage {
  std::variant<FixedOpponentStage, SelfPlayStage> kind;
  TrainConfig config;
};

struct CurriculumResult {
  PolicyParams params1;
  PolicyParams params2;
  std::vector<LearningCurve> curves;  // one per vs-fixed stage, two per self-play stage
};

// Sequential stages with parameter carry-over. A single vs-fixed stage is
// exactly train_vs_fixed.
CurriculumResult train_curriculum(const MatrixGame& game,
                                  const std::vector<CurriculumStage>& stages);

// Global states whose discounted visitation under the pair exceeds the
// threshold; used to scope "visited under learned play" checks.
std::array<bool, kNumStates> visited_states(const MemoryOnePolicy& policy1,
                                            const MemoryOnePolicy& policy2, double gamma,
                                            double threshold = 1e-3);

}  // namespace freerider
