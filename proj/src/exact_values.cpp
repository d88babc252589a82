#include "freerider/exact_values.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace freerider {

namespace {

using Matrix5 = Eigen::Matrix<double, kNumStates, kNumStates>;
using Vector5 = Eigen::Matrix<double, kNumStates, 1>;

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must be in [0, 1)");
  }
}

// Transition matrix of the joint chain and per-state expected rewards.
struct ChainModel {
  Matrix5 transition;
  Vector5 reward1;
  Vector5 reward2;
};

ChainModel build_chain(const MatrixGame& game, const MemoryOnePolicy& policy1,
                       const MemoryOnePolicy& policy2) {
  ChainModel m;
  m.transition.setZero();
  for (GameState s : kAllStates) {
    const int i = index(s);
    const double q1 = policy1[s];
    const double q2 = policy2[s];
    double r1 = 0.0, r2 = 0.0;
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        const double prob = (a1 ? q1 : 1.0 - q1) * (a2 ? q2 : 1.0 - q2);
        if (prob == 0.0) continue;
        const Action act1 = static_cast<Action>(a1);
        const Action act2 = static_cast<Action>(a2);
        m.transition(i, index(joint_state(act1, act2))) += prob;
        r1 += prob * game.reward(0, act1, act2);
        r2 += prob * game.reward(1, act1, act2);
      }
    }
    m.reward1(i) = r1;
    m.reward2(i) = r2;
  }
  return m;
}

}  // namespace

StateValues exact_state_values(const MatrixGame& game, const MemoryOnePolicy& policy1,
                               const MemoryOnePolicy& policy2, double gamma) {
  check_gamma(gamma);
  const ChainModel m = build_chain(game, policy1, policy2);

  const Matrix5 system = Matrix5::Identity() - gamma * m.transition;
  const Eigen::PartialPivLU<Matrix5> lu(system);
  const Vector5 v1 = lu.solve(m.reward1);
  const Vector5 v2 = lu.solve(m.reward2);

  const double res1 = (system * v1 - m.reward1).lpNorm<Eigen::Infinity>();
  const double res2 = (system * v2 - m.reward2).lpNorm<Eigen::Infinity>();
  if (res1 > 1e-10 || res2 > 1e-10) {
    throw std::runtime_error("value solve residual above 1e-10");
  }

  StateValues out;
  for (int i = 0; i < kNumStates; ++i) {
    out.player1[i] = v1(i);
    out.player2[i] = v2(i);
  }
  return out;
}

ValuePair exact_discounted_values(const MatrixGame& game, const MemoryOnePolicy& policy1,
                                  const MemoryOnePolicy& policy2, double gamma) {
  const auto values = exact_state_values(game, policy1, policy2, gamma);
  const int start = index(GameState::Start);
  return ValuePair{values.player1[start], values.player2[start]};
}

std::array<double, kNumStates> discounted_visitation(const MemoryOnePolicy& policy1,
                                                     const MemoryOnePolicy& policy2,
                                                     double gamma) {
  check_gamma(gamma);
  // Rewards are irrelevant here; any game produces the same chain.
  const ChainModel m = build_chain(MatrixGame::default_pd(), policy1, policy2);

  // d^T = (1-gamma) e_start^T (I - gamma P)^{-1}
  const Matrix5 system = Matrix5::Identity() - gamma * m.transition.transpose();
  Vector5 e_start = Vector5::Zero();
  e_start(index(GameState::Start)) = 1.0;
  const Vector5 d = (1.0 - gamma) * Eigen::PartialPivLU<Matrix5>(system).solve(e_start);

  std::array<double, kNumStates> out{};
  for (int i = 0; i < kNumStates; ++i) out[i] = d(i);
  return out;
}

}  // namespace freerider
