#include "freerider/matrix_game.hpp"

#include <stdexcept>

namespace freerider {

const char* to_string(GameState s) {
  switch (s) {
    case GameState::Start: return "start";
    case GameState::CC: return "cc";
    case GameState::CD: return "cd";
    case GameState::DC: return "dc";
    case GameState::DD: return "dd";
  }
  throw std::logic_error("unreachable game state");
}

GameState state_from_string(const std::string& name) {
  for (GameState s : kAllStates) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown game state: " + name);
}

char to_char(Action a) { return a == Action::Cooperate ? 'C' : 'D'; }

Action action_from_char(char c) {
  if (c == 'C') return Action::Cooperate;
  if (c == 'D') return Action::Defect;
  throw std::invalid_argument(std::string("unknown action: ") + c);
}

MatrixGame MatrixGame::symmetric(double r, double t, double p, double s) {
  MatrixGame g{};
  g.payoff[0][0][0] = r;
  g.payoff[0][0][1] = s;
  g.payoff[0][1][0] = t;
  g.payoff[0][1][1] = p;
  // player 2 mirrors player 1
  g.payoff[1][0][0] = r;
  g.payoff[1][0][1] = t;
  g.payoff[1][1][0] = s;
  g.payoff[1][1][1] = p;
  return g;
}

PdValidity validate_pd(const MatrixGame& game) {
  PdValidity v{};
  v.ordering_ok = true;
  v.efficiency_ok = true;
  for (int player = 0; player < 2; ++player) {
    const double r = game.r(player), t = game.t(player), p = game.p(player), s = game.s(player);
    v.ordering_ok = v.ordering_ok && (t > r && r > p && p > s);
    v.efficiency_ok = v.efficiency_ok && (2.0 * r > t + s);
  }
  v.symmetric_ok = true;
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      v.symmetric_ok = v.symmetric_ok && (game.payoff[1][a1][a2] == game.payoff[0][a2][a1]);
    }
  }
  return v;
}

StepResult step(const MatrixGame& game, GameState /*state*/, Action a1, Action a2) {
  return StepResult{joint_state(a1, a2), game.reward(0, a1, a2), game.reward(1, a1, a2)};
}

}  // namespace freerider
