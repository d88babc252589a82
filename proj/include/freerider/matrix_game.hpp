#pragma once

#include <array>
#include <string>

namespace freerider {

enum class Action : int { Cooperate = 0, Defect = 1 };

// Joint-action state of the iterated game, seen from a global view:
// CD means "player 1 cooperated, player 2 defected". Start only occurs at
// time step 0; afterwards the state is the previous joint action.
enum class GameState : int { Start = 0, CC = 1, CD = 2, DC = 3, DD = 4 };

inline constexpr int kNumStates = 5;
inline constexpr std::array<GameState, kNumStates> kAllStates = {
    GameState::Start, GameState::CC, GameState::CD, GameState::DC, GameState::DD};

inline int index(GameState s) { return static_cast<int>(s); }

const char* to_string(GameState s);
GameState state_from_string(const std::string& name);
char to_char(Action a);
Action action_from_char(char c);

inline GameState joint_state(Action a1, Action a2) {
  const int i = static_cast<int>(a1) * 2 + static_cast<int>(a2);
  return static_cast<GameState>(i + 1);
}

// Same history seen from the other seat: CD <-> DC, everything else fixed.
inline GameState mirrored(GameState s) {
  if (s == GameState::CD) return GameState::DC;
  if (s == GameState::DC) return GameState::CD;
  return s;
}

// 2-player, 2-action payoff table. Canonical prisoner's-dilemma labels for
// player 1: R = payoff(C,C), T = payoff(D,C), P = payoff(D,D), S = payoff(C,D).
struct MatrixGame {
  // payoff[player][a1][a2]
  double payoff[2][2][2];

  static MatrixGame symmetric(double r, double t, double p, double s);

  // The 4/5/1/0 dilemma used as the default game everywhere.
  static MatrixGame default_pd() { return symmetric(4.0, 5.0, 1.0, 0.0); }

  double reward(int player, Action a1, Action a2) const {
    return payoff[player][static_cast<int>(a1)][static_cast<int>(a2)];
  }

  double r(int player) const { return player == 0 ? payoff[0][0][0] : payoff[1][0][0]; }
  double t(int player) const { return player == 0 ? payoff[0][1][0] : payoff[1][0][1]; }
  double p(int player) const { return player == 0 ? payoff[0][1][1] : payoff[1][1][1]; }
  double s(int player) const { return player == 0 ? payoff[0][0][1] : payoff[1][1][0]; }
};

// Report-only validity check; never throws.
struct PdValidity {
  bool ordering_ok;    // T > R > P > S for both players
  bool efficiency_ok;  // 2R > T + S for both players
  bool symmetric_ok;   // payoff[1][a1][a2] == payoff[0][a2][a1]
  bool valid() const { return ordering_ok && efficiency_ok && symmetric_ok; }
};

PdValidity validate_pd(const MatrixGame& game);

struct StepResult {
  GameState next_state;
  double reward1;
  double reward2;
};

// Pure function: the next state encodes the joint action, rewards come from
// the payoff table. The current state does not influence either.
StepResult step(const MatrixGame& game, GameState state, Action a1, Action a2);

}  // namespace freerider
