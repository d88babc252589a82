#pragma once

#include <array>
#include <string>

#include "freerider/matrix_game.hpp"
#include "freerider/rng.hpp"

namespace freerider {

// Memory-one policy over the global joint-action state: the probability of
// playing Defect in each of the 5 states. This is the common representation
// for the fixed-strategy catalog and for learned (softmax) policies.
//
// A policy table is always indexed by the *global* state. A strategy placed
// in seat 2 is expressed on global states by mirroring (see fixed_strategy).
struct MemoryOnePolicy {
  std::array<double, kNumStates> p_defect;

  double operator[](GameState s) const { return p_defect[index(s)]; }
  double& operator[](GameState s) { return p_defect[index(s)]; }

  bool deterministic() const;

  // The same behavior viewed from the other seat, re-expressed on global
  // states: p'[s] = p[mirrored(s)].
  MemoryOnePolicy mirrored_seat() const;
};

enum class StrategyKind { AllC, AllD, TitForTat, GrimTrigger, Pavlov };

inline constexpr std::array<StrategyKind, 5> kStrategyCatalog = {
    StrategyKind::AllC, StrategyKind::AllD, StrategyKind::TitForTat,
    StrategyKind::GrimTrigger, StrategyKind::Pavlov};

const char* to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

// Catalog strategy for the requested seat (1 or 2), expressed on global
// states. Opening moves: cooperate for everything except AllD.
// Grim trigger is the memory-one projection: defect whenever the previous
// step contained any defection. This coincides with true grim on self-play
// and vs-catalog traces; it never forgives after DD, which unbounded-memory
// grim would not reach from mutual cooperation anyway.
MemoryOnePolicy fixed_strategy(StrategyKind kind, int player_slot);

// Plain-text table used by the audit CLI and golden tests:
//   state p_defect
//   start 0
//   ...
std::string policy_table(const MemoryOnePolicy& policy);
MemoryOnePolicy policy_from_table(const std::string& text);

// Tabular softmax actor plus critic table for the A2C learner.
// logits[state][action]; values[state] holds discounted-return estimates.
struct PolicyParams {
  std::array<std::array<double, 2>, kNumStates> logits;
  std::array<double, kNumStates> values;

  static PolicyParams zeros();
  static PolicyParams gaussian(double sigma, Rng& rng);
};

// p_defect[s] = exp(logit_D) / (exp(logit_C) + exp(logit_D)), computed in a
// shift-stable form. Throws std::invalid_argument on non-finite logits.
MemoryOnePolicy to_memory_one(const PolicyParams& params);

double softmax_defect_prob(double logit_cooperate, double logit_defect);

}  // namespace freerider
