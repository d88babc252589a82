#include "freerider/policy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "freerider/io.hpp"

namespace freerider {

bool MemoryOnePolicy::deterministic() const {
  for (double p : p_defect) {
    if (p != 0.0 && p != 1.0) return false;
  }
  return true;
}

MemoryOnePolicy MemoryOnePolicy::mirrored_seat() const {
  MemoryOnePolicy out{};
  for (GameState s : kAllStates) out[s] = (*this)[mirrored(s)];
  return out;
}

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::AllC: return "all_c";
    case StrategyKind::AllD: return "all_d";
    case StrategyKind::TitForTat: return "tit_for_tat";
    case StrategyKind::GrimTrigger: return "grim_trigger";
    case StrategyKind::Pavlov: return "pavlov";
  }
  throw std::logic_error("unreachable strategy kind");
}

StrategyKind strategy_from_string(const std::string& name) {
  for (StrategyKind k : kStrategyCatalog) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown strategy: " + name);
}

namespace {

// Seat-1 tables. Column order: Start, CC, CD, DC, DD.
MemoryOnePolicy seat1_table(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::AllC:
      return {{{0, 0, 0, 0, 0}}};
    case StrategyKind::AllD:
      return {{{1, 1, 1, 1, 1}}};
    case StrategyKind::TitForTat:
      // defect iff the opponent defected last step
      return {{{0, 0, 1, 0, 1}}};
    case StrategyKind::GrimTrigger:
      // defect after any defection
      return {{{0, 0, 1, 1, 1}}};
    case StrategyKind::Pavlov:
      // win-stay lose-shift: cooperate after CC and DD
      return {{{0, 0, 1, 1, 0}}};
  }
  throw std::logic_error("unreachable strategy kind");
}

}  // namespace

MemoryOnePolicy fixed_strategy(StrategyKind kind, int player_slot) {
  if (player_slot != 1 && player_slot != 2) {
    throw std::invalid_argument("player_slot must be 1 or 2");
  }
  const MemoryOnePolicy own = seat1_table(kind);
  return player_slot == 1 ? own : own.mirrored_seat();
}

std::string policy_table(const MemoryOnePolicy& policy) {
  std::ostringstream out;
  out << "state p_defect\n";
  for (GameState s : kAllStates) {
    out << to_string(s) << ' ' << format_double(policy[s]) << '\n';
  }
  return out.str();
}

MemoryOnePolicy policy_from_table(const std::string& text) {
  std::istringstream in(text);
  std::string header_a, header_b;
  if (!(in >> header_a >> header_b) || header_a != "state" || header_b != "p_defect") {
    throw std::invalid_argument("policy table must start with 'state p_defect'");
  }
  MemoryOnePolicy policy{};
  std::array<bool, kNumStates> seen{};
  std::string name;
  double p;
  while (in >> name >> p) {
    const GameState s = state_from_string(name);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("p_defect out of [0,1] for state " + name);
    }
    policy[s] = p;
    seen[index(s)] = true;
  }
  for (GameState s : kAllStates) {
    if (!seen[index(s)]) {
      throw std::invalid_argument(std::string("policy table missing state ") + to_string(s));
    }
  }
  return policy;
}

PolicyParams PolicyParams::zeros() {
  PolicyParams p{};
  for (auto& row : p.logits) row = {0.0, 0.0};
  p.values.fill(0.0);
  return p;
}

PolicyParams PolicyParams::gaussian(double sigma, Rng& rng) {
  PolicyParams p = zeros();
  for (auto& row : p.logits) {
    row[0] = rng.normal(0.0, sigma);
    row[1] = rng.normal(0.0, sigma);
  }
  return p;
}

double softmax_defect_prob(double logit_cooperate, double logit_defect) {
  // logistic in the logit difference; invariant to shifting both logits
  return 1.0 / (1.0 + std::exp(logit_cooperate - logit_defect));
}

MemoryOnePolicy to_memory_one(const PolicyParams& params) {
  MemoryOnePolicy out{};
  for (GameState s : kAllStates) {
    const auto& row = params.logits[index(s)];
    if (!std::isfinite(row[0]) || !std::isfinite(row[1])) {
      throw std::invalid_argument("non-finite logits");
    }
    out[s] = softmax_defect_prob(row[0], row[1]);
  }
  return out;
}

}  // namespace freerider
