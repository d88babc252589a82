#include "freerider/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "freerider/exact_values.hpp"
#include "freerider/io.hpp"

namespace freerider {
namespace {

constexpr double kValueIterationTol = 1e-12;
constexpr int kValueIterationMaxIters = 2000000;

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("discount factor must lie in [0, 1), got " +
                                std::to_string(gamma));
  }
}

struct DeviatorMdp {
  // q-model of the 5-state decision problem one seat faces when the other
  // seat's memory-one policy is frozen.
  double reward[kNumStates][2];
  double trans[kNumStates][2][kNumStates];
};

DeviatorMdp build_mdp(const MatrixGame& game, const MemoryOnePolicy& opponent, int deviator_slot) {
  DeviatorMdp mdp{};
  for (const GameState state : kAllStates) {
    const int s = index(state);
    const double q_defect = opponent[state];
    for (int my = 0; my < 2; ++my) {
      for (int opp = 0; opp < 2; ++opp) {
        const double prob = opp == 1 ? q_defect : 1.0 - q_defect;
        if (prob == 0.0) continue;
        const Action mine = static_cast<Action>(my);
        const Action theirs = static_cast<Action>(opp);
        const Action a1 = deviator_slot == 1 ? mine : theirs;
        const Action a2 = deviator_slot == 1 ? theirs : mine;
        mdp.reward[s][my] += prob * game.reward(deviator_slot - 1, a1, a2);
        mdp.trans[s][my][index(joint_state(a1, a2))] += prob;
      }
    }
  }
  return mdp;
}

}  // namespace

BestResponse best_response_exact(const MatrixGame& game, const MemoryOnePolicy& opponent,
                                 double gamma, int deviator_slot) {
  check_gamma(gamma);
  if (deviator_slot != 1 && deviator_slot != 2) {
    throw std::invalid_argument("player slot must be 1 or 2, got " +
                                std::to_string(deviator_slot));
  }
  const DeviatorMdp mdp = build_mdp(game, opponent, deviator_slot);

  std::array<double, kNumStates> v{};
  for (int iter = 0; iter < kValueIterationMaxIters; ++iter) {
    std::array<double, kNumStates> next{};
    double diff = 0.0;
    for (int s = 0; s < kNumStates; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < 2; ++a) {
        double q = mdp.reward[s][a];
        for (int t = 0; t < kNumStates; ++t) {
          q += gamma * mdp.trans[s][a][t] * v[t];
        }
        best = std::max(best, q);
      }
      next[s] = best;
      diff = std::max(diff, std::abs(best - v[s]));
    }
    v = next;
    if (diff <= kValueIterationTol * std::max(1.0, std::abs(v[0]))) break;
  }

  // Greedy policy from the converged values, ties broken toward Defect, then
  // an exact evaluation so the reported value carries no iteration error.
  BestResponse result;
  for (int s = 0; s < kNumStates; ++s) {
    double q[2];
    for (int a = 0; a < 2; ++a) {
      q[a] = mdp.reward[s][a];
      for (int t = 0; t < kNumStates; ++t) {
        q[a] += gamma * mdp.trans[s][a][t] * v[t];
      }
    }
    result.policy.p_defect[s] = q[1] >= q[0] ? 1.0 : 0.0;
  }

  const MemoryOnePolicy& pol1 = deviator_slot == 1 ? result.policy : opponent;
  const MemoryOnePolicy& pol2 = deviator_slot == 1 ? opponent : result.policy;
  const auto values = exact_state_values(game, pol1, pol2, gamma);
  result.state_values = deviator_slot == 1 ? values.player1 : values.player2;
  result.value = result.state_values[index(GameState::Start)];
  return result;
}

AuditReport exploitability(const MatrixGame& game, const MemoryOnePolicy& policy1,
                           const MemoryOnePolicy& policy2, double gamma, double epsilon) {
  check_gamma(gamma);
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("epsilon must be non-negative");
  }
  const auto values = exact_state_values(game, policy1, policy2, gamma);
  AuditReport report;
  report.gamma = gamma;
  report.epsilon = epsilon;
  report.method = "exact";
  for (int player = 0; player < 2; ++player) {
    const MemoryOnePolicy& opponent = player == 0 ? policy2 : policy1;
    const auto& current = player == 0 ? values.player1 : values.player2;
    const BestResponse br = best_response_exact(game, opponent, gamma, player + 1);
    PlayerAudit& audit = report.players[player];
    audit.current_value = current[index(GameState::Start)];
    audit.best_response_value = br.value;
    audit.gap = br.value - audit.current_value;
    for (int s = 0; s < kNumStates; ++s) {
      audit.per_state_gap[s] = br.state_values[s] - current[s];
    }
    audit.best_response = br.policy;
  }
  report.is_epsilon_nash = report.max_gap() <= epsilon;
  return report;
}

nlohmann::json to_json(const MemoryOnePolicy& policy) {
  nlohmann::json value;
  for (const GameState state : kAllStates) {
    value[to_string(state)] = policy[state];
  }
  return value;
}

MemoryOnePolicy memory_one_from_json(const nlohmann::json& value) {
  MemoryOnePolicy policy{};
  for (const GameState state : kAllStates) {
    const std::string key = to_string(state);
    if (!value.contains(key)) {
      throw std::invalid_argument("policy json is missing state '" + key + "'");
    }
    const double p = value.at(key).get<double>();
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("p_defect for state '" + key + "' must lie in [0, 1]");
    }
    policy.p_defect[index(state)] = p;
  }
  return policy;
}

nlohmann::json to_json(const AuditReport& report) {
  nlohmann::json out;
  out["method"] = report.method;
  out["gamma"] = report.gamma;
  out["epsilon"] = report.epsilon;
  out["is_epsilon_nash"] = report.is_epsilon_nash;
  out["max_gap"] = report.max_gap();
  for (int player = 0; player < 2; ++player) {
    const PlayerAudit& audit = report.players[player];
    nlohmann::json entry;
    entry["current_value"] = audit.current_value;
    entry["best_response_value"] = audit.best_response_value;
    entry["gap"] = audit.gap;
    entry["best_response"] = to_json(audit.best_response);
    nlohmann::json per_state;
    for (const GameState state : kAllStates) {
      per_state[to_string(state)] = audit.per_state_gap[index(state)];
    }
    entry["per_state_gap"] = per_state;
    out[player == 0 ? "player1" : "player2"] = entry;
  }
  return out;
}

std::string audit_text_summary(const AuditReport& report) {
  std::ostringstream out;
  out << "audit (" << report.method << ", gamma=" << format_double(report.gamma) << ")\n";
  for (int player = 0; player < 2; ++player) {
    const PlayerAudit& audit = report.players[player];
    out << "  player " << player + 1 << ": value " << format_double(audit.current_value)
        << ", best response " << format_double(audit.best_response_value) << ", gap "
        << format_double(audit.gap) << '\n';
  }
  out << "  " << (report.is_epsilon_nash ? "epsilon-Nash" : "not epsilon-Nash")
      << " at epsilon=" << format_double(report.epsilon) << '\n';
  return out.str();
}

RetrainingAudit audit_by_retraining(const MatrixGame& game, const MemoryOnePolicy& policy1,
                                    const MemoryOnePolicy& policy2, int target_slot,
                                    const TrainConfig& config, double improvement_threshold) {
  if (target_slot != 1 && target_slot != 2) {
    throw std::invalid_argument("player slot must be 1 or 2, got " + std::to_string(target_slot));
  }
  TrainConfig train = config;
  train.learner_slot = target_slot;
  train.validate();

  const auto baseline = exact_state_values(game, policy1, policy2, train.gamma);
  const auto& current =
      target_slot == 1 ? baseline.player1 : baseline.player2;

  RetrainingAudit audit;
  audit.target_slot = target_slot;
  audit.gamma = train.gamma;
  audit.current_value = current[index(GameState::Start)];
  audit.threshold = improvement_threshold >= 0.0
                        ? improvement_threshold
                        : std::max(0.01 * std::abs(audit.current_value), 1e-3);

  const MemoryOnePolicy& opponent = target_slot == 1 ? policy2 : policy1;
  TrainResult trained = train_vs_fixed(game, opponent, train);
  audit.retrained_policy = induced_policy(trained.params, target_slot);
  audit.curve = std::move(trained.curve);

  const MemoryOnePolicy& pol1 = target_slot == 1 ? audit.retrained_policy : policy1;
  const MemoryOnePolicy& pol2 = target_slot == 1 ? policy2 : audit.retrained_policy;
  const auto retrained = exact_state_values(game, pol1, pol2, train.gamma);
  const auto& achieved = target_slot == 1 ? retrained.player1 : retrained.player2;
  audit.achieved_value = achieved[index(GameState::Start)];
  audit.improvement = audit.achieved_value - audit.current_value;
  audit.deviation_found = audit.improvement > audit.threshold;
  audit.exact_best_response_value =
      best_response_exact(game, opponent, train.gamma, target_slot).value;
  return audit;
}

nlohmann::json to_json(const RetrainingAudit& audit) {
  nlohmann::json out;
  out["method"] = "retraining";
  out["target_slot"] = audit.target_slot;
  out["gamma"] = audit.gamma;
  out["current_value"] = audit.current_value;
  out["achieved_value"] = audit.achieved_value;
  out["improvement"] = audit.improvement;
  out["threshold"] = audit.threshold;
  out["deviation_found"] = audit.deviation_found;
  out["exact_best_response_value"] = audit.exact_best_response_value;
  out["retrained_policy"] = to_json(audit.retrained_policy);
  return out;
}

double InductionCertificate::min_margin() const {
  double result = std::numeric_limits<double>::infinity();
  for (const auto& pair : margins) {
    result = std::min(result, std::min(pair[0], pair[1]));
  }
  return margins.empty() ? 0.0 : result;
}

InductionCertificate backward_induction_fixed_horizon(const MatrixGame& game, int n) {
  if (n < 1) {
    throw std::invalid_argument("horizon must be at least 1 round, got " + std::to_string(n));
  }
  if (!validate_pd(game).valid()) {
    throw std::invalid_argument("stage game is not a valid prisoner's dilemma");
  }
  InductionCertificate certificate;
  certificate.steps = n;
  certificate.margins.resize(static_cast<std::size_t>(n));
  // Walk backwards from the last round. Play after the current round is
  // already pinned to mutual defection, and that continuation does not depend
  // on the current actions, so each round reduces to the stage game where
  // Defect dominates by t-r against a cooperator and p-s against a defector.
  for (int t = n - 1; t >= 0; --t) {
    for (int player = 0; player < 2; ++player) {
      const double vs_cooperator = game.t(player) - game.r(player);
      const double vs_defector = game.p(player) - game.s(player);
      certificate.margins[static_cast<std::size_t>(t)][static_cast<std::size_t>(player)] =
          std::min(vs_cooperator, vs_defector);
    }
  }
  certificate.all_defect = certificate.min_margin() > 0.0;
  return certificate;
}

nlohmann::json to_json(const InductionCertificate& certificate) {
  nlohmann::json out;
  out["steps"] = certificate.steps;
  out["all_defect"] = certificate.all_defect;
  out["min_margin"] = certificate.min_margin();
  // Margins are constant across rounds for a fixed stage game; store the
  // first-round pair instead of n identical rows.
  if (!certificate.margins.empty()) {
    out["stage_margin_p1"] = certificate.margins.front()[0];
    out["stage_margin_p2"] = certificate.margins.front()[1];
  }
  return out;
}

std::vector<GammaSweepRow> gamma_sweep(const MatrixGame& game, const MemoryOnePolicy& policy1,
                                       const MemoryOnePolicy& policy2,
                                       const std::vector<double>& gammas, double epsilon) {
  std::vector<GammaSweepRow> rows;
  rows.reserve(gammas.size());
  for (const double gamma : gammas) {
    const AuditReport report = exploitability(game, policy1, policy2, gamma, epsilon);
    rows.push_back(
        {gamma, report.players[0].gap, report.players[1].gap, report.is_epsilon_nash});
  }
  return rows;
}

std::string gamma_sweep_csv(const std::vector<GammaSweepRow>& rows) {
  std::ostringstream out;
  out << "gamma,gap_p1,gap_p2,is_nash\n";
  for (const GammaSweepRow& row : rows) {
    out << format_double(row.gamma) << ',' << format_double(row.gap_p1) << ','
        << format_double(row.gap_p2) << ',' << (row.is_nash ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace freerider
