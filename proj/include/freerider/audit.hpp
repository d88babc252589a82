#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "freerider/a2c.hpp"
#include "freerider/matrix_game.hpp"
#include "freerider/policy.hpp"

#include <json.hpp>

namespace freerider {

struct BestResponse {
  MemoryOnePolicy policy;  // deterministic, on global states, for the deviating seat
  double value;            // exact Start-state value against the opponent
  std::array<double, kNumStates> state_values;
};

// Optimal memory-one deviation for one seat against a fixed opponent, found by
// value iteration on the 5-state MDP the opponent induces, then evaluated
// exactly with the linear solver (ties broken toward Defect). `opponent` is
// the global-state policy of the seat opposite `deviator_slot`.
BestResponse best_response_exact(const MatrixGame& game, const MemoryOnePolicy& opponent,
                                 double gamma, int deviator_slot = 1);

struct PlayerAudit {
  double current_value;
  double best_response_value;
  double gap;  // best_response_value - current_value; >= 0 up to solver noise
  std::array<double, kNumStates> per_state_gap;
  MemoryOnePolicy best_response;
};

struct AuditReport {
  std::array<PlayerAudit, 2> players;
  double gamma = 0.0;
  double epsilon = 0.0;
  bool is_epsilon_nash = false;
  std::string method;  // "exact" or "retraining"

  double max_gap() const { return std::max(players[0].gap, players[1].gap); }
};

// Unilateral-deviation audit of a policy pair: exact values, exact best
// responses, and the epsilon-Nash verdict max(gap1, gap2) <= epsilon.
AuditReport exploitability(const MatrixGame& game, const MemoryOnePolicy& policy1,
                           const MemoryOnePolicy& policy2, double gamma, double epsilon);

nlohmann::json to_json(const AuditReport& report);
std::string audit_text_summary(const AuditReport& report);

// Negative improvement_threshold selects the default rule
// max(0.01 * |current_value|, 1e-3).
inline constexpr double kAutoImprovementThreshold = -1.0;

struct RetrainingAudit {
  int target_slot = 1;
  double gamma = 0.0;
  double current_value = 0.0;        // target seat's exact value in the fixed pair
  double achieved_value = 0.0;       // exact value of the retrained policy vs the fixed opponent
  double improvement = 0.0;          // achieved_value - current_value
  double threshold = 0.0;
  bool deviation_found = false;
  double exact_best_response_value = 0.0;  // upper bound the learner is chasing
  MemoryOnePolicy retrained_policy;        // global states, induced from learned parameters
  LearningCurve curve;
};

// Learning-based counterpart of exploitability(): freeze one seat's policy
// pair, retrain the other seat from scratch, and test whether the learner
// finds a profitable deviation.
RetrainingAudit audit_by_retraining(const MatrixGame& game, const MemoryOnePolicy& policy1,
                                    const MemoryOnePolicy& policy2, int target_slot,
                                    const TrainConfig& config,
                                    double improvement_threshold = kAutoImprovementThreshold);

nlohmann::json to_json(const RetrainingAudit& audit);

struct InductionCertificate {
  int steps = 0;
  bool all_defect = false;
  // margins[t][p]: how much player p+1 loses at step t by deviating from
  // Defect, minimized over the opponent's action. Positive at every step
  // certifies the all-defect profile as the unique subgame-perfect outcome.
  std::vector<std::array<double, 2>> margins;

  double min_margin() const;
};

// Backward induction over a fixed n-round repetition of the stage game.
// Runs in O(n); throws if the game fails validate_pd or n < 1.
InductionCertificate backward_induction_fixed_horizon(const MatrixGame& game, int n);

nlohmann::json to_json(const InductionCertificate& certificate);

struct GammaSweepRow {
  double gamma;
  double gap_p1;
  double gap_p2;
  bool is_nash;
};

// Exact audit of the same pair across discount factors.
std::vector<GammaSweepRow> gamma_sweep(const MatrixGame& game, const MemoryOnePolicy& policy1,
                                       const MemoryOnePolicy& policy2,
                                       const std::vector<double>& gammas, double epsilon);

// CSV schema: gamma,gap_p1,gap_p2,is_nash
std::string gamma_sweep_csv(const std::vector<GammaSweepRow>& rows);

nlohmann::json to_json(const MemoryOnePolicy& policy);
MemoryOnePolicy memory_one_from_json(const nlohmann::json& value);

}  // namespace freerider
