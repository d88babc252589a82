#include <cmath>
#include <string>
#include <vector>

#include "freerider/audit.hpp"
#include "freerider/exact_values.hpp"
#include "freerider/io.hpp"
#include "test_support.hpp"

using namespace freerider;
using testkit::check;
using testkit::check_close;
using testkit::check_throws;

namespace {

void test_best_response() {
    const MatrixGame game = MatrixGame::default_pd();
    const MemoryOnePolicy all_c2 = fixed_strategy(StrategyKind::AllC, 2);
    const MemoryOnePolicy tft2 = fixed_strategy(StrategyKind::TitForTat, 2);

    // Against unconditional cooperation: defect forever, T/(1-g) = 125.
    const BestResponse vs_all_c = best_response_exact(game, all_c2, 0.96, 1);
    check_close(vs_all_c.value, 125.0, 1e-9, "best response value vs all-cooperate");
    for (int i = 0; i < kNumStates; ++i) {
        check(vs_all_c.policy.p_defect[i] == 1.0, "exploiter defects everywhere");
    }

    // Against tit-for-tat at gamma = 0.96: cooperation is optimal (100 vs
    // the 5 + 25 * 0.96 = 29 a one-shot defection path tops out at).
    const BestResponse vs_tft = best_response_exact(game, tft2, 0.96, 1);
    check_close(vs_tft.value, 100.0, 1e-9, "patient best response vs tit-for-tat");
    check(vs_tft.policy.p_defect[index(GameState::Start)] == 0.0, "opens cooperatively");
    check(vs_tft.policy.p_defect[index(GameState::CC)] == 0.0, "sustains cooperation");
    // Off-path recovery states: cooperating back into CC beats punishment.
    check_close(vs_tft.state_values[index(GameState::CC)], 100.0, 1e-9, "on-path state value");

    // Impatient best response vs tit-for-tat: grab T now, eat one P.
    // v(start) = 5 + 0.2 * v(DC); defecting forever gives 5 + 0.2/0.8 = 5.25.
    const BestResponse myopic = best_response_exact(game, tft2, 0.2, 1);
    check_close(myopic.value, 5.25, 1e-9, "impatient best response vs tit-for-tat");
    check(myopic.policy.p_defect[index(GameState::Start)] == 1.0, "impatient opener defects");

    // Seat 2 deviating against a seat-1 opponent is the mirror problem.
    const BestResponse seat2 =
        best_response_exact(game, fixed_strategy(StrategyKind::AllC, 1), 0.96, 2);
    check_close(seat2.value, 125.0, 1e-9, "seat 2 exploits a seat-1 cooperator");

    check_throws([&] { best_response_exact(game, all_c2, 1.0, 1); }, "gamma 1 rejected");
    check_throws([&] { best_response_exact(game, all_c2, 0.5, 0); }, "bad slot rejected");
}

void test_exploitability() {
    const MatrixGame game = MatrixGame::default_pd();
    const MemoryOnePolicy all_c1 = fixed_strategy(StrategyKind::AllC, 1);
    const MemoryOnePolicy all_c2 = fixed_strategy(StrategyKind::AllC, 2);
    const MemoryOnePolicy all_d1 = fixed_strategy(StrategyKind::AllD, 1);
    const MemoryOnePolicy all_d2 = fixed_strategy(StrategyKind::AllD, 2);
    const MemoryOnePolicy tft1 = fixed_strategy(StrategyKind::TitForTat, 1);
    const MemoryOnePolicy tft2 = fixed_strategy(StrategyKind::TitForTat, 2);

    const AuditReport dd = exploitability(game, all_d1, all_d2, 0.96, 1e-6);
    check(std::fabs(dd.players[0].gap) <= 1e-8, "mutual defection has no deviation for p1");
    check(std::fabs(dd.players[1].gap) <= 1e-8, "mutual defection has no deviation for p2");
    check(dd.is_epsilon_nash, "mutual defection is an equilibrium");
    check(dd.method == "exact", "method tag");
    check_close(dd.players[0].current_value, 25.0, 1e-9, "mutual defection value");

    const AuditReport tft = exploitability(game, tft1, tft2, 0.96, 1e-6);
    check(std::fabs(tft.max_gap()) <= 1e-8, "tit-for-tat pair has no deviation");
    check(tft.is_epsilon_nash, "tit-for-tat pair is an equilibrium");
    check_close(tft.players[0].current_value, 100.0, 1e-9, "cooperative value");

    const AuditReport cc = exploitability(game, all_c1, all_c2, 0.96, 1e-6);
    check_close(cc.players[0].gap, 25.0, 1e-9, "all-cooperate is exploitable by 25");
    check_close(cc.players[1].gap, 25.0, 1e-9, "both seats can deviate");
    check(!cc.is_epsilon_nash, "all-cooperate is not an equilibrium");
    check_close(cc.players[0].best_response_value, 125.0, 1e-9, "deviation value");
    check_close(cc.players[0].per_state_gap[index(GameState::Start)], 25.0, 1e-9,
                "per-state gap at the start state");

    const nlohmann::json j = to_json(cc);
    check(j.contains("player1") && j.contains("player2"), "audit json players");
    check(j["method"] == "exact", "audit json method");
    check_close(j["player1"]["gap"].get<double>(), 25.0, 1e-9, "audit json gap");
    check(j["is_epsilon_nash"] == false, "audit json verdict");
    check(j["player1"]["per_state_gap"].contains("start"), "audit json per-state gaps");

    const std::string text = audit_text_summary(cc);
    check(text.find("gap") != std::string::npos, "text summary mentions the gap");
}

void test_gamma_sweep() {
    const MatrixGame game = MatrixGame::default_pd();
    const MemoryOnePolicy tft1 = fixed_strategy(StrategyKind::TitForTat, 1);
    const MemoryOnePolicy tft2 = fixed_strategy(StrategyKind::TitForTat, 2);

    std::vector<double> gammas;
    for (int k = 1; k <= 19; ++k) gammas.push_back(k / 20.0);
    const auto rows = gamma_sweep(game, tft1, tft2, gammas, 1e-8);
    check(rows.size() == 19, "one row per gamma");
    for (const GammaSweepRow& row : rows) {
        // Stability threshold for tit-for-tat here: gamma >= (T-R)/(T-P) = 0.25.
        const bool want_nash = row.gamma >= 0.25 - 1e-12;
        check(row.is_nash == want_nash,
              "equilibrium verdict at gamma " + std::to_string(row.gamma));
        if (!want_nash) {
            check(row.gap_p1 > 1e-3, "clear deviation below the threshold");
        }
    }

    // At the threshold itself the deviation is exactly neutral.
    const auto at_threshold = gamma_sweep(game, tft1, tft2, {0.25}, 1e-8);
    check(std::fabs(at_threshold[0].gap_p1) <= 1e-10, "gap vanishes at the threshold");

    const std::string csv = gamma_sweep_csv(rows);
    const CsvTable table = parse_csv(csv);
    check(table.header == std::vector<std::string>({"gamma", "gap_p1", "gap_p2", "is_nash"}),
          "sweep csv schema");
    check(table.rows.size() == 19, "sweep csv rows");
    check(table.rows[0][3] == "false" && table.rows[18][3] == "true", "sweep csv verdict column");
}

void test_retraining_audit() {
    const MatrixGame game = MatrixGame::default_pd();
    TrainConfig config;
    config.total_updates = 600;
    config.seed = 11;

    const RetrainingAudit exploit = audit_by_retraining(
        game, fixed_strategy(StrategyKind::AllC, 1), fixed_strategy(StrategyKind::AllC, 2), 1,
        config);
    check(exploit.deviation_found, "learner finds the deviation against all-cooperate");
    check_close(exploit.current_value, 100.0, 1e-9, "baseline value recorded");
    check_close(exploit.exact_best_response_value, 125.0, 1e-9, "exact bound recorded");
    check(exploit.achieved_value > 0.95 * 125.0, "learner reaches 95% of the exact deviation");
    check_close(exploit.threshold, 1.0, 1e-12, "default threshold is 1% of current value");
    check(!exploit.curve.points.empty(), "curve captured");

    const RetrainingAudit stable = audit_by_retraining(
        game, fixed_strategy(StrategyKind::AllD, 1), fixed_strategy(StrategyKind::AllD, 2), 1,
        config);
    check(!stable.deviation_found, "no deviation against mutual defection");
    check_close(stable.current_value, 25.0, 1e-9, "mutual defection baseline");
    check(stable.achieved_value <= 25.0 + stable.threshold, "achieved value stays at baseline");

    const nlohmann::json j = to_json(exploit);
    check(j["deviation_found"] == true, "retraining json verdict");
    check(j.contains("retrained_policy"), "retraining json policy");
    check_close(j["achieved_value"].get<double>(), exploit.achieved_value, 0,
                "retraining json value");

    check_throws(
        [&] {
            audit_by_retraining(game, fixed_strategy(StrategyKind::AllC, 1),
                                fixed_strategy(StrategyKind::AllC, 2), 3, config);
        },
        "bad target slot rejected");
}

void test_backward_induction() {
    const MatrixGame game = MatrixGame::default_pd();
    const InductionCertificate one = backward_induction_fixed_horizon(game, 1);
    check(one.steps == 1 && one.all_defect, "one-shot dominance");
    check(one.margins.size() == 1, "one margin row");
    check_close(one.margins[0][0], 1.0, 1e-12, "min(T-R, P-S) margin p1");
    check_close(one.margins[0][1], 1.0, 1e-12, "min(T-R, P-S) margin p2");
    check_close(one.min_margin(), 1.0, 1e-12, "certificate min margin");

    const InductionCertificate ten = backward_induction_fixed_horizon(game, 10);
    check(ten.steps == 10 && ten.all_defect, "ten rounds unravel");
    check(ten.margins.size() == 10, "margin per round");
    check_close(ten.min_margin(), 1.0, 1e-12, "margins constant across rounds");

    const InductionCertificate big = backward_induction_fixed_horizon(game, 1000);
    check(big.steps == 1000 && big.all_defect && big.min_margin() > 0.0, "long horizon");

    check_throws([&] { backward_induction_fixed_horizon(game, 0); }, "zero rounds rejected");
    check_throws(
        [] { backward_induction_fixed_horizon(MatrixGame::symmetric(5.0, 4.0, 1.0, 0.0), 5); },
        "invalid dilemma rejected");

    const nlohmann::json j = to_json(big);
    check(j["steps"] == 1000 && j["all_defect"] == true, "induction json");
    check(j.contains("stage_margin_p1"), "induction json margin");
}

void test_policy_json() {
    const MemoryOnePolicy tft = fixed_strategy(StrategyKind::TitForTat, 1);
    const nlohmann::json j = to_json(tft);
    check(j.contains("start") && j.contains("dd"), "policy json keyed by state");
    const MemoryOnePolicy back = memory_one_from_json(j);
    for (int i = 0; i < kNumStates; ++i) {
        check(back.p_defect[i] == tft.p_defect[i], "policy json round trip");
    }
    check_throws([] { memory_one_from_json(nlohmann::json{{"start", 0.5}}); },
                 "incomplete policy json rejected");
}

}  // namespace

int main() {
    test_best_response();
    test_exploitability();
    test_gamma_sweep();
    test_retraining_audit();
    test_backward_induction();
    test_policy_json();
    return testkit::finish("audit_test");
}
