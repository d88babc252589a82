#include <cmath>
#include <string>
#include <vector>

#include "freerider/a2c.hpp"
#include "freerider/exact_values.hpp"
#include "freerider/io.hpp"
#include "test_support.hpp"

using namespace freerider;
using testkit::check;
using testkit::check_close;
using testkit::check_throws;

namespace {

void test_config_validation() {
    TrainConfig good;
    good.validate();

    TrainConfig bad = good;
    bad.gamma = 1.0;
    check_throws([&] { bad.validate(); }, "gamma 1 rejected");
    bad = good;
    bad.actor_lr = 0.0;
    check_throws([&] { bad.validate(); }, "zero actor_lr rejected");
    bad = good;
    bad.critic_lr = -0.1;
    check_throws([&] { bad.validate(); }, "negative critic_lr rejected");
    bad = good;
    bad.entropy_coef = -1e-3;
    check_throws([&] { bad.validate(); }, "negative entropy rejected");
    bad = good;
    bad.episodes_per_update = 0;
    check_throws([&] { bad.validate(); }, "empty batch rejected");
    bad = good;
    bad.total_updates = -1;
    check_throws([&] { bad.validate(); }, "negative update count rejected");
    bad = good;
    bad.total_updates = 0;
    bad.validate();  // zero updates is a legal no-op stage
    bad = good;
    bad.learner_slot = 3;
    check_throws([&] { bad.validate(); }, "slot 3 rejected");
    bad = good;
    bad.horizon = GeometricHorizon{0.0, 10};
    check_throws([&] { bad.validate(); }, "invalid horizon rejected");
    bad = good;
    bad.init = GaussianInit{-0.5};
    check_throws([&] { bad.validate(); }, "negative init sigma rejected");
}

void test_views() {
    check(own_view(GameState::CD, 1) == GameState::CD, "seat 1 sees global state");
    check(own_view(GameState::CD, 2) == GameState::DC, "seat 2 mirrors CD");
    check(own_view(GameState::DC, 2) == GameState::CD, "seat 2 mirrors DC");
    check(own_view(GameState::CC, 2) == GameState::CC, "seat 2 keeps CC");

    PolicyParams params = PolicyParams::zeros();
    params.logits[index(GameState::CD)][1] = 3.0;  // defect strongly after own C, their D
    const MemoryOnePolicy seat1 = induced_policy(params, 1);
    const MemoryOnePolicy seat2 = induced_policy(params, 2);
    check_close(seat1.p_defect[index(GameState::CD)], seat2.p_defect[index(GameState::DC)], 1e-15,
                "seat 2 expresses the same rule on mirrored states");
    check_close(seat2.p_defect[index(GameState::CD)], 0.5, 1e-15,
                "seat 2 leaves the other mirror state at its own-view value");
}

// A single hand-checkable step: one episode, one time step, zero init.
// Sampled pair (Defect, opponent Cooperate) with reward T=5 from Start.
// Return-to-go G = 5, advantage A = G - V(start) = 5. With p_defect = 0.5:
//   dz_D = actor_lr * A * (1 - 0.5) = 0.05 * 5 * 0.5 = 0.125 (entropy off)
//   dz_C = -0.125, dV(start) = critic_lr * A = 0.2 * 5 = 1.0.
void test_pinned_single_step_update() {
    TrainConfig config;
    config.actor_lr = 0.05;
    config.critic_lr = 0.2;
    config.entropy_coef = 0.0;
    config.episodes_per_update = 1;

    Trajectory traj;
    traj.steps.push_back(
        {GameState::Start, Action::Defect, Action::Cooperate, 5.0, 0.0});

    const PolicyParams before = PolicyParams::zeros();
    const PolicyParams after = a2c_update(before, {traj}, config);

    check_close(after.logits[index(GameState::Start)][1], 0.125, 1e-15, "defect logit step");
    check_close(after.logits[index(GameState::Start)][0], -0.125, 1e-15, "cooperate logit step");
    check_close(after.values[index(GameState::Start)], 1.0, 1e-15, "critic step");
    for (GameState s : {GameState::CC, GameState::CD, GameState::DC, GameState::DD}) {
        check(after.logits[index(s)][0] == 0.0 && after.logits[index(s)][1] == 0.0,
              "unvisited logits untouched");
        check(after.values[index(s)] == 0.0, "unvisited critic untouched");
    }
    check(before.logits[index(GameState::Start)][1] == 0.0, "a2c_update leaves input alone");

    // Zero step sizes leave the parameters untouched regardless of the batch.
    TrainConfig frozen = config;
    frozen.actor_lr = 0.0;
    frozen.critic_lr = 0.0;
    const PolicyParams still = a2c_update(before, {traj}, frozen);
    for (int s = 0; s < kNumStates; ++s) {
        check(still.values[s] == 0.0 && still.logits[s][0] == 0.0 && still.logits[s][1] == 0.0,
              "zero learning rates are a no-op");
    }

    // Two-step episode, gamma discounting in the returns-to-go:
    // G_0 = 5 + 0.5 * 1 = 5.5, G_1 = 1.
    TrainConfig two = config;
    two.gamma = 0.5;
    Trajectory traj2;
    traj2.steps.push_back({GameState::Start, Action::Defect, Action::Cooperate, 5.0, 0.0});
    traj2.steps.push_back({GameState::DC, Action::Defect, Action::Defect, 1.0, 1.0});
    const PolicyParams after2 = a2c_update(PolicyParams::zeros(), {traj2}, two);
    check_close(after2.values[index(GameState::Start)], 0.2 * 5.5, 1e-15, "critic sees G0");
    check_close(after2.values[index(GameState::DC)], 0.2 * 1.0, 1e-15, "critic sees G1");
    check_close(after2.logits[index(GameState::DC)][1], 0.05 * 1.0 * 0.5, 1e-15,
                "second step actor component");
}

// Slot 2 must learn from its own seat: mirrored states, reward2, action2.
void test_slot2_update_view() {
    TrainConfig config;
    config.actor_lr = 0.05;
    config.critic_lr = 0.2;
    config.entropy_coef = 0.0;
    config.episodes_per_update = 1;
    config.learner_slot = 2;

    Trajectory traj;
    // Global CD: player 1 cooperated, player 2 defected last round. Player 2's
    // own view of that history is DC. Now player 2 defects again for T=5.
    traj.steps.push_back({GameState::CD, Action::Cooperate, Action::Defect, 0.0, 5.0});

    const PolicyParams after = a2c_update(PolicyParams::zeros(), {traj}, config);
    check_close(after.logits[index(GameState::DC)][1], 0.125, 1e-15,
                "slot 2 credits its own-view state");
    check(after.logits[index(GameState::CD)][1] == 0.0, "global state label not used directly");
    check_close(after.values[index(GameState::DC)], 1.0, 1e-15, "slot 2 critic uses reward2");
}

void test_gradient_matches_surrogate() {
    Rng rng(2024);
    for (int draw = 0; draw < 20; ++draw) {
        PolicyParams params = PolicyParams::gaussian(1.0, rng);
        std::vector<AdvantageSample> samples;
        const int count = 1 + rng.uniform_int(8);
        for (int i = 0; i < count; ++i) {
            samples.push_back({kAllStates[rng.uniform_int(5)],
                               rng.bernoulli(0.5) ? Action::Defect : Action::Cooperate,
                               rng.normal() * 3.0});
        }
        const double ent = draw % 3 == 0 ? 0.0 : 0.05;
        const auto grad = actor_gradient(params, samples, ent, 2);
        const double h = 1e-6;
        for (int s = 0; s < kNumStates; ++s) {
            for (int a = 0; a < 2; ++a) {
                PolicyParams up = params, down = params;
                up.logits[s][a] += h;
                down.logits[s][a] -= h;
                const double fd = (actor_surrogate(up, samples, ent, 2) -
                                   actor_surrogate(down, samples, ent, 2)) /
                                  (2 * h);
                const double scale = std::max({1.0, std::fabs(fd), std::fabs(grad[s][a])});
                check_close(grad[s][a] / scale, fd / scale, 1e-6,
                            "gradient matches finite difference, draw " + std::to_string(draw));
            }
        }
    }
}

void test_train_determinism_and_csv() {
    const MatrixGame game = MatrixGame::default_pd();
    TrainConfig config;
    config.total_updates = 40;
    config.episodes_per_update = 4;
    config.horizon = FixedHorizon{12};
    config.seed = 5;

    const TrainResult a = train_vs_fixed(game, fixed_strategy(StrategyKind::TitForTat, 2), config);
    const TrainResult b = train_vs_fixed(game, fixed_strategy(StrategyKind::TitForTat, 2), config);
    check(a.curve.points.size() == 40, "one curve point per update");
    const std::string csv_a = learning_curve_csv({a.curve});
    const std::string csv_b = learning_curve_csv({b.curve});
    check(csv_a == csv_b, "training is bit-deterministic in the seed");

    const CsvTable table = parse_csv(csv_a);
    check(table.header.size() == 11, "curve csv column count");
    check(table.column("update") == 0 && table.column("seed") == 1 && table.column("stage") == 2 &&
              table.column("slot") == 3,
          "curve csv id columns");
    (void)table.column("p_defect_start");
    (void)table.column("p_defect_cc");
    (void)table.column("p_defect_cd");
    (void)table.column("p_defect_dc");
    (void)table.column("p_defect_dd");
    (void)table.column("mean_return");
    (void)table.column("mean_discounted_return");
    check(table.rows.size() == 40, "curve csv row count");
    check(table.rows[0][0] == "1" && table.rows[39][0] == "40", "updates are 1-based");

    TrainConfig other = config;
    other.seed = 6;
    const TrainResult c = train_vs_fixed(game, fixed_strategy(StrategyKind::TitForTat, 2), other);
    check(learning_curve_csv({c.curve}) != csv_a, "different seed changes the run");
}

void test_learns_to_exploit_all_c() {
    const MatrixGame game = MatrixGame::default_pd();
    TrainConfig config;
    config.total_updates = 500;
    config.seed = 1;
    const TrainResult result =
        train_vs_fixed(game, fixed_strategy(StrategyKind::AllC, 2), config);
    const MemoryOnePolicy engine = induced_policy(result.params, 1);
    check(engine.p_defect[index(GameState::Start)] > 0.8, "exploits the opener");
    check(engine.p_defect[index(GameState::DC)] > 0.8, "keeps defecting after exploiting");
    const ValuePair values = exact_discounted_values(
        game, engine, fixed_strategy(StrategyKind::AllC, 2), 0.96);
    check(values.v1 > 110.0, "value against the pushover approaches 125");
}

void test_entropy_dominates_when_large() {
    // With a huge entropy bonus the actor is pushed to the maximum-entropy
    // point regardless of advantages: every p_defect pinned near 0.5.
    const MatrixGame game = MatrixGame::default_pd();
    TrainConfig config;
    config.gamma = 0.2;
    config.entropy_coef = 10.0;
    config.total_updates = 300;
    config.horizon = FixedHorizon{8};
    config.seed = 3;
    const TrainResult result =
        train_vs_fixed(game, fixed_strategy(StrategyKind::AllC, 2), config);
    const MemoryOnePolicy pol = to_memory_one(result.params);
    for (int i = 0; i < kNumStates; ++i) {
        check(std::fabs(pol.p_defect[i] - 0.5) < 0.1,
              "entropy bonus keeps the policy near uniform, state " + std::to_string(i));
    }
}

void test_self_play_shared_params() {
    const MatrixGame game = MatrixGame::default_pd();
    TrainConfig config;
    config.total_updates = 30;
    config.episodes_per_update = 4;
    config.horizon = FixedHorizon{10};
    config.share_params = true;
    config.seed = 9;
    const SelfPlayResult result = train_self_play(game, config);
    for (int s = 0; s < kNumStates; ++s) {
        check(result.params1.values[s] == result.params2.values[s], "shared critic");
        for (int a = 0; a < 2; ++a) {
            check(result.params1.logits[s][a] == result.params2.logits[s][a], "shared actor");
        }
    }
    check(result.curve1.points.size() == 30 && result.curve2.points.size() == 30,
          "both curves recorded");
    check(result.curve1.slot == 1 && result.curve2.slot == 2, "curves tag their seat");
}

void test_curriculum() {
    const MatrixGame game = MatrixGame::default_pd();
    TrainConfig config;
    config.total_updates = 25;
    config.episodes_per_update = 4;
    config.horizon = FixedHorizon{10};
    config.seed = 17;

    // A single vs-fixed stage is the plain loop.
    CurriculumStage stage{FixedOpponentStage{fixed_strategy(StrategyKind::TitForTat, 2), "tft"},
                          config};
    const CurriculumResult cur = train_curriculum(game, {stage});
    const TrainResult plain =
        train_vs_fixed(game, fixed_strategy(StrategyKind::TitForTat, 2), config);
    for (int s = 0; s < kNumStates; ++s) {
        check(cur.params1.values[s] == plain.params.values[s], "curriculum critic matches");
        for (int a = 0; a < 2; ++a) {
            check(cur.params1.logits[s][a] == plain.params.logits[s][a],
                  "curriculum actor matches plain training");
        }
    }
    check(cur.curves.size() == 1, "one curve for one vs-fixed stage");

    // Zero-update self-play stage with cloning: both seats end at seat 1's
    // post-stage-1 parameters, nothing else moves.
    TrainConfig noop = config;
    noop.total_updates = 0;
    const CurriculumResult cloned =
        train_curriculum(game, {stage, CurriculumStage{SelfPlayStage{true}, noop}});
    for (int s = 0; s < kNumStates; ++s) {
        check(cloned.params1.values[s] == plain.params.values[s], "no-op stage keeps seat 1");
        check(cloned.params2.values[s] == plain.params.values[s], "clone copies seat 1 to seat 2");
        for (int a = 0; a < 2; ++a) {
            check(cloned.params2.logits[s][a] == plain.params.logits[s][a],
                  "cloned logits equal seat 1");
        }
    }
    check(cloned.curves.size() == 3, "vs-fixed curve plus two self-play curves");

    check_throws([&] { train_curriculum(game, {}); }, "empty curriculum rejected");
}

void test_visited_states() {
    const MemoryOnePolicy all_d = fixed_strategy(StrategyKind::AllD, 1);
    const auto visited = visited_states(all_d, all_d, 0.96);
    check(visited[index(GameState::Start)], "start always visited");
    check(visited[index(GameState::DD)], "mutual defection visited");
    check(!visited[index(GameState::CC)], "cooperation never reached");
    check(!visited[index(GameState::CD)] && !visited[index(GameState::DC)],
          "mixed states never reached");

    const auto tft = visited_states(fixed_strategy(StrategyKind::TitForTat, 1),
                                    fixed_strategy(StrategyKind::TitForTat, 2), 0.96);
    check(tft[index(GameState::Start)] && tft[index(GameState::CC)], "tft pair visits start and CC");
    check(!tft[index(GameState::DD)], "tft pair never defects");
}

}  // namespace

int main() {
    test_config_validation();
    test_views();
    test_pinned_single_step_update();
    test_slot2_update_view();
    test_gradient_matches_surrogate();
    test_train_determinism_and_csv();
    test_learns_to_exploit_all_c();
    test_entropy_dominates_when_large();
    test_self_play_shared_params();
    test_curriculum();
    test_visited_states();
    return testkit::finish("learner_test");
}
