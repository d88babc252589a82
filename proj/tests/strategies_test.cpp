#include <array>
#include <cmath>
#include <string>

#include "freerider/policy.hpp"
#include "freerider/rng.hpp"
#include "test_support.hpp"

using namespace freerider;
using testkit::check;
using testkit::check_close;
using testkit::check_throws;

namespace {

void expect_table(StrategyKind kind, int slot, const std::array<double, 5>& want) {
    const MemoryOnePolicy got = fixed_strategy(kind, slot);
    for (int i = 0; i < kNumStates; ++i) {
        check(got.p_defect[i] == want[i], std::string(to_string(kind)) + " slot " +
                                              std::to_string(slot) + " state " +
                                              to_string(kAllStates[i]));
    }
}

void test_catalog_tables() {
    expect_table(StrategyKind::AllC, 1, {0, 0, 0, 0, 0});
    expect_table(StrategyKind::AllD, 1, {1, 1, 1, 1, 1});
    expect_table(StrategyKind::TitForTat, 1, {0, 0, 1, 0, 1});
    expect_table(StrategyKind::GrimTrigger, 1, {0, 0, 1, 1, 1});
    expect_table(StrategyKind::Pavlov, 1, {0, 0, 1, 1, 0});

    // Seat 2 sees the mirrored history: its tit-for-tat keys on player 1's
    // previous action instead.
    expect_table(StrategyKind::TitForTat, 2, {0, 0, 0, 1, 1});
    expect_table(StrategyKind::AllD, 2, {1, 1, 1, 1, 1});
    expect_table(StrategyKind::Pavlov, 2, {0, 0, 1, 1, 0});
    expect_table(StrategyKind::GrimTrigger, 2, {0, 0, 1, 1, 1});

    check_throws([] { fixed_strategy(StrategyKind::TitForTat, 0); }, "slot 0 rejected");
    check_throws([] { fixed_strategy(StrategyKind::TitForTat, 3); }, "slot 3 rejected");

    for (StrategyKind kind : kStrategyCatalog) {
        check(strategy_from_string(to_string(kind)) == kind,
              std::string("strategy name round trip ") + to_string(kind));
        check(fixed_strategy(kind, 1).deterministic(), "catalog strategies are deterministic");
    }
    check_throws([] { strategy_from_string("mostly_nice"); }, "unknown strategy name throws");
}

void test_mirroring() {
    MemoryOnePolicy p;
    p.p_defect = {0.1, 0.2, 0.3, 0.4, 0.5};
    const MemoryOnePolicy m = p.mirrored_seat();
    check(m.p_defect[index(GameState::CD)] == 0.4, "mirror swaps CD");
    check(m.p_defect[index(GameState::DC)] == 0.3, "mirror swaps DC");
    check(m.p_defect[index(GameState::Start)] == 0.1, "mirror keeps start");
    const MemoryOnePolicy twice = m.mirrored_seat();
    for (int i = 0; i < kNumStates; ++i) {
        check(twice.p_defect[i] == p.p_defect[i], "mirroring is an involution");
    }
    check(!p.deterministic(), "fractional table is not deterministic");
}

void test_policy_table_text() {
    const MemoryOnePolicy tft = fixed_strategy(StrategyKind::TitForTat, 1);
    const std::string text = policy_table(tft);
    check(text.find("start") != std::string::npos, "table names the start state");
    const MemoryOnePolicy parsed = policy_from_table(text);
    for (int i = 0; i < kNumStates; ++i) {
        check(parsed.p_defect[i] == tft.p_defect[i], "policy table round trip");
    }

    MemoryOnePolicy soft;
    soft.p_defect = {0.25, 0.5, 0.125, 1.0, 0.0};
    const MemoryOnePolicy soft_back = policy_from_table(policy_table(soft));
    for (int i = 0; i < kNumStates; ++i) {
        check(soft_back.p_defect[i] == soft.p_defect[i], "fractional table round trip");
    }

    check_throws([] { policy_from_table("start 0.5\ncc 0.5\n"); },
                 "short table rejected");
    check_throws([] { policy_from_table("start 0.5\ncc 0.5\ncd 0.5\ndc 0.5\ndd 1.5\n"); },
                 "out-of-range probability rejected");
    check_throws([] { policy_from_table("start 0.5\ncc 0.5\nxx 0.5\ndc 0.5\ndd 0.5\n"); },
                 "unknown state rejected");
}

void test_softmax() {
    check_close(softmax_defect_prob(0.0, 0.0), 0.5, 1e-15, "equal logits");
    check_close(softmax_defect_prob(0.0, 20.0), 1.0, 1e-8, "large defect logit");
    check_close(softmax_defect_prob(20.0, 0.0), 0.0, 1e-8, "large cooperate logit");
    check_close(softmax_defect_prob(1.0, 2.0), softmax_defect_prob(1001.0, 1002.0), 1e-12,
                "shift invariance");
    check_close(softmax_defect_prob(-700.0, 700.0), 1.0, 1e-12, "extreme logits stay finite");

    PolicyParams zeros = PolicyParams::zeros();
    const MemoryOnePolicy flat = to_memory_one(zeros);
    for (int i = 0; i < kNumStates; ++i) {
        check_close(flat.p_defect[i], 0.5, 1e-15, "zero logits give coin flips");
        check(zeros.values[i] == 0.0, "zero critic init");
    }

    Rng g1 = Rng::derive(7, 0);
    Rng g2 = Rng::derive(7, 0);
    const PolicyParams a = PolicyParams::gaussian(0.3, g1);
    const PolicyParams b = PolicyParams::gaussian(0.3, g2);
    bool equal = true, any_nonzero = false;
    for (int i = 0; i < kNumStates; ++i) {
        for (int j = 0; j < 2; ++j) {
            equal = equal && a.logits[i][j] == b.logits[i][j];
            any_nonzero = any_nonzero || a.logits[i][j] != 0.0;
        }
    }
    check(equal, "gaussian init reproducible from the rng");
    check(any_nonzero, "gaussian init actually perturbs");

    PolicyParams broken = PolicyParams::zeros();
    broken.logits[2][1] = std::nan("");
    check_throws([&] { to_memory_one(broken); }, "non-finite logits rejected");
}

}  // namespace

int main() {
    test_catalog_tables();
    test_mirroring();
    test_policy_table_text();
    test_softmax();
    return testkit::finish("strategies_test");
}
