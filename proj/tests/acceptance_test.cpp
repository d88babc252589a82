#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "freerider/a2c.hpp"
#include "freerider/audit.hpp"
#include "freerider/commons.hpp"
#include "freerider/exact_values.hpp"
#include "freerider/experiment.hpp"
#include "freerider/horizon.hpp"
#include "freerider/io.hpp"
#include "freerider/trajectory.hpp"

using namespace freerider;

namespace {

namespace fs = std::filesystem;

int criteria_failed = 0;

void report(int number, bool passed, const std::string& description, const std::string& detail) {
    if (!passed) ++criteria_failed;
    std::printf("[%s] criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL", number,
                description.c_str(), detail.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

fs::path scratch_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "frlab_acceptance" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

// Criterion 1: training against tit-for-tat with the default configuration
// ends cooperating on every state the learned pair actually visits.
void criterion_1() {
    const MatrixGame game = MatrixGame::default_pd();
    const MemoryOnePolicy tft2 = fixed_strategy(StrategyKind::TitForTat, 2);
    const auto start = std::chrono::steady_clock::now();
    int converged = 0;
    for (const std::uint64_t seed : kSeeds) {
        TrainConfig config;
        config.seed = seed;
        const TrainResult result = train_vs_fixed(game, tft2, config);
        const MemoryOnePolicy learned = induced_policy(result.params, 1);
        const auto visited = visited_states(learned, tft2, config.gamma);
        bool cooperates = true;
        for (int s = 0; s < kNumStates; ++s) {
            if (visited[s] && !(learned.p_defect[s] < 0.1)) cooperates = false;
        }
        if (cooperates) ++converged;
    }
    const double elapsed = seconds_since(start);
    report(1, converged >= 4 && elapsed < 120.0,
           "training vs tit-for-tat ends with p_defect < 0.1 on visited states",
           std::to_string(converged) + "/5 seeds, " + format_double(elapsed) + " s");
}

// Criterion 2: independent self-play under the same configuration collapses
// to mutual defection on the visited states.
void criterion_2() {
    const MatrixGame game = MatrixGame::default_pd();
    const auto start = std::chrono::steady_clock::now();
    int converged = 0;
    for (const std::uint64_t seed : kSeeds) {
        TrainConfig config;
        config.seed = seed;
        const SelfPlayResult result = train_self_play(game, config);
        const MemoryOnePolicy engine1 = induced_policy(result.params1, 1);
        const MemoryOnePolicy engine2 = induced_policy(result.params2, 2);
        const auto visited = visited_states(engine1, engine2, config.gamma);
        bool defects = true;
        for (int s = 0; s < kNumStates; ++s) {
            if (visited[s] &&
                (!(engine1.p_defect[s] > 0.9) || !(engine2.p_defect[s] > 0.9))) {
                defects = false;
            }
        }
        if (defects) ++converged;
    }
    const double elapsed = seconds_since(start);
    report(2, converged >= 4 && elapsed < 120.0,
           "self-play ends with p_defect > 0.9 for both players on visited states",
           std::to_string(converged) + "/5 seeds, " + format_double(elapsed) + " s");
}

// Criterion 3: the exact audit table - mutual defection and mutual
// tit-for-tat are equilibria at gamma 0.96, mutual cooperation is exploitable
// by exactly 25 with a deviation worth exactly 125, all inside one second.
void criterion_3() {
    const MatrixGame game = MatrixGame::default_pd();
    const auto start = std::chrono::steady_clock::now();
    const AuditReport alld = exploitability(game, fixed_strategy(StrategyKind::AllD, 1),
                                            fixed_strategy(StrategyKind::AllD, 2), 0.96, 1e-6);
    const AuditReport tft =
        exploitability(game, fixed_strategy(StrategyKind::TitForTat, 1),
                       fixed_strategy(StrategyKind::TitForTat, 2), 0.96, 1e-6);
    const AuditReport allc = exploitability(game, fixed_strategy(StrategyKind::AllC, 1),
                                            fixed_strategy(StrategyKind::AllC, 2), 0.96, 1e-6);
    const double elapsed = seconds_since(start);

    const bool alld_ok = std::fabs(alld.players[0].gap) <= 1e-8 &&
                         std::fabs(alld.players[1].gap) <= 1e-8 && alld.is_epsilon_nash;
    const bool tft_ok = std::fabs(tft.players[0].gap) <= 1e-8 &&
                        std::fabs(tft.players[1].gap) <= 1e-8 && tft.is_epsilon_nash;
    const bool allc_ok = std::fabs(allc.players[0].gap - 25.0) <= 1e-6 &&
                         std::fabs(allc.players[1].gap - 25.0) <= 1e-6 && !allc.is_epsilon_nash;
    const bool exploiter_ok = std::fabs(allc.players[0].best_response_value - 125.0) <= 1e-6;
    report(3, alld_ok && tft_ok && allc_ok && exploiter_ok && elapsed < 1.0,
           "exact audit table at gamma 0.96 matches the closed-form gaps",
           "gaps " + format_double(alld.max_gap()) + "/" + format_double(tft.max_gap()) + "/" +
               format_double(allc.players[0].gap) + ", exploiter " +
               format_double(allc.players[0].best_response_value) + ", " +
               format_double(elapsed) + " s");
}

// Criterion 4: on the 0.05 grid, the tit-for-tat pair is an equilibrium
// exactly from gamma = 0.25 upward.
void criterion_4() {
    const MatrixGame game = MatrixGame::default_pd();
    const auto rows =
        gamma_sweep(game, fixed_strategy(StrategyKind::TitForTat, 1),
                    fixed_strategy(StrategyKind::TitForTat, 2), default_gamma_grid(), 1e-8);
    bool ok = rows.size() == 19;
    for (const GammaSweepRow& row : rows) {
        const bool expected_nash = row.gamma >= 0.25 - 1e-12;
        if (row.is_nash != expected_nash) ok = false;
        if (!expected_nash && !(std::max(row.gap_p1, row.gap_p2) > 1e-8)) ok = false;
    }
    report(4, ok, "tit-for-tat pair is Nash exactly when gamma >= 0.25 on the 0.05 grid",
           std::to_string(rows.size()) + " gamma values");
}

// Criterion 5: the learning-based audit agrees with the exact one - it finds
// the deviation against mutual cooperation (reaching 95% of its exact value)
// and finds none against tit-for-tat or mutual defection.
void criterion_5() {
    const MatrixGame game = MatrixGame::default_pd();
    int allc_recovered = 0, tft_stable = 0, alld_stable = 0;
    for (const std::uint64_t seed : kSeeds) {
        TrainConfig config;
        config.seed = seed;
        const RetrainingAudit vs_allc =
            audit_by_retraining(game, fixed_strategy(StrategyKind::AllC, 1),
                                fixed_strategy(StrategyKind::AllC, 2), 1, config);
        if (vs_allc.achieved_value >= 0.95 * vs_allc.exact_best_response_value) ++allc_recovered;
        const RetrainingAudit vs_tft =
            audit_by_retraining(game, fixed_strategy(StrategyKind::TitForTat, 1),
                                fixed_strategy(StrategyKind::TitForTat, 2), 1, config);
        if (!vs_tft.deviation_found) ++tft_stable;
        const RetrainingAudit vs_alld =
            audit_by_retraining(game, fixed_strategy(StrategyKind::AllD, 1),
                                fixed_strategy(StrategyKind::AllD, 2), 1, config);
        if (!vs_alld.deviation_found) ++alld_stable;
    }
    report(5, allc_recovered >= 4 && tft_stable >= 4 && alld_stable >= 4,
           "retraining audit recovers the exact verdicts",
           "deviation vs all-cooperate " + std::to_string(allc_recovered) +
               "/5, stable vs tit-for-tat " + std::to_string(tft_stable) +
               "/5, stable vs all-defect " + std::to_string(alld_stable) + "/5");
}

// Criterion 6: fixed-horizon backward induction certifies all-defect with
// positive margins, and a 1000-round horizon is effectively instant.
void criterion_6() {
    const MatrixGame game = MatrixGame::default_pd();
    bool ok = true;
    for (const int n : {1, 10, 1000}) {
        const InductionCertificate cert = backward_induction_fixed_horizon(game, n);
        if (!(cert.steps == n && cert.all_defect && cert.min_margin() > 0.0)) ok = false;
    }
    const auto start = std::chrono::steady_clock::now();
    const InductionCertificate timed = backward_induction_fixed_horizon(game, 1000);
    const double elapsed = seconds_since(start);
    report(6, ok && timed.all_defect && elapsed < 0.1,
           "backward induction gives all-defect with positive margins for n in {1, 10, 1000}",
           "min margin " + format_double(timed.min_margin()) + ", n=1000 in " +
               format_double(elapsed) + " s");
}

// Criterion 7: the capped geometric horizon has the advertised moments.
void criterion_7() {
    const HorizonModel model = GeometricHorizon{0.05, 10000};
    Rng rng(20240817);
    const int n = 100000;
    double total = 0.0;
    int lo = 10000, hi = 1;
    for (int i = 0; i < n; ++i) {
        const int draw = sample_horizon(model, rng);
        total += draw;
        lo = std::min(lo, draw);
        hi = std::max(hi, draw);
    }
    const double mean = total / n;
    report(7, std::fabs(mean - 20.0) <= 0.5 && lo >= 1 && hi <= 10000,
           "geometric horizon sampling has mean 20 +- 0.5 and respects the cap",
           "mean " + format_double(mean) + ", range [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "]");
}

// Criterion 8: Monte Carlo return estimates agree with the linear-solve
// values for every catalog pairing at both discount levels. Episodes stop
// with probability 1 - gamma per step, which makes the plain (undiscounted)
// episode sum an unbiased estimate of the discounted value.
void criterion_8() {
    const MatrixGame game = MatrixGame::default_pd();
    const int episodes = 4000;
    int combos_checked = 0;
    bool ok = true;
    std::string worst;
    double worst_ratio = 0.0;
    for (const double gamma : {0.2, 0.96}) {
        const GeometricHorizon horizon{1.0 - gamma,
                                       static_cast<int>(std::ceil(200.0 / (1.0 - gamma)))};
        for (const StrategyKind kind1 : kStrategyCatalog) {
            for (const StrategyKind kind2 : kStrategyCatalog) {
                const MemoryOnePolicy pol1 = fixed_strategy(kind1, 1);
                const MemoryOnePolicy pol2 = fixed_strategy(kind2, 2);
                const ValuePair exact = exact_discounted_values(game, pol1, pol2, gamma);
                const std::uint64_t base = derive_seed(
                    20240817, 100 * static_cast<std::uint64_t>(gamma * 100) +
                                  10 * static_cast<std::uint64_t>(kind1) +
                                  static_cast<std::uint64_t>(kind2));
                double sum1 = 0.0, sum2 = 0.0, sq1 = 0.0, sq2 = 0.0;
                for (int e = 0; e < episodes; ++e) {
                    const Trajectory traj =
                        rollout(game, pol1, pol2, horizon, derive_seed(base, e));
                    const double r1 = episode_return(traj, 0, 1.0);
                    const double r2 = episode_return(traj, 1, 1.0);
                    sum1 += r1;
                    sum2 += r2;
                    sq1 += r1 * r1;
                    sq2 += r2 * r2;
                }
                const double mean1 = sum1 / episodes;
                const double mean2 = sum2 / episodes;
                const double se1 =
                    std::sqrt(std::max(0.0, sq1 / episodes - mean1 * mean1) / episodes);
                const double se2 =
                    std::sqrt(std::max(0.0, sq2 / episodes - mean2 * mean2) / episodes);
                const double err1 = std::fabs(mean1 - exact.v1);
                const double err2 = std::fabs(mean2 - exact.v2);
                ++combos_checked;
                const double ratio =
                    std::max(err1 / std::max(3.0 * se1, 1e-9), err2 / std::max(3.0 * se2, 1e-9));
                if (ratio > worst_ratio) {
                    worst_ratio = ratio;
                    worst = std::string(to_string(kind1)) + " vs " + to_string(kind2) +
                            " at gamma " + format_double(gamma);
                }
                if (err1 > 3.0 * se1 + 1e-9 || err2 > 3.0 * se2 + 1e-9) ok = false;
            }
        }
    }
    report(8, ok && combos_checked == 50,
           "Monte Carlo returns match the exact values within 3 standard errors",
           std::to_string(combos_checked) + " pair/gamma combos, worst " + worst + " at " +
               format_double(worst_ratio) + "x the bound");
}

// Criterion 9: the actor gradient is the true gradient of its surrogate.
void criterion_9() {
    Rng rng(777);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        PolicyParams params = PolicyParams::gaussian(1.5, rng);
        std::vector<AdvantageSample> samples;
        const int count = 1 + rng.uniform_int(10);
        for (int i = 0; i < count; ++i) {
            samples.push_back({kAllStates[rng.uniform_int(5)],
                               rng.bernoulli(0.5) ? Action::Defect : Action::Cooperate,
                               rng.normal() * 5.0});
        }
        const double ent = draw % 2 == 0 ? 0.0 : 0.01 + rng.uniform01() * 0.1;
        const int episodes = 1 + draw % 4;
        const auto grad = actor_gradient(params, samples, ent, episodes);
        const double h = 1e-5;
        for (int s = 0; s < kNumStates; ++s) {
            for (int a = 0; a < 2; ++a) {
                PolicyParams up = params, down = params;
                up.logits[s][a] += h;
                down.logits[s][a] -= h;
                const double fd = (actor_surrogate(up, samples, ent, episodes) -
                                   actor_surrogate(down, samples, ent, episodes)) /
                                  (2 * h);
                const double rel =
                    std::fabs(grad[s][a] - fd) / std::max(1.0, std::fabs(fd));
                worst = std::max(worst, rel);
            }
        }
    }
    report(9, worst <= 1e-4,
           "actor gradient matches finite differences over 100 random draws",
           "worst relative error " + format_double(worst));
}

// Criterion 10: in the commons, the masked extremes order all three indices
// strictly, and a single agent that stops mitigating gains while every other
// agent loses.
void criterion_10() {
    const auto start = std::chrono::steady_clock::now();
    CommonsConfig config;
    const IndexReferences refs = compute_references(config, 1);
    const auto profile_indices = [&](MaskedPolicyKind kind) {
        const std::vector<CommonsPolicy> policies(
            static_cast<std::size_t>(config.n_agents),
            masked_policy(kind, config.action_levels));
        return compute_indices(run_policy_profile(config, policies, 1), refs);
    };
    const IndexReport saver = profile_indices(MaskedPolicyKind::NoConsumption);
    const IndexReport consumer = profile_indices(MaskedPolicyKind::FullConsumption);
    const bool directions = saver.economic > consumer.economic &&
                            saver.climate > consumer.climate &&
                            saver.utility < consumer.utility;

    const int top = config.action_levels - 1;
    const auto fixed_levels = [](int savings, int mitigation) {
        return CommonsPolicy([savings, mitigation](const CommonsObservation&, Rng&) {
            return AllocationAction{savings, mitigation};
        });
    };
    std::vector<CommonsPolicy> baseline(static_cast<std::size_t>(config.n_agents),
                                        fixed_levels(4, top));
    std::vector<CommonsPolicy> deviated = baseline;
    deviated[0] = fixed_levels(4, 0);
    const EpisodeRecord base_ep = run_policy_profile(config, baseline, 0);
    const EpisodeRecord dev_ep = run_policy_profile(config, deviated, 0);
    const bool deviator_gains = dev_ep.agent_discounted_utility(0, config.gamma) >
                                base_ep.agent_discounted_utility(0, config.gamma);
    bool others_lose = true;
    for (int agent = 1; agent < config.n_agents; ++agent) {
        if (!(dev_ep.agent_discounted_utility(agent, config.gamma) <
              base_ep.agent_discounted_utility(agent, config.gamma))) {
            others_lose = false;
        }
    }
    const double elapsed = seconds_since(start);
    report(10, directions && deviator_gains && others_lose && elapsed < 10.0,
           "commons indices order the masked extremes and free riding pays",
           "indices " + std::string(directions ? "ordered" : "unordered") + ", deviator " +
               (deviator_gains ? "gains" : "does not gain") + ", others " +
               (others_lose ? "lose" : "do not all lose") + ", " + format_double(elapsed) + " s");
}

// Criterion 11: rerunning every shipped replicate suite reproduces identical
// artifact bytes (manifests carry wall-clock timings and are excluded).
void criterion_11() {
    bool ok = true;
    std::string detail;
    for (const std::string& suite : replicate_suite_names()) {
        const fs::path dir1 = scratch_dir(suite + "_run1");
        const fs::path dir2 = scratch_dir(suite + "_run2");
        (void)run_replicate_suite(suite, dir1, 2);
        (void)run_replicate_suite(suite, dir2, 2);

        std::set<fs::path> files1, files2;
        for (const auto& entry : fs::recursive_directory_iterator(dir1)) {
            if (entry.is_regular_file()) files1.insert(fs::relative(entry.path(), dir1));
        }
        for (const auto& entry : fs::recursive_directory_iterator(dir2)) {
            if (entry.is_regular_file()) files2.insert(fs::relative(entry.path(), dir2));
        }
        if (files1 != files2 || files1.empty()) {
            ok = false;
            detail += suite + ": file sets differ; ";
            continue;
        }
        int csv_count = 0;
        for (const fs::path& rel : files1) {
            if (rel.filename() == "manifest.json") continue;
            if (rel.extension() == ".csv") ++csv_count;
            if (read_file(dir1 / rel) != read_file(dir2 / rel)) {
                ok = false;
                detail += suite + ": " + rel.string() + " differs; ";
            }
        }
        detail += suite + " " + std::to_string(files1.size()) + " files (" +
                  std::to_string(csv_count) + " csv), ";
    }
    report(11, ok, "rerunning every replicate suite reproduces identical artifact bytes", detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (criteria_failed == 0) {
        std::printf("acceptance_test passed!\n");
        return 0;
    }
    std::printf("acceptance_test: %d criterion(s) failed\n", criteria_failed);
    return 1;
}
