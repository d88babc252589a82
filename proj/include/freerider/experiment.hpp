#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "freerider/a2c.hpp"
#include "freerider/audit.hpp"
#include "freerider/coalition.hpp"
#include "freerider/commons.hpp"
#include "freerider/matrix_game.hpp"
#include "freerider/policy.hpp"

#include <json.hpp>

namespace freerider {

// Raised for malformed experiment specs: unknown keys, missing keys, values
// out of range. The message names the offending key and its context.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  TrainVsFixed,
  SelfPlay,
  Curriculum,
  AuditExact,
  AuditRetrain,
  GammaSweep,
  BackwardInduction,
  CommonsTrain,
  CommonsProfile,
  Coalition,
};

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

struct CurriculumStageSpec {
  bool self_play = false;
  bool clone_learner = true;                         // self-play stages only
  StrategyKind opponent = StrategyKind::TitForTat;   // vs-fixed stages only
  int total_updates = 0;
};

// Parsed form of an experiment spec file. Which fields matter depends on the
// kind; parse_experiment_spec fills the rest with defaults.
struct ExperimentSpec {
  std::string name;
  ExperimentKind kind = ExperimentKind::TrainVsFixed;
  std::vector<std::uint64_t> seeds = {1};
  MatrixGame game = MatrixGame::default_pd();
  TrainConfig train;
  CommonsConfig commons;
  StrategyKind opponent = StrategyKind::TitForTat;
  StrategyKind p1 = StrategyKind::AllD;
  StrategyKind p2 = StrategyKind::AllD;
  double gamma = 0.96;
  double epsilon = 1e-6;
  int target_slot = 1;
  double improvement_threshold = kAutoImprovementThreshold;
  std::vector<double> gammas;  // empty selects the default 0.05-step grid
  int steps = 1;
  std::vector<CurriculumStageSpec> stages;
  MaskedPolicyKind profile = MaskedPolicyKind::FullConsumption;
  MaskedPolicyKind base_profile = MaskedPolicyKind::FullConsumption;
  CoalitionSizeSpec coalition_sizes;
  int num_samples = 3;
  int eval_episodes = 64;
};

// Strict parse: every key must be known for the given kind, required keys
// must be present, and all embedded configs must validate. Throws SpecError.
ExperimentSpec parse_experiment_spec(const nlohmann::json& spec);

// 16-hex-digit FNV-1a of the canonical (sorted-key) spec serialization;
// stable under key reordering in the input file.
std::string spec_hash(const nlohmann::json& spec);

// The default audit grid: gamma = k/20 for k = 1..19.
std::vector<double> default_gamma_grid();

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<std::string> artifacts;  // paths relative to the run directory
};

struct RunManifest {
  std::string name;
  std::string kind;
  std::string hash;
  std::string status;  // "ok" or "failed"
  double duration_seconds = 0.0;
  std::vector<SeedOutcome> seeds;
  std::vector<std::string> shared_artifacts;

  bool all_ok() const;
};

nlohmann::json to_json(const RunManifest& manifest);

// Runs one experiment spec: validates, fans seeds out over `workers` threads
// (0 picks a sensible default), writes artifacts plus spec.json and
// manifest.json under out_dir, and returns the manifest. Seed failures are
// recorded in the manifest, not thrown; spec problems throw SpecError before
// anything is written.
RunManifest run_experiment(const nlohmann::json& spec, const std::filesystem::path& out_dir,
                           int workers = 0);

struct SuiteCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string name;
  std::vector<SuiteCheck> checks;

  bool all_passed() const;
};

// Canned experiment bundles with pinned seeds and pass/fail checks read back
// from the artifacts they produce.
std::vector<std::string> replicate_suite_names();
SuiteResult run_replicate_suite(const std::string& name, const std::filesystem::path& out_dir,
                                int workers = 0);

}  // namespace freerider
