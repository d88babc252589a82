#include "freerider/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <thread>

#include "freerider/audit.hpp"
#include "freerider/exact_values.hpp"
#include "freerider/io.hpp"
#include "freerider/plot.hpp"
#include "freerider/rng.hpp"

namespace freerider {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kStageStreamBase = 8000;

[[noreturn]] void fail(const std::string& message) { throw SpecError(message); }

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(context + " must be a json object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* key) { return item.key() == key; });
    if (!known) fail("unknown key '" + item.key() + "' in " + context);
  }
}

const json& require_key(const json& obj, const std::string& context, const char* key) {
  if (!obj.contains(key)) fail("missing required key '" + std::string(key) + "' in " + context);
  return obj.at(key);
}

double get_double(const json& obj, const std::string& context, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& value = obj.at(key);
  if (!value.is_number()) fail("key '" + std::string(key) + "' in " + context + " must be a number");
  return value.get<double>();
}

int get_int(const json& obj, const std::string& context, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& value = obj.at(key);
  if (!value.is_number_integer()) {
    fail("key '" + std::string(key) + "' in " + context + " must be an integer");
  }
  return value.get<int>();
}

bool get_bool(const json& obj, const std::string& context, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& value = obj.at(key);
  if (!value.is_boolean()) fail("key '" + std::string(key) + "' in " + context + " must be a bool");
  return value.get<bool>();
}

std::string get_string(const json& obj, const std::string& context, const char* key) {
  const json& value = require_key(obj, context, key);
  if (!value.is_string()) fail("key '" + std::string(key) + "' in " + context + " must be a string");
  return value.get<std::string>();
}

HorizonModel parse_horizon(const json& obj) {
  const std::string kind = get_string(obj, "horizon", "kind");
  if (kind == "fixed") {
    check_keys(obj, "horizon", {"kind", "length"});
    return FixedHorizon{get_int(obj, "horizon", "length", 1)};
  }
  if (kind == "geometric") {
    check_keys(obj, "horizon", {"kind", "stop_prob", "cap"});
    return GeometricHorizon{get_double(obj, "horizon", "stop_prob", 0.04),
                            get_int(obj, "horizon", "cap", 500)};
  }
  fail("horizon kind must be 'fixed' or 'geometric', got '" + kind + "'");
}

ParamInit parse_init(const json& obj) {
  const std::string kind = get_string(obj, "init", "kind");
  if (kind == "zeros") {
    check_keys(obj, "init", {"kind"});
    return ZerosInit{};
  }
  if (kind == "gaussian") {
    check_keys(obj, "init", {"kind", "sigma"});
    return GaussianInit{get_double(obj, "init", "sigma", 0.1)};
  }
  fail("init kind must be 'zeros' or 'gaussian', got '" + kind + "'");
}

TrainConfig parse_train(const json& obj) {
  check_keys(obj, "train",
             {"gamma", "actor_lr", "critic_lr", "entropy_coef", "episodes_per_update",
              "total_updates", "horizon", "init", "share_params", "learner_slot"});
  TrainConfig config;
  config.gamma = get_double(obj, "train", "gamma", config.gamma);
  config.actor_lr = get_double(obj, "train", "actor_lr", config.actor_lr);
  config.critic_lr = get_double(obj, "train", "critic_lr", config.critic_lr);
  config.entropy_coef = get_double(obj, "train", "entropy_coef", config.entropy_coef);
  config.episodes_per_update =
      get_int(obj, "train", "episodes_per_update", config.episodes_per_update);
  config.total_updates = get_int(obj, "train", "total_updates", config.total_updates);
  if (obj.contains("horizon")) config.horizon = parse_horizon(obj.at("horizon"));
  if (obj.contains("init")) config.init = parse_init(obj.at("init"));
  config.share_params = get_bool(obj, "train", "share_params", config.share_params);
  config.learner_slot = get_int(obj, "train", "learner_slot", config.learner_slot);
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid train config: ") + e.what());
  }
  return config;
}

MatrixGame parse_game(const json& obj) {
  check_keys(obj, "game", {"r", "t", "p", "s"});
  const double r = get_double(obj, "game", "r", 4.0);
  const double t = get_double(obj, "game", "t", 5.0);
  const double p = get_double(obj, "game", "p", 1.0);
  const double s = get_double(obj, "game", "s", 0.0);
  return MatrixGame::symmetric(r, t, p, s);
}

CommonsConfig parse_commons(const json& obj) {
  check_keys(obj, "commons",
             {"n_agents", "productivity", "capital_elasticity", "depreciation",
              "emission_intensity", "temp_sensitivity", "damage_coef", "mitigation_cost_scale",
              "mitigation_cost_exponent", "utility_curvature", "gamma", "action_levels",
              "episode_length", "initial_capital", "initial_temperature", "obs_capital_bins",
              "obs_temperature_bins", "obs_time_phases", "obs_temperature_span"});
  CommonsConfig config;
  config.n_agents = get_int(obj, "commons", "n_agents", config.n_agents);
  config.productivity = get_double(obj, "commons", "productivity", config.productivity);
  config.capital_elasticity =
      get_double(obj, "commons", "capital_elasticity", config.capital_elasticity);
  config.depreciation = get_double(obj, "commons", "depreciation", config.depreciation);
  config.emission_intensity =
      get_double(obj, "commons", "emission_intensity", config.emission_intensity);
  config.temp_sensitivity =
      get_double(obj, "commons", "temp_sensitivity", config.temp_sensitivity);
  config.damage_coef = get_double(obj, "commons", "damage_coef", config.damage_coef);
  config.mitigation_cost_scale =
      get_double(obj, "commons", "mitigation_cost_scale", config.mitigation_cost_scale);
  config.mitigation_cost_exponent =
      get_double(obj, "commons", "mitigation_cost_exponent", config.mitigation_cost_exponent);
  config.utility_curvature =
      get_double(obj, "commons", "utility_curvature", config.utility_curvature);
  config.gamma = get_double(obj, "commons", "gamma", config.gamma);
  config.action_levels = get_int(obj, "commons", "action_levels", config.action_levels);
  config.episode_length = get_int(obj, "commons", "episode_length", config.episode_length);
  config.initial_capital = get_double(obj, "commons", "initial_capital", config.initial_capital);
  config.initial_temperature =
      get_double(obj, "commons", "initial_temperature", config.initial_temperature);
  config.obs_capital_bins = get_int(obj, "commons", "obs_capital_bins", config.obs_capital_bins);
  config.obs_temperature_bins =
      get_int(obj, "commons", "obs_temperature_bins", config.obs_temperature_bins);
  config.obs_time_phases = get_int(obj, "commons", "obs_time_phases", config.obs_time_phases);
  config.obs_temperature_span =
      get_double(obj, "commons", "obs_temperature_span", config.obs_temperature_span);
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid commons config: ") + e.what());
  }
  return config;
}

StrategyKind parse_strategy(const json& obj, const std::string& context, const char* key) {
  const std::string name = get_string(obj, context, key);
  try {
    return strategy_from_string(name);
  } catch (const std::invalid_argument& e) {
    fail(std::string(e.what()) + " (key '" + key + "' in " + context + ")");
  }
}

std::vector<CurriculumStageSpec> parse_stages(const json& array) {
  if (!array.is_array() || array.empty()) fail("'stages' must be a non-empty array");
  std::vector<CurriculumStageSpec> stages;
  for (std::size_t i = 0; i < array.size(); ++i) {
    const json& obj = array.at(i);
    const std::string context = "stages[" + std::to_string(i) + "]";
    const std::string type = get_string(obj, context, "type");
    CurriculumStageSpec stage;
    if (type == "vs_fixed") {
      check_keys(obj, context, {"type", "opponent", "total_updates"});
      stage.self_play = false;
      stage.opponent = parse_strategy(obj, context, "opponent");
    } else if (type == "self_play") {
      check_keys(obj, context, {"type", "clone_learner", "total_updates"});
      stage.self_play = true;
      stage.clone_learner = get_bool(obj, context, "clone_learner", true);
    } else {
      fail("stage type must be 'vs_fixed' or 'self_play', got '" + type + "'");
    }
    stage.total_updates = get_int(obj, context, "total_updates", -1);
    if (stage.total_updates < 0) fail("missing or negative 'total_updates' in " + context);
    stages.push_back(stage);
  }
  return stages;
}

std::vector<std::uint64_t> parse_seeds(const json& value) {
  if (!value.is_array() || value.empty()) fail("'seeds' must be a non-empty array of integers");
  std::vector<std::uint64_t> seeds;
  for (const json& item : value) {
    if (!item.is_number_integer() || item.get<std::int64_t>() < 0) {
      fail("'seeds' entries must be non-negative integers");
    }
    seeds.push_back(item.get<std::uint64_t>());
  }
  return seeds;
}

bool seed_independent(ExperimentKind kind) {
  return kind == ExperimentKind::AuditExact || kind == ExperimentKind::GammaSweep ||
         kind == ExperimentKind::BackwardInduction;
}

std::string json_text(const json& value) { return value.dump(2) + "\n"; }

json policy_artifact(const PolicyParams& params, int slot) {
  json out;
  out["slot"] = slot;
  out["own_view"] = to_json(to_memory_one(params));
  out["engine"] = to_json(induced_policy(params, slot));
  json logits;
  json values;
  for (const GameState state : kAllStates) {
    logits[to_string(state)] = {params.logits[index(state)][0], params.logits[index(state)][1]};
    values[to_string(state)] = params.values[index(state)];
  }
  out["logits"] = logits;
  out["values"] = values;
  return out;
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::vector<std::string> run_seed(const ExperimentSpec& spec, std::uint64_t seed,
                                  const fs::path& dir) {
  std::vector<std::string> artifacts;
  const auto write = [&](const std::string& name, std::string_view content) {
    atomic_write_file(dir / name, content);
    artifacts.push_back(name);
  };

  switch (spec.kind) {
    case ExperimentKind::TrainVsFixed: {
      TrainConfig config = spec.train;
      config.seed = seed;
      const MemoryOnePolicy opponent = fixed_strategy(spec.opponent, 3 - config.learner_slot);
      const TrainResult result = train_vs_fixed(spec.game, opponent, config);
      write("curve_" + seed_tag(seed) + ".csv", learning_curve_csv({result.curve}));
      json artifact = policy_artifact(result.params, config.learner_slot);
      artifact["opponent"] = to_string(spec.opponent);
      write("policy_" + seed_tag(seed) + ".json", json_text(artifact));
      break;
    }
    case ExperimentKind::SelfPlay: {
      TrainConfig config = spec.train;
      config.seed = seed;
      const SelfPlayResult result = train_self_play(spec.game, config);
      write("curve_" + seed_tag(seed) + ".csv",
            learning_curve_csv({result.curve1, result.curve2}));
      json artifact;
      artifact["slot1"] = policy_artifact(result.params1, 1);
      artifact["slot2"] = policy_artifact(result.params2, 2);
      write("policy_" + seed_tag(seed) + ".json", json_text(artifact));
      break;
    }
    case ExperimentKind::Curriculum: {
      std::vector<CurriculumStage> stages;
      for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const CurriculumStageSpec& stage_spec = spec.stages[i];
        CurriculumStage stage;
        TrainConfig config = spec.train;
        config.total_updates = stage_spec.total_updates;
        config.seed = derive_seed(seed, kStageStreamBase + i);
        if (stage_spec.self_play) {
          stage.kind = SelfPlayStage{stage_spec.clone_learner};
        } else {
          stage.kind = FixedOpponentStage{
              fixed_strategy(stage_spec.opponent, 3 - config.learner_slot),
              to_string(stage_spec.opponent)};
        }
        stage.config = config;
        stages.push_back(std::move(stage));
      }
      const CurriculumResult result = train_curriculum(spec.game, stages);
      write("curve_" + seed_tag(seed) + ".csv", learning_curve_csv(result.curves));
      json artifact;
      artifact["slot1"] = policy_artifact(result.params1, 1);
      artifact["slot2"] = policy_artifact(result.params2, 2);
      write("policy_" + seed_tag(seed) + ".json", json_text(artifact));
      break;
    }
    case ExperimentKind::AuditExact: {
      const AuditReport report =
          exploitability(spec.game, fixed_strategy(spec.p1, 1), fixed_strategy(spec.p2, 2),
                         spec.gamma, spec.epsilon);
      json artifact = to_json(report);
      artifact["p1"] = to_string(spec.p1);
      artifact["p2"] = to_string(spec.p2);
      write("audit.json", json_text(artifact));
      write("audit.txt", audit_text_summary(report));
      break;
    }
    case ExperimentKind::AuditRetrain: {
      TrainConfig config = spec.train;
      config.seed = seed;
      const RetrainingAudit audit =
          audit_by_retraining(spec.game, fixed_strategy(spec.p1, 1), fixed_strategy(spec.p2, 2),
                              spec.target_slot, config, spec.improvement_threshold);
      json artifact = to_json(audit);
      artifact["p1"] = to_string(spec.p1);
      artifact["p2"] = to_string(spec.p2);
      write("retrain_" + seed_tag(seed) + ".json", json_text(artifact));
      write("retrain_curve_" + seed_tag(seed) + ".csv", learning_curve_csv({audit.curve}));
      break;
    }
    case ExperimentKind::GammaSweep: {
      const std::vector<double> gammas = spec.gammas.empty() ? default_gamma_grid() : spec.gammas;
      const auto rows = gamma_sweep(spec.game, fixed_strategy(spec.p1, 1),
                                    fixed_strategy(spec.p2, 2), gammas, spec.epsilon);
      write("sweep.csv", gamma_sweep_csv(rows));
      break;
    }
    case ExperimentKind::BackwardInduction: {
      const InductionCertificate certificate =
          backward_induction_fixed_horizon(spec.game, spec.steps);
      write("induction.json", json_text(to_json(certificate)));
      break;
    }
    case ExperimentKind::CommonsTrain: {
      TrainConfig config = spec.train;
      config.seed = seed;
      const CommonsTrainResult result = train_commons(spec.commons, config, spec.eval_episodes);
      std::ostringstream curve;
      curve << "update,mean_reward\n";
      for (std::size_t u = 0; u < result.reward_curve.size(); ++u) {
        curve << u << ',' << format_double(result.reward_curve[u]) << '\n';
      }
      write("reward_curve_" + seed_tag(seed) + ".csv", curve.str());
      json artifact;
      artifact["before"] = to_json(result.before);
      artifact["after"] = to_json(result.after);
      artifact["eval_reward_before"] = result.eval_reward_before;
      artifact["eval_reward_after"] = result.eval_reward_after;
      write("commons_train_" + seed_tag(seed) + ".json", json_text(artifact));
      break;
    }
    case ExperimentKind::CommonsProfile: {
      const auto n = static_cast<std::size_t>(spec.commons.n_agents);
      const std::vector<CommonsPolicy> policies(
          n, masked_policy(spec.profile, spec.commons.action_levels));
      const EpisodeRecord episode =
          run_policy_profile(spec.commons, policies, derive_seed(seed, 0));
      const IndexReferences references = compute_references(spec.commons, derive_seed(seed, 0));
      const IndexReport report = compute_indices(episode, references);
      write("episode_" + seed_tag(seed) + ".csv", episode_csv(episode));
      json artifact;
      artifact["profile"] = to_string(spec.profile);
      artifact["indices"] = to_json(report);
      artifact["references"] = to_json(references);
      write("indices_" + seed_tag(seed) + ".json", json_text(artifact));
      break;
    }
    case ExperimentKind::Coalition: {
      TrainConfig config = spec.train;
      config.seed = seed;
      const auto n = static_cast<std::size_t>(spec.commons.n_agents);
      const std::vector<CommonsPolicy> fixed(
          n, masked_policy(spec.base_profile, spec.commons.action_levels));
      const CoalitionAuditReport report =
          coalition_audit(spec.commons, fixed, spec.coalition_sizes, spec.num_samples, config,
                          seed, spec.eval_episodes);
      json artifact = to_json(report);
      artifact["base_profile"] = to_string(spec.base_profile);
      write("coalition_" + seed_tag(seed) + ".json", json_text(artifact));
      break;
    }
  }
  return artifacts;
}

int resolve_workers(int workers, std::size_t items) {
  if (workers <= 0) {
    const unsigned hinted = std::thread::hardware_concurrency();
    workers = hinted == 0 ? 1 : static_cast<int>(hinted);
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), items));
}

bool wants_curve_plot(ExperimentKind kind) {
  return kind == ExperimentKind::TrainVsFixed || kind == ExperimentKind::SelfPlay ||
         kind == ExperimentKind::Curriculum || kind == ExperimentKind::AuditRetrain;
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "train_vs_fixed") return ExperimentKind::TrainVsFixed;
  if (name == "self_play") return ExperimentKind::SelfPlay;
  if (name == "curriculum") return ExperimentKind::Curriculum;
  if (name == "audit_exact") return ExperimentKind::AuditExact;
  if (name == "audit_retrain") return ExperimentKind::AuditRetrain;
  if (name == "gamma_sweep") return ExperimentKind::GammaSweep;
  if (name == "backward_induction") return ExperimentKind::BackwardInduction;
  if (name == "commons_train") return ExperimentKind::CommonsTrain;
  if (name == "commons_profile") return ExperimentKind::CommonsProfile;
  if (name == "coalition") return ExperimentKind::Coalition;
  fail("unknown experiment kind '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TrainVsFixed:
      return "train_vs_fixed";
    case ExperimentKind::SelfPlay:
      return "self_play";
    case ExperimentKind::Curriculum:
      return "curriculum";
    case ExperimentKind::AuditExact:
      return "audit_exact";
    case ExperimentKind::AuditRetrain:
      return "audit_retrain";
    case ExperimentKind::GammaSweep:
      return "gamma_sweep";
    case ExperimentKind::BackwardInduction:
      return "backward_induction";
    case ExperimentKind::CommonsTrain:
      return "commons_train";
    case ExperimentKind::CommonsProfile:
      return "commons_profile";
    case ExperimentKind::Coalition:
      return "coalition";
  }
  fail("unknown experiment kind");
}

std::vector<double> default_gamma_grid() {
  std::vector<double> gammas;
  gammas.reserve(19);
  for (int k = 1; k <= 19; ++k) {
    gammas.push_back(static_cast<double>(k) / 20.0);
  }
  return gammas;
}

ExperimentSpec parse_experiment_spec(const json& spec_json) {
  if (!spec_json.is_object()) fail("experiment spec must be a json object");
  ExperimentSpec spec;
  spec.name = get_string(spec_json, "experiment spec", "name");
  if (spec.name.empty()) fail("experiment 'name' must be non-empty");
  if (spec.name.find_first_not_of(
          "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
      std::string::npos) {
    fail("experiment 'name' may only contain [A-Za-z0-9_.-]");
  }
  spec.kind = experiment_kind_from_string(get_string(spec_json, "experiment spec", "kind"));
  const std::string context = "experiment '" + spec.name + "'";

  switch (spec.kind) {
    case ExperimentKind::TrainVsFixed:
      check_keys(spec_json, context, {"name", "kind", "seeds", "game", "train", "opponent"});
      spec.opponent = parse_strategy(spec_json, context, "opponent");
      break;
    case ExperimentKind::SelfPlay:
      check_keys(spec_json, context, {"name", "kind", "seeds", "game", "train"});
      break;
    case ExperimentKind::Curriculum:
      check_keys(spec_json, context, {"name", "kind", "seeds", "game", "train", "stages"});
      spec.stages = parse_stages(require_key(spec_json, context, "stages"));
      break;
    case ExperimentKind::AuditExact:
      check_keys(spec_json, context, {"name", "kind", "seeds", "game", "p1", "p2", "gamma",
                                      "epsilon"});
      spec.p1 = parse_strategy(spec_json, context, "p1");
      spec.p2 = parse_strategy(spec_json, context, "p2");
      break;
    case ExperimentKind::AuditRetrain:
      check_keys(spec_json, context,
                 {"name", "kind", "seeds", "game", "p1", "p2", "target_slot", "train",
                  "improvement_threshold"});
      spec.p1 = parse_strategy(spec_json, context, "p1");
      spec.p2 = parse_strategy(spec_json, context, "p2");
      spec.target_slot = get_int(spec_json, context, "target_slot", spec.target_slot);
      if (spec.target_slot != 1 && spec.target_slot != 2) {
        fail("'target_slot' must be 1 or 2 in " + context);
      }
      spec.improvement_threshold =
          get_double(spec_json, context, "improvement_threshold", spec.improvement_threshold);
      break;
    case ExperimentKind::GammaSweep: {
      check_keys(spec_json, context,
                 {"name", "kind", "seeds", "game", "p1", "p2", "gammas", "epsilon"});
      spec.p1 = parse_strategy(spec_json, context, "p1");
      spec.p2 = parse_strategy(spec_json, context, "p2");
      if (spec_json.contains("gammas")) {
        const json& gammas = spec_json.at("gammas");
        if (!gammas.is_array() || gammas.empty()) {
          fail("'gammas' must be a non-empty array in " + context);
        }
        for (const json& value : gammas) {
          if (!value.is_number()) fail("'gammas' entries must be numbers in " + context);
          const double gamma = value.get<double>();
          if (!(gamma >= 0.0 && gamma < 1.0)) {
            fail("'gammas' entries must lie in [0, 1) in " + context);
          }
          spec.gammas.push_back(gamma);
        }
      }
      break;
    }
    case ExperimentKind::BackwardInduction:
      check_keys(spec_json, context, {"name", "kind", "seeds", "game", "steps"});
      spec.steps = get_int(spec_json, context, "steps", -1);
      if (spec.steps < 1) fail("'steps' must be a positive integer in " + context);
      break;
    case ExperimentKind::CommonsTrain:
      check_keys(spec_json, context,
                 {"name", "kind", "seeds", "commons", "train", "eval_episodes"});
      break;
    case ExperimentKind::CommonsProfile: {
      check_keys(spec_json, context, {"name", "kind", "seeds", "commons", "profile"});
      const std::string profile = get_string(spec_json, context, "profile");
      try {
        spec.profile = masked_policy_kind_from_string(profile);
      } catch (const std::invalid_argument& e) {
        fail(std::string(e.what()) + " (key 'profile' in " + context + ")");
      }
      break;
    }
    case ExperimentKind::Coalition: {
      check_keys(spec_json, context,
                 {"name", "kind", "seeds", "commons", "train", "num_samples", "coalition_size",
                  "base_profile", "eval_episodes"});
      spec.num_samples = get_int(spec_json, context, "num_samples", spec.num_samples);
      if (spec.num_samples < 1) fail("'num_samples' must be at least 1 in " + context);
      if (spec_json.contains("coalition_size")) {
        const json& size = spec_json.at("coalition_size");
        if (size.is_string() && size.get<std::string>() == "uniform") {
          spec.coalition_sizes = CoalitionSizeSpec::uniform();
        } else if (size.is_number_integer()) {
          spec.coalition_sizes = CoalitionSizeSpec::fixed(size.get<int>());
        } else {
          fail("'coalition_size' must be \"uniform\" or an integer in " + context);
        }
      }
      if (spec_json.contains("base_profile")) {
        try {
          spec.base_profile =
              masked_policy_kind_from_string(get_string(spec_json, context, "base_profile"));
        } catch (const std::invalid_argument& e) {
          fail(std::string(e.what()) + " (key 'base_profile' in " + context + ")");
        }
      }
      break;
    }
  }

  if (spec_json.contains("seeds")) spec.seeds = parse_seeds(spec_json.at("seeds"));
  if (spec_json.contains("game")) spec.game = parse_game(spec_json.at("game"));
  if (spec_json.contains("train")) spec.train = parse_train(spec_json.at("train"));
  if (spec_json.contains("commons")) spec.commons = parse_commons(spec_json.at("commons"));
  spec.gamma = get_double(spec_json, context, "gamma", spec.gamma);
  if (!(spec.gamma >= 0.0 && spec.gamma < 1.0)) fail("'gamma' must lie in [0, 1) in " + context);
  spec.epsilon = get_double(spec_json, context, "epsilon", spec.epsilon);
  if (!(spec.epsilon >= 0.0)) fail("'epsilon' must be non-negative in " + context);
  spec.eval_episodes = get_int(spec_json, context, "eval_episodes", spec.eval_episodes);
  if (spec.eval_episodes < 1) fail("'eval_episodes' must be at least 1 in " + context);
  return spec;
}

std::string spec_hash(const json& spec) { return hex64(fnv1a64(spec.dump())); }

bool RunManifest::all_ok() const {
  return std::all_of(seeds.begin(), seeds.end(),
                     [](const SeedOutcome& outcome) { return outcome.ok; });
}

nlohmann::json to_json(const RunManifest& manifest) {
  json out;
  out["name"] = manifest.name;
  out["kind"] = manifest.kind;
  out["spec_hash"] = manifest.hash;
  out["status"] = manifest.status;
  out["duration_seconds"] = manifest.duration_seconds;
  out["shared_artifacts"] = manifest.shared_artifacts;
  json seeds = json::array();
  for (const SeedOutcome& outcome : manifest.seeds) {
    json entry;
    entry["seed"] = outcome.seed;
    entry["ok"] = outcome.ok;
    if (!outcome.error.empty()) entry["error"] = outcome.error;
    entry["artifacts"] = outcome.artifacts;
    seeds.push_back(std::move(entry));
  }
  out["seeds"] = seeds;
  return out;
}

RunManifest run_experiment(const json& spec_json, const fs::path& out_dir, int workers) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentSpec spec = parse_experiment_spec(spec_json);

  fs::create_directories(out_dir);
  atomic_write_file(out_dir / "spec.json", json_text(spec_json));

  std::vector<std::uint64_t> items = spec.seeds;
  if (seed_independent(spec.kind)) items = {0};

  RunManifest manifest;
  manifest.name = spec.name;
  manifest.kind = to_string(spec.kind);
  manifest.hash = spec_hash(spec_json);
  manifest.seeds.resize(items.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      SeedOutcome& outcome = manifest.seeds[i];
      outcome.seed = items[i];
      try {
        outcome.artifacts = run_seed(spec, items[i], out_dir);
        outcome.ok = true;
      } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
      }
    }
  };
  const int n_workers = resolve_workers(workers, items.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (std::thread& thread : threads) thread.join();
  }

  if (manifest.all_ok() && wants_curve_plot(spec.kind)) {
    std::vector<PlotPanel> panels;
    for (const SeedOutcome& outcome : manifest.seeds) {
      for (const std::string& artifact : outcome.artifacts) {
        if (artifact.size() < 4 || artifact.substr(artifact.size() - 4) != ".csv") continue;
        PlotPanel panel;
        panel.title = spec.name + " seed " + std::to_string(outcome.seed);
        panel.table = parse_csv(read_file(out_dir / artifact));
        panels.push_back(std::move(panel));
      }
    }
    if (!panels.empty()) {
      atomic_write_file(out_dir / "curves.svg", render_learning_curves_svg(panels));
      manifest.shared_artifacts.push_back("curves.svg");
    }
  }

  manifest.status = manifest.all_ok() ? "ok" : "failed";
  manifest.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  atomic_write_file(out_dir / "manifest.json", json_text(to_json(manifest)));
  return manifest;
}

bool SuiteResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SuiteCheck& check) { return check.passed; });
}

namespace {

const std::vector<std::uint64_t> kSuiteSeeds = {1, 2, 3, 4, 5};

json suite_seeds_json() {
  json seeds = json::array();
  for (const std::uint64_t seed : kSuiteSeeds) seeds.push_back(seed);
  return seeds;
}

MemoryOnePolicy engine_from_artifact(const fs::path& file, const char* slot_key) {
  const json artifact = json::parse(read_file(file));
  const json& entry = slot_key == nullptr ? artifact : artifact.at(slot_key);
  return memory_one_from_json(entry.at("engine"));
}

void add_check(SuiteResult& result, const std::string& name, bool passed,
               const std::string& detail) {
  result.checks.push_back({name, passed, detail});
}

SuiteResult suite_figure2(const fs::path& dir, int workers) {
  SuiteResult result{"figure2", {}};

  json vs_tft;
  vs_tft["name"] = "vs_tft";
  vs_tft["kind"] = "train_vs_fixed";
  vs_tft["opponent"] = "tit_for_tat";
  vs_tft["seeds"] = suite_seeds_json();
  vs_tft["train"]["total_updates"] = 2000;
  const RunManifest m1 = run_experiment(vs_tft, dir / "vs_tft", workers);
  add_check(result, "vs_tft run completes", m1.all_ok(), "status " + m1.status);

  const MemoryOnePolicy tft2 = fixed_strategy(StrategyKind::TitForTat, 2);
  int tft_converged = 0;
  for (const std::uint64_t seed : kSuiteSeeds) {
    const MemoryOnePolicy learned = engine_from_artifact(
        dir / "vs_tft" / ("policy_seed" + std::to_string(seed) + ".json"), nullptr);
    const auto visited = visited_states(learned, tft2, 0.96);
    bool cooperates = true;
    for (int s = 0; s < kNumStates; ++s) {
      if (visited[s] && !(learned.p_defect[s] < 0.1)) cooperates = false;
    }
    if (cooperates) ++tft_converged;
  }
  add_check(result, "vs TFT: p_defect < 0.1 on visited states for >= 4/5 seeds",
            tft_converged >= 4, std::to_string(tft_converged) + "/5 seeds");

  json self_play;
  self_play["name"] = "self_play";
  self_play["kind"] = "self_play";
  self_play["seeds"] = suite_seeds_json();
  self_play["train"]["total_updates"] = 2000;
  const RunManifest m2 = run_experiment(self_play, dir / "self_play", workers);
  add_check(result, "self_play run completes", m2.all_ok(), "status " + m2.status);

  int defect_converged = 0;
  for (const std::uint64_t seed : kSuiteSeeds) {
    const fs::path file = dir / "self_play" / ("policy_seed" + std::to_string(seed) + ".json");
    const MemoryOnePolicy engine1 = engine_from_artifact(file, "slot1");
    const MemoryOnePolicy engine2 = engine_from_artifact(file, "slot2");
    const auto visited = visited_states(engine1, engine2, 0.96);
    bool defects = true;
    for (int s = 0; s < kNumStates; ++s) {
      if (visited[s] && (!(engine1.p_defect[s] > 0.9) || !(engine2.p_defect[s] > 0.9))) {
        defects = false;
      }
    }
    if (defects) ++defect_converged;
  }
  add_check(result, "self-play: p_defect > 0.9 on visited states for >= 4/5 seeds",
            defect_converged >= 4, std::to_string(defect_converged) + "/5 seeds");
  return result;
}

json audit_spec(const std::string& name, const std::string& strategy) {
  json spec;
  spec["name"] = name;
  spec["kind"] = "audit_exact";
  spec["p1"] = strategy;
  spec["p2"] = strategy;
  spec["gamma"] = 0.96;
  spec["epsilon"] = 1e-6;
  return spec;
}

SuiteResult suite_nash_audit(const fs::path& dir, int workers) {
  SuiteResult result{"nash_audit", {}};

  const auto audit_start = std::chrono::steady_clock::now();
  run_experiment(audit_spec("audit_alld", "all_d"), dir / "audit_alld", workers);
  run_experiment(audit_spec("audit_tft", "tit_for_tat"), dir / "audit_tft", workers);
  run_experiment(audit_spec("audit_allc", "all_c"), dir / "audit_allc", workers);
  const double audit_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - audit_start).count();

  const json alld = json::parse(read_file(dir / "audit_alld" / "audit.json"));
  const json tft = json::parse(read_file(dir / "audit_tft" / "audit.json"));
  const json allc = json::parse(read_file(dir / "audit_allc" / "audit.json"));

  const auto gap = [](const json& audit, const char* player) {
    return audit.at(player).at("gap").get<double>();
  };
  add_check(result, "(AllD, AllD) is Nash at gamma=0.96 (gap 0 +- 1e-8)",
            std::abs(gap(alld, "player1")) <= 1e-8 && std::abs(gap(alld, "player2")) <= 1e-8 &&
                alld.at("is_epsilon_nash").get<bool>(),
            "gaps " + format_double(gap(alld, "player1")) + ", " +
                format_double(gap(alld, "player2")));
  add_check(result, "(TFT, TFT) is Nash at gamma=0.96 (gap 0 +- 1e-8)",
            std::abs(gap(tft, "player1")) <= 1e-8 && std::abs(gap(tft, "player2")) <= 1e-8 &&
                tft.at("is_epsilon_nash").get<bool>(),
            "gaps " + format_double(gap(tft, "player1")) + ", " +
                format_double(gap(tft, "player2")));
  const double br_allc = allc.at("player1").at("best_response_value").get<double>();
  add_check(result, "(AllC, AllC) gap is 25 +- 1e-6 and not Nash",
            std::abs(gap(allc, "player1") - 25.0) <= 1e-6 &&
                std::abs(gap(allc, "player2") - 25.0) <= 1e-6 &&
                !allc.at("is_epsilon_nash").get<bool>(),
            "gaps " + format_double(gap(allc, "player1")) + ", " +
                format_double(gap(allc, "player2")));
  add_check(result, "best response vs AllC earns 125 +- 1e-6",
            std::abs(br_allc - 125.0) <= 1e-6, "value " + format_double(br_allc));
  add_check(result, "exact audit table runs in < 1 s", audit_seconds < 1.0,
            format_double(audit_seconds) + " s");

  json sweep;
  sweep["name"] = "tft_gamma_sweep";
  sweep["kind"] = "gamma_sweep";
  sweep["p1"] = "tit_for_tat";
  sweep["p2"] = "tit_for_tat";
  sweep["epsilon"] = 1e-8;
  run_experiment(sweep, dir / "tft_gamma_sweep", workers);
  const CsvTable table = parse_csv(read_file(dir / "tft_gamma_sweep" / "sweep.csv"));
  const std::size_t gamma_col = table.column("gamma");
  const std::size_t nash_col = table.column("is_nash");
  bool sweep_ok = table.rows.size() == 19;
  for (const auto& row : table.rows) {
    const double gamma = std::stod(row[gamma_col]);
    const bool is_nash = row[nash_col] == "true";
    const bool expected = gamma >= 0.25 - 1e-12;
    if (is_nash != expected) sweep_ok = false;
  }
  add_check(result, "(TFT, TFT) Nash exactly when gamma >= 0.25 on the 0.05 grid", sweep_ok,
            std::to_string(table.rows.size()) + " gamma values");

  const auto retrain_spec = [](const std::string& name, const std::string& strategy) {
    json spec;
    spec["name"] = name;
    spec["kind"] = "audit_retrain";
    spec["p1"] = strategy;
    spec["p2"] = strategy;
    spec["target_slot"] = 1;
    spec["seeds"] = suite_seeds_json();
    spec["train"]["total_updates"] = 2000;
    return spec;
  };
  run_experiment(retrain_spec("retrain_allc", "all_c"), dir / "retrain_allc", workers);
  run_experiment(retrain_spec("retrain_tft", "tit_for_tat"), dir / "retrain_tft", workers);
  run_experiment(retrain_spec("retrain_alld", "all_d"), dir / "retrain_alld", workers);

  int allc_recovered = 0;
  int tft_stable = 0;
  int alld_stable = 0;
  for (const std::uint64_t seed : kSuiteSeeds) {
    const std::string file = "retrain_seed" + std::to_string(seed) + ".json";
    const json against_allc = json::parse(read_file(dir / "retrain_allc" / file));
    if (against_allc.at("achieved_value").get<double>() >=
        0.95 * against_allc.at("exact_best_response_value").get<double>()) {
      ++allc_recovered;
    }
    const json against_tft = json::parse(read_file(dir / "retrain_tft" / file));
    if (!against_tft.at("deviation_found").get<bool>()) ++tft_stable;
    const json against_alld = json::parse(read_file(dir / "retrain_alld" / file));
    if (!against_alld.at("deviation_found").get<bool>()) ++alld_stable;
  }
  add_check(result, "retraining vs (AllC, AllC) recovers >= 95% of best response for >= 4/5 seeds",
            allc_recovered >= 4, std::to_string(allc_recovered) + "/5 seeds");
  add_check(result, "retraining finds no deviation against (TFT, TFT) for >= 4/5 seeds",
            tft_stable >= 4, std::to_string(tft_stable) + "/5 seeds");
  add_check(result, "retraining finds no deviation against (AllD, AllD) for >= 4/5 seeds",
            alld_stable >= 4, std::to_string(alld_stable) + "/5 seeds");
  return result;
}

SuiteResult suite_horizon(const fs::path& dir, int workers) {
  SuiteResult result{"horizon", {}};

  for (const int steps : {1, 10, 1000}) {
    json spec;
    spec["name"] = "induction_" + std::to_string(steps);
    spec["kind"] = "backward_induction";
    spec["steps"] = steps;
    run_experiment(spec, dir / spec["name"].get<std::string>(), workers);
    const json certificate = json::parse(
        read_file(dir / ("induction_" + std::to_string(steps)) / "induction.json"));
    add_check(result, "backward induction n=" + std::to_string(steps) + " is all-defect",
              certificate.at("all_defect").get<bool>() &&
                  certificate.at("min_margin").get<double>() > 0.0,
              "min margin " + format_double(certificate.at("min_margin").get<double>()));
  }

  const auto induction_start = std::chrono::steady_clock::now();
  backward_induction_fixed_horizon(MatrixGame::default_pd(), 1000);
  const double induction_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - induction_start).count();
  add_check(result, "backward induction n=1000 runs in < 0.1 s", induction_seconds < 0.1,
            format_double(induction_seconds) + " s");

  const GeometricHorizon horizon{0.05, 10000};
  const HorizonModel model = horizon;
  Rng rng(424242);
  const int n_samples = 100000;
  double total = 0.0;
  int min_draw = horizon.cap;
  int max_draw = 1;
  for (int i = 0; i < n_samples; ++i) {
    const int draw = sample_horizon(model, rng);
    total += draw;
    min_draw = std::min(min_draw, draw);
    max_draw = std::max(max_draw, draw);
  }
  const double mean = total / n_samples;
  json stats;
  stats["stop_prob"] = 0.05;
  stats["cap"] = horizon.cap;
  stats["samples"] = n_samples;
  stats["mean"] = mean;
  stats["min"] = min_draw;
  stats["max"] = max_draw;
  atomic_write_file(dir / "geometric_stats.json", stats.dump(2) + "\n");
  add_check(result, "geometric(0.05) sample mean within 20 +- 0.5",
            std::abs(mean - 20.0) <= 0.5, "mean " + format_double(mean));
  add_check(result, "geometric draws stay within [1, cap]", min_draw >= 1 && max_draw <= 10000,
            "range [" + std::to_string(min_draw) + ", " + std::to_string(max_draw) + "]");
  return result;
}

SuiteResult suite_commons_direction(const fs::path& dir, int workers) {
  SuiteResult result{"commons_table1_direction", {}};
  const auto start = std::chrono::steady_clock::now();

  for (const char* profile : {"no_consumption", "full_consumption"}) {
    json spec;
    spec["name"] = std::string("profile_") + profile;
    spec["kind"] = "commons_profile";
    spec["profile"] = profile;
    run_experiment(spec, dir / spec["name"].get<std::string>(), workers);
  }
  const json no_consumption =
      json::parse(read_file(dir / "profile_no_consumption" / "indices_seed1.json"));
  const json full_consumption =
      json::parse(read_file(dir / "profile_full_consumption" / "indices_seed1.json"));
  const auto idx = [](const json& artifact, const char* key) {
    return artifact.at("indices").at(key).get<double>();
  };
  add_check(result, "economic index: no_consumption > full_consumption",
            idx(no_consumption, "economic") > idx(full_consumption, "economic"),
            format_double(idx(no_consumption, "economic")) + " vs " +
                format_double(idx(full_consumption, "economic")));
  add_check(result, "climate index: no_consumption > full_consumption",
            idx(no_consumption, "climate") > idx(full_consumption, "climate"),
            format_double(idx(no_consumption, "climate")) + " vs " +
                format_double(idx(full_consumption, "climate")));
  add_check(result, "utility index: no_consumption < full_consumption",
            idx(no_consumption, "utility") < idx(full_consumption, "utility"),
            format_double(idx(no_consumption, "utility")) + " vs " +
                format_double(idx(full_consumption, "utility")));

  // Free-rider deviation: everyone saves moderately and fully mitigates; one
  // agent drops mitigation to zero. Its own discounted utility must rise and
  // every other agent's must fall.
  CommonsConfig config;
  const int mid_savings = 4;
  const int top = config.action_levels - 1;
  const auto fixed_levels = [](int savings, int mitigation) {
    return CommonsPolicy([savings, mitigation](const CommonsObservation&, Rng&) {
      return AllocationAction{savings, mitigation};
    });
  };
  std::vector<CommonsPolicy> baseline(static_cast<std::size_t>(config.n_agents),
                                      fixed_levels(mid_savings, top));
  std::vector<CommonsPolicy> deviated = baseline;
  deviated[0] = fixed_levels(mid_savings, 0);
  const EpisodeRecord base_episode = run_policy_profile(config, baseline, 0);
  const EpisodeRecord dev_episode = run_policy_profile(config, deviated, 0);

  const double own_before = base_episode.agent_discounted_utility(0, config.gamma);
  const double own_after = dev_episode.agent_discounted_utility(0, config.gamma);
  bool others_lose = true;
  json free_rider;
  free_rider["deviator"] = {{"before", own_before}, {"after", own_after}};
  json others = json::array();
  for (int agent = 1; agent < config.n_agents; ++agent) {
    const double before = base_episode.agent_discounted_utility(agent, config.gamma);
    const double after = dev_episode.agent_discounted_utility(agent, config.gamma);
    if (!(after < before)) others_lose = false;
    others.push_back({{"agent", agent}, {"before", before}, {"after", after}});
  }
  free_rider["others"] = others;
  atomic_write_file(dir / "free_rider.json", free_rider.dump(2) + "\n");
  add_check(result, "dropping mitigation raises the deviator's utility", own_after > own_before,
            format_double(own_before) + " -> " + format_double(own_after));
  add_check(result, "dropping mitigation lowers every other agent's utility", others_lose, "");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  add_check(result, "suite runs in < 10 s", elapsed < 10.0, format_double(elapsed) + " s");
  return result;
}

}  // namespace

std::vector<std::string> replicate_suite_names() {
  return {"figure2", "nash_audit", "horizon", "commons_table1_direction"};
}

SuiteResult run_replicate_suite(const std::string& name, const fs::path& out_dir, int workers) {
  fs::create_directories(out_dir);
  if (name == "figure2") return suite_figure2(out_dir, workers);
  if (name == "nash_audit") return suite_nash_audit(out_dir, workers);
  if (name == "horizon") return suite_horizon(out_dir, workers);
  if (name == "commons_table1_direction") return suite_commons_direction(out_dir, workers);
  throw std::invalid_argument("unknown replicate suite '" + name + "'");
}

}  // namespace freerider
