#include "freerider/a2c.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "freerider/exact_values.hpp"
#include "freerider/io.hpp"
#include "freerider/rng.hpp"

namespace freerider {
namespace {

constexpr std::uint64_t kEpisodeStreamBase = 1000;

void check_slot(int slot) {
  if (slot != 1 && slot != 2) {
    throw std::invalid_argument("player slot must be 1 or 2, got " + std::to_string(slot));
  }
}

std::array<std::array<double, 2>, kNumStates> action_probs(const PolicyParams& params) {
  std::array<std::array<double, 2>, kNumStates> probs{};
  for (int s = 0; s < kNumStates; ++s) {
    const double pd = softmax_defect_prob(params.logits[s][0], params.logits[s][1]);
    probs[s][0] = 1.0 - pd;
    probs[s][1] = pd;
  }
  return probs;
}

struct ViewStep {
  GameState state;  // own view
  Action action;
  double reward;
};

std::vector<ViewStep> learner_view(const Trajectory& traj, int slot) {
  std::vector<ViewStep> view;
  view.reserve(traj.steps.size());
  for (const TimeStep& ts : traj.steps) {
    if (slot == 1) {
      view.push_back({ts.state, ts.action1, ts.reward1});
    } else {
      view.push_back({mirrored(ts.state), ts.action2, ts.reward2});
    }
  }
  return view;
}

// Shared core of a2c_update: episodes are already in the learner's own view.
PolicyParams update_from_views(const PolicyParams& params,
                               const std::vector<std::vector<ViewStep>>& episodes,
                               const TrainConfig& config) {
  std::vector<AdvantageSample> samples;
  std::array<double, kNumStates> td_sum{};
  std::array<int, kNumStates> td_count{};
  for (const auto& episode : episodes) {
    double ret = 0.0;  // return-to-go, built backwards
    std::vector<double> returns(episode.size());
    for (int t = static_cast<int>(episode.size()) - 1; t >= 0; --t) {
      ret = episode[t].reward + config.gamma * ret;
      returns[t] = ret;
    }
    for (std::size_t t = 0; t < episode.size(); ++t) {
      const int s = index(episode[t].state);
      const double advantage = returns[t] - params.values[s];
      samples.push_back({episode[t].state, episode[t].action, advantage});
      td_sum[s] += advantage;
      td_count[s] += 1;
    }
  }

  const auto grad =
      actor_gradient(params, samples, config.entropy_coef, static_cast<int>(episodes.size()));
  PolicyParams out = params;
  for (int s = 0; s < kNumStates; ++s) {
    for (int a = 0; a < 2; ++a) {
      out.logits[s][a] += config.actor_lr * grad[s][a];
    }
    if (td_count[s] > 0) {
      out.values[s] += config.critic_lr * td_sum[s] / td_count[s];
    }
  }
  return out;
}

std::uint64_t episode_seed(const TrainConfig& config, int update, int episode) {
  const std::uint64_t stream =
      kEpisodeStreamBase +
      static_cast<std::uint64_t>(update) * static_cast<std::uint64_t>(config.episodes_per_update) +
      static_cast<std::uint64_t>(episode);
  return derive_seed(config.seed, stream);
}

PolicyParams init_params(const TrainConfig& config, int slot) {
  if (std::holds_alternative<ZerosInit>(config.init)) {
    return PolicyParams::zeros();
  }
  const double sigma = std::get<GaussianInit>(config.init).sigma;
  Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(slot - 1));
  return PolicyParams::gaussian(sigma, rng);
}

CurvePoint make_point(int update, const PolicyParams& params,
                      const std::vector<Trajectory>& batch, int slot, double gamma) {
  CurvePoint point;
  point.update = update;
  point.p_defect = to_memory_one(params).p_defect;
  const int player = slot - 1;
  double total = 0.0;
  double total_discounted = 0.0;
  for (const Trajectory& traj : batch) {
    total += episode_return(traj, player, 1.0);
    total_discounted += episode_return(traj, player, gamma);
  }
  point.mean_return = total / static_cast<double>(batch.size());
  point.mean_discounted_return = total_discounted / static_cast<double>(batch.size());
  return point;
}

void run_fixed_stage(const MatrixGame& game, const MemoryOnePolicy& opponent, PolicyParams& params,
                     const TrainConfig& config, int stage, std::vector<LearningCurve>& curves) {
  LearningCurve curve;
  curve.seed = config.seed;
  curve.slot = config.learner_slot;
  curve.stage = stage;
  curve.points.reserve(static_cast<std::size_t>(config.total_updates));
  for (int u = 0; u < config.total_updates; ++u) {
    const MemoryOnePolicy learner = induced_policy(params, config.learner_slot);
    const MemoryOnePolicy& pol1 = config.learner_slot == 1 ? learner : opponent;
    const MemoryOnePolicy& pol2 = config.learner_slot == 1 ? opponent : learner;
    std::vector<Trajectory> batch;
    batch.reserve(static_cast<std::size_t>(config.episodes_per_update));
    for (int e = 0; e < config.episodes_per_update; ++e) {
      batch.push_back(rollout(game, pol1, pol2, config.horizon, episode_seed(config, u, e)));
    }
    params = a2c_update(params, batch, config);
    curve.points.push_back(
        make_point(u + 1, params, batch, config.learner_slot, config.gamma));
  }
  curves.push_back(std::move(curve));
}

void run_self_play_stage(const MatrixGame& game, PolicyParams& params1, PolicyParams& params2,
                         const TrainConfig& config, int stage,
                         std::vector<LearningCurve>& curves) {
  LearningCurve curve1;
  curve1.seed = config.seed;
  curve1.slot = 1;
  curve1.stage = stage;
  LearningCurve curve2 = curve1;
  curve2.slot = 2;
  if (config.share_params) {
    params2 = params1;
  }
  for (int u = 0; u < config.total_updates; ++u) {
    const MemoryOnePolicy pol1 = induced_policy(params1, 1);
    const MemoryOnePolicy pol2 = induced_policy(params2, 2);
    std::vector<Trajectory> batch;
    batch.reserve(static_cast<std::size_t>(config.episodes_per_update));
    for (int e = 0; e < config.episodes_per_update; ++e) {
      batch.push_back(rollout(game, pol1, pol2, config.horizon, episode_seed(config, u, e)));
    }
    if (config.share_params) {
      std::vector<std::vector<ViewStep>> episodes;
      episodes.reserve(batch.size() * 2);
      for (const Trajectory& traj : batch) {
        episodes.push_back(learner_view(traj, 1));
      }
      for (const Trajectory& traj : batch) {
        episodes.push_back(learner_view(traj, 2));
      }
      params1 = update_from_views(params1, episodes, config);
      params2 = params1;
    } else {
      TrainConfig cfg1 = config;
      cfg1.learner_slot = 1;
      TrainConfig cfg2 = config;
      cfg2.learner_slot = 2;
      const PolicyParams next1 = a2c_update(params1, batch, cfg1);
      const PolicyParams next2 = a2c_update(params2, batch, cfg2);
      params1 = next1;
      params2 = next2;
    }
    curve1.points.push_back(make_point(u + 1, params1, batch, 1, config.gamma));
    curve2.points.push_back(make_point(u + 1, params2, batch, 2, config.gamma));
  }
  curves.push_back(std::move(curve1));
  curves.push_back(std::move(curve2));
}

}  // namespace

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("discount factor must lie in [0, 1), got " +
                                std::to_string(gamma));
  }
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (!(entropy_coef >= 0.0)) {
    throw std::invalid_argument("entropy coefficient must be non-negative");
  }
  if (episodes_per_update < 1) {
    throw std::invalid_argument("episodes_per_update must be at least 1");
  }
  if (total_updates < 0) {
    throw std::invalid_argument("total_updates must be non-negative");
  }
  freerider::validate(horizon);
  check_slot(learner_slot);
  if (std::holds_alternative<GaussianInit>(init) && !(std::get<GaussianInit>(init).sigma >= 0.0)) {
    throw std::invalid_argument("gaussian init sigma must be non-negative");
  }
}

GameState own_view(GameState global_state, int slot) {
  check_slot(slot);
  return slot == 1 ? global_state : mirrored(global_state);
}

MemoryOnePolicy induced_policy(const PolicyParams& params, int slot) {
  check_slot(slot);
  const MemoryOnePolicy own = to_memory_one(params);
  return slot == 1 ? own : own.mirrored_seat();
}

std::string learning_curve_csv(const std::vector<LearningCurve>& curves) {
  std::ostringstream out;
  out << "update,seed,stage,slot,p_defect_start,p_defect_cc,p_defect_cd,p_defect_dc,"
         "p_defect_dd,mean_return,mean_discounted_return\n";
  for (const LearningCurve& curve : curves) {
    for (const CurvePoint& point : curve.points) {
      out << point.update << ',' << curve.seed << ',' << curve.stage << ',' << curve.slot;
      for (int s = 0; s < kNumStates; ++s) {
        out << ',' << format_double(point.p_defect[s]);
      }
      out << ',' << format_double(point.mean_return) << ','
          << format_double(point.mean_discounted_return) << '\n';
    }
  }
  return out.str();
}

double actor_surrogate(const PolicyParams& params, const std::vector<AdvantageSample>& samples,
                       double entropy_coef, int num_episodes) {
  if (num_episodes < 1) {
    throw std::invalid_argument("num_episodes must be at least 1");
  }
  const auto probs = action_probs(params);
  double total = 0.0;
  for (const AdvantageSample& sample : samples) {
    const int s = index(sample.state);
    const double pc = probs[s][0];
    const double pd = probs[s][1];
    total += sample.advantage * std::log(probs[s][static_cast<int>(sample.action)]);
    if (entropy_coef != 0.0) {
      double entropy = 0.0;
      if (pc > 0.0) entropy -= pc * std::log(pc);
      if (pd > 0.0) entropy -= pd * std::log(pd);
      total += entropy_coef * entropy;
    }
  }
  return total / static_cast<double>(num_episodes);
}

std::array<std::array<double, 2>, kNumStates> actor_gradient(
    const PolicyParams& params, const std::vector<AdvantageSample>& samples, double entropy_coef,
    int num_episodes) {
  if (num_episodes < 1) {
    throw std::invalid_argument("num_episodes must be at least 1");
  }
  const auto probs = action_probs(params);
  std::array<std::array<double, 2>, kNumStates> grad{};
  for (const AdvantageSample& sample : samples) {
    const int s = index(sample.state);
    const int a = static_cast<int>(sample.action);
    for (int b = 0; b < 2; ++b) {
      grad[s][b] += sample.advantage * ((b == a ? 1.0 : 0.0) - probs[s][b]);
    }
    if (entropy_coef != 0.0) {
      // dH/dz_b = -p_b (log p_b + H), with 0 log 0 read as 0.
      const double pc = probs[s][0];
      const double pd = probs[s][1];
      double entropy = 0.0;
      if (pc > 0.0) entropy -= pc * std::log(pc);
      if (pd > 0.0) entropy -= pd * std::log(pd);
      if (pc > 0.0) grad[s][0] += entropy_coef * (-pc * (std::log(pc) + entropy));
      if (pd > 0.0) grad[s][1] += entropy_coef * (-pd * (std::log(pd) + entropy));
    }
  }
  const double scale = 1.0 / static_cast<double>(num_episodes);
  for (auto& row : grad) {
    row[0] *= scale;
    row[1] *= scale;
  }
  return grad;
}

PolicyParams a2c_update(const PolicyParams& params, const std::vector<Trajectory>& batch,
                        const TrainConfig& config) {
  if (batch.empty()) {
    throw std::invalid_argument("a2c_update requires a non-empty batch");
  }
  check_slot(config.learner_slot);
  std::vector<std::vector<ViewStep>> episodes;
  episodes.reserve(batch.size());
  for (const Trajectory& traj : batch) {
    episodes.push_back(learner_view(traj, config.learner_slot));
  }
  return update_from_views(params, episodes, config);
}

TrainResult train_vs_fixed(const MatrixGame& game, const MemoryOnePolicy& opponent,
                           const TrainConfig& config) {
  config.validate();
  PolicyParams params = init_params(config, config.learner_slot);
  std::vector<LearningCurve> curves;
  run_fixed_stage(game, opponent, params, config, 0, curves);
  return {params, std::move(curves.front())};
}

SelfPlayResult train_self_play(const MatrixGame& game, const TrainConfig& config) {
  config.validate();
  PolicyParams params1 = init_params(config, 1);
  PolicyParams params2 = init_params(config, 2);
  std::vector<LearningCurve> curves;
  run_self_play_stage(game, params1, params2, config, 0, curves);
  return {params1, params2, std::move(curves[0]), std::move(curves[1])};
}

CurriculumResult train_curriculum(const MatrixGame& game,
                                  const std::vector<CurriculumStage>& stages) {
  if (stages.empty()) {
    throw std::invalid_argument("curriculum requires at least one stage");
  }
  for (const CurriculumStage& stage : stages) {
    stage.config.validate();
  }
  PolicyParams params1 = init_params(stages.front().config, 1);
  PolicyParams params2 = init_params(stages.front().config, 2);
  std::vector<LearningCurve> curves;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const CurriculumStage& stage = stages[i];
    if (const auto* fixed = std::get_if<FixedOpponentStage>(&stage.kind)) {
      PolicyParams& learner = stage.config.learner_slot == 1 ? params1 : params2;
      run_fixed_stage(game, fixed->opponent, learner, stage.config, static_cast<int>(i), curves);
    } else {
      if (std::get<SelfPlayStage>(stage.kind).clone_learner) {
        params2 = params1;
      }
      run_self_play_stage(game, params1, params2, stage.config, static_cast<int>(i), curves);
    }
  }
  return {params1, params2, std::move(curves)};
}

std::array<bool, kNumStates> visited_states(const MemoryOnePolicy& policy1,
                                            const MemoryOnePolicy& policy2, double gamma,
                                            double threshold) {
  const auto visitation = discounted_visitation(policy1, policy2, gamma);
  std::array<bool, kNumStates> visited{};
  for (int s = 0; s < kNumStates; ++s) {
    visited[s] = visitation[s] > threshold;
  }
  return visited;
}

}  // namespace freerider
