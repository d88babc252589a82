#include "freerider/commons.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "freerider/io.hpp"

namespace freerider {
namespace {

constexpr double kConsumptionFloor = 1e-8;
constexpr std::uint64_t kEpisodeStreamBase = 1000;
constexpr std::uint64_t kInitStreamBase = 500;
constexpr std::uint64_t kEvalStream = 900;
constexpr std::uint64_t kIndexEpisodeStream = 901;

void check_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

void check_non_negative(double value, const char* name) {
  if (!(value >= 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be non-negative");
  }
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// Softmax over a contiguous span of logits, max-shifted for stability.
std::vector<double> softmax(const double* logits, int n) {
  double max_logit = logits[0];
  for (int i = 1; i < n; ++i) max_logit = std::max(max_logit, logits[i]);
  std::vector<double> probs(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    probs[static_cast<std::size_t>(i)] = std::exp(logits[i] - max_logit);
    total += probs[static_cast<std::size_t>(i)];
  }
  for (double& p : probs) p /= total;
  return probs;
}

int sample_categorical(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

void CommonsConfig::validate() const {
  if (n_agents < 1) throw std::invalid_argument("n_agents must be at least 1");
  check_positive(productivity, "productivity");
  if (!(capital_elasticity > 0.0 && capital_elasticity < 1.0)) {
    throw std::invalid_argument("capital_elasticity must lie in (0, 1)");
  }
  if (!(depreciation >= 0.0 && depreciation <= 1.0)) {
    throw std::invalid_argument("depreciation must lie in [0, 1]");
  }
  check_non_negative(emission_intensity, "emission_intensity");
  check_non_negative(temp_sensitivity, "temp_sensitivity");
  check_non_negative(damage_coef, "damage_coef");
  check_non_negative(mitigation_cost_scale, "mitigation_cost_scale");
  check_positive(mitigation_cost_exponent, "mitigation_cost_exponent");
  check_positive(utility_curvature, "utility_curvature");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1)");
  }
  if (action_levels < 2) throw std::invalid_argument("action_levels must be at least 2");
  if (episode_length < 1) throw std::invalid_argument("episode_length must be at least 1");
  check_positive(initial_capital, "initial_capital");
  check_non_negative(initial_temperature, "initial_temperature");
  if (obs_capital_bins < 1 || obs_temperature_bins < 1 || obs_time_phases < 1) {
    throw std::invalid_argument("observation bin counts must be at least 1");
  }
  check_positive(obs_temperature_span, "obs_temperature_span");
}

double CommonsConfig::level_to_rate(int level) const {
  if (level < 0 || level >= action_levels) {
    throw std::invalid_argument("action level " + std::to_string(level) + " outside [0, " +
                                std::to_string(action_levels - 1) + "]");
  }
  return static_cast<double>(level) / static_cast<double>(action_levels - 1);
}

int CommonsConfig::num_obs_buckets() const {
  return obs_capital_bins * obs_temperature_bins * obs_time_phases;
}

CommonsState CommonsState::initial(const CommonsConfig& config) {
  CommonsState state;
  state.capital.assign(static_cast<std::size_t>(config.n_agents), config.initial_capital);
  state.temperature = config.initial_temperature;
  state.t = 0;
  return state;
}

double isoelastic_utility(double consumption, double curvature) {
  const double c = std::max(consumption, kConsumptionFloor);
  if (std::abs(curvature - 1.0) < 1e-12) {
    return std::log(c);
  }
  return (std::pow(c, 1.0 - curvature) - 1.0) / (1.0 - curvature);
}

CommonsStepResult commons_step(const CommonsConfig& config, const CommonsState& state,
                               const std::vector<AllocationAction>& actions) {
  const auto n = static_cast<std::size_t>(config.n_agents);
  if (state.capital.size() != n) {
    throw std::invalid_argument("state has " + std::to_string(state.capital.size()) +
                                " capital stocks, config expects " + std::to_string(config.n_agents));
  }
  if (actions.size() != n) {
    throw std::invalid_argument("got " + std::to_string(actions.size()) + " actions for " +
                                std::to_string(config.n_agents) + " agents");
  }

  CommonsStepResult result;
  result.flows.resize(n);
  result.next.capital.resize(n);
  const double damage = 1.0 / (1.0 + config.damage_coef * state.temperature * state.temperature);

  double total_emissions = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double savings_rate = config.level_to_rate(actions[i].savings_level);
    const double mitigation_rate = config.level_to_rate(actions[i].mitigation_level);

    const double output =
        config.productivity * std::pow(state.capital[i], config.capital_elasticity) * damage;
    const double mitigation_spend =
        config.mitigation_cost_scale *
        std::pow(mitigation_rate, config.mitigation_cost_exponent) * output;
    const double invested = savings_rate * output;
    const double budget_left = output - invested - mitigation_spend;
    const double consumption = std::max(budget_left, 0.0);
    const double emissions = config.emission_intensity * (1.0 - mitigation_rate) * output;

    AgentFlows& flows = result.flows[i];
    flows.gross_output = output;
    flows.savings_rate = savings_rate;
    flows.mitigation_rate = mitigation_rate;
    flows.consumption = consumption;
    flows.emissions = emissions;
    flows.consumption_floored = budget_left < kConsumptionFloor;
    flows.reward = isoelastic_utility(consumption, config.utility_curvature);

    result.next.capital[i] = (1.0 - config.depreciation) * state.capital[i] + invested;
    total_emissions += emissions;
  }

  result.next.temperature = state.temperature + config.temp_sensitivity * total_emissions;
  result.next.t = state.t + 1;
  return result;
}

int observation_bucket(const CommonsObservation& obs, const CommonsConfig& config) {
  // Capital bins are log-spaced over [K0/16, K0*16]; stocks outside saturate.
  const double lo = config.initial_capital / 16.0;
  const double hi = config.initial_capital * 16.0;
  const double clamped = std::clamp(obs.capital, lo, hi);
  const double frac = std::log(clamped / lo) / std::log(hi / lo);
  int capital_bin = static_cast<int>(frac * config.obs_capital_bins);
  capital_bin = std::clamp(capital_bin, 0, config.obs_capital_bins - 1);

  const double temp_frac = std::clamp(
      (obs.temperature - config.initial_temperature) / config.obs_temperature_span, 0.0, 1.0);
  int temp_bin = static_cast<int>(temp_frac * config.obs_temperature_bins);
  temp_bin = std::clamp(temp_bin, 0, config.obs_temperature_bins - 1);

  int phase = obs.t * config.obs_time_phases / config.episode_length;
  phase = std::clamp(phase, 0, config.obs_time_phases - 1);

  return (capital_bin * config.obs_temperature_bins + temp_bin) * config.obs_time_phases + phase;
}

MaskedPolicyKind masked_policy_kind_from_string(const std::string& name) {
  if (name == "no_consumption") return MaskedPolicyKind::NoConsumption;
  if (name == "full_consumption") return MaskedPolicyKind::FullConsumption;
  if (name == "uniform_random") return MaskedPolicyKind::UniformRandom;
  throw std::invalid_argument("unknown masked policy '" + name + "'");
}

std::string to_string(MaskedPolicyKind kind) {
  switch (kind) {
    case MaskedPolicyKind::NoConsumption:
      return "no_consumption";
    case MaskedPolicyKind::FullConsumption:
      return "full_consumption";
    case MaskedPolicyKind::UniformRandom:
      return "uniform_random";
  }
  throw std::invalid_argument("unknown masked policy kind");
}

CommonsPolicy masked_policy(MaskedPolicyKind kind, int action_levels) {
  if (action_levels < 2) throw std::invalid_argument("action_levels must be at least 2");
  const int top = action_levels - 1;
  switch (kind) {
    case MaskedPolicyKind::NoConsumption:
      return [top](const CommonsObservation&, Rng&) { return AllocationAction{top, top}; };
    case MaskedPolicyKind::FullConsumption:
      return [](const CommonsObservation&, Rng&) { return AllocationAction{0, 0}; };
    case MaskedPolicyKind::UniformRandom:
      return [action_levels](const CommonsObservation&, Rng& rng) {
        return AllocationAction{rng.uniform_int(action_levels), rng.uniform_int(action_levels)};
      };
  }
  throw std::invalid_argument("unknown masked policy kind");
}

double EpisodeRecord::total_gross_output() const {
  double total = 0.0;
  for (const auto& step : flows) {
    for (const AgentFlows& agent : step) total += agent.gross_output;
  }
  return total;
}

double EpisodeRecord::temperature_rise() const {
  if (states.empty()) return 0.0;
  return states.back().temperature - states.front().temperature;
}

double EpisodeRecord::agent_discounted_utility(int agent, double gamma) const {
  double total = 0.0;
  double weight = 1.0;
  for (const auto& step : flows) {
    total += weight * step[static_cast<std::size_t>(agent)].reward;
    weight *= gamma;
  }
  return total;
}

double EpisodeRecord::agent_total_reward(int agent) const {
  return agent_discounted_utility(agent, 1.0);
}

double EpisodeRecord::total_discounted_utility(double gamma) const {
  double total = 0.0;
  for (std::size_t i = 0; i < (flows.empty() ? 0 : flows.front().size()); ++i) {
    total += agent_discounted_utility(static_cast<int>(i), gamma);
  }
  return total;
}

EpisodeRecord run_policy_profile(const CommonsConfig& config,
                                 const std::vector<CommonsPolicy>& policies, std::uint64_t seed) {
  config.validate();
  if (policies.size() != static_cast<std::size_t>(config.n_agents)) {
    throw std::invalid_argument("got " + std::to_string(policies.size()) + " policies for " +
                                std::to_string(config.n_agents) + " agents");
  }
  EpisodeRecord record;
  record.seed = seed;
  Rng rng(seed);
  CommonsState state = CommonsState::initial(config);
  record.states.push_back(state);
  for (int t = 0; t < config.episode_length; ++t) {
    std::vector<AllocationAction> actions(static_cast<std::size_t>(config.n_agents));
    for (int i = 0; i < config.n_agents; ++i) {
      const CommonsObservation obs{state.capital[static_cast<std::size_t>(i)], state.temperature,
                                   state.t};
      actions[static_cast<std::size_t>(i)] = policies[static_cast<std::size_t>(i)](obs, rng);
    }
    CommonsStepResult step = commons_step(config, state, actions);
    record.actions.push_back(std::move(actions));
    record.flows.push_back(std::move(step.flows));
    state = std::move(step.next);
    record.states.push_back(state);
  }
  return record;
}

std::string episode_csv(const EpisodeRecord& record) {
  std::ostringstream out;
  out << "step,agent,capital,gross_output,savings_rate,mitigation_rate,consumption,emissions,"
         "temperature,reward\n";
  for (int t = 0; t < record.num_steps(); ++t) {
    const CommonsState& state = record.states[static_cast<std::size_t>(t)];
    const auto& step_flows = record.flows[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < step_flows.size(); ++i) {
      const AgentFlows& flows = step_flows[i];
      out << t << ',' << i << ',' << format_double(state.capital[i]) << ','
          << format_double(flows.gross_output) << ',' << format_double(flows.savings_rate) << ','
          << format_double(flows.mitigation_rate) << ',' << format_double(flows.consumption) << ','
          << format_double(flows.emissions) << ',' << format_double(state.temperature) << ','
          << format_double(flows.reward) << '\n';
    }
  }
  return out.str();
}

IndexReferences compute_references(const CommonsConfig& config, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(config.n_agents);
  const std::vector<CommonsPolicy> all_save(
      n, masked_policy(MaskedPolicyKind::NoConsumption, config.action_levels));
  const std::vector<CommonsPolicy> all_consume(
      n, masked_policy(MaskedPolicyKind::FullConsumption, config.action_levels));

  const EpisodeRecord no_consumption = run_policy_profile(config, all_save, seed);
  const EpisodeRecord full_consumption = run_policy_profile(config, all_consume, seed);

  IndexReferences refs;
  refs.gamma = config.gamma;
  refs.output_hi = no_consumption.total_gross_output();
  refs.output_lo = full_consumption.total_gross_output();
  refs.utility_hi = full_consumption.total_discounted_utility(config.gamma);
  refs.utility_lo = no_consumption.total_discounted_utility(config.gamma);
  refs.temperature_rise_ref = full_consumption.temperature_rise();
  return refs;
}

IndexReport compute_indices(const EpisodeRecord& record, const IndexReferences& references) {
  if (!(references.output_hi > references.output_lo)) {
    throw std::invalid_argument("degenerate output reference interval");
  }
  if (!(references.utility_hi > references.utility_lo)) {
    throw std::invalid_argument("degenerate utility reference interval");
  }
  if (!(references.temperature_rise_ref > 0.0)) {
    throw std::invalid_argument("temperature reference rise must be positive");
  }
  IndexReport report;
  report.raw_output = record.total_gross_output();
  report.raw_temperature_rise = record.temperature_rise();
  report.raw_utility = record.total_discounted_utility(references.gamma);
  report.economic = clip01((report.raw_output - references.output_lo) /
                           (references.output_hi - references.output_lo));
  report.climate = clip01(1.0 - report.raw_temperature_rise / references.temperature_rise_ref);
  report.utility = clip01((report.raw_utility - references.utility_lo) /
                          (references.utility_hi - references.utility_lo));
  return report;
}

nlohmann::json to_json(const IndexReport& report) {
  return nlohmann::json{{"economic", report.economic},
                        {"climate", report.climate},
                        {"utility", report.utility},
                        {"raw_output", report.raw_output},
                        {"raw_temperature_rise", report.raw_temperature_rise},
                        {"raw_utility", report.raw_utility}};
}

nlohmann::json to_json(const IndexReferences& references) {
  return nlohmann::json{{"output_hi", references.output_hi},
                        {"output_lo", references.output_lo},
                        {"utility_hi", references.utility_hi},
                        {"utility_lo", references.utility_lo},
                        {"temperature_rise_ref", references.temperature_rise_ref},
                        {"gamma", references.gamma}};
}

CommonsPolicyTable CommonsPolicyTable::zeros(int buckets, int levels) {
  CommonsPolicyTable table;
  table.buckets = buckets;
  table.levels = levels;
  const auto size = static_cast<std::size_t>(buckets) * static_cast<std::size_t>(levels);
  table.savings_logits.assign(size, 0.0);
  table.mitigation_logits.assign(size, 0.0);
  table.values.assign(static_cast<std::size_t>(buckets), 0.0);
  return table;
}

CommonsPolicyTable CommonsPolicyTable::gaussian(int buckets, int levels, double sigma, Rng& rng) {
  CommonsPolicyTable table = zeros(buckets, levels);
  for (double& z : table.savings_logits) z = rng.normal(0.0, sigma);
  for (double& z : table.mitigation_logits) z = rng.normal(0.0, sigma);
  return table;
}

std::vector<double> CommonsPolicyTable::savings_probs(int bucket) const {
  return softmax(&savings_logits[static_cast<std::size_t>(bucket) * levels], levels);
}

std::vector<double> CommonsPolicyTable::mitigation_probs(int bucket) const {
  return softmax(&mitigation_logits[static_cast<std::size_t>(bucket) * levels], levels);
}

AllocationAction sample_action(const CommonsPolicyTable& table, int bucket, Rng& rng) {
  if (bucket < 0 || bucket >= table.buckets) {
    throw std::invalid_argument("bucket " + std::to_string(bucket) + " outside table");
  }
  AllocationAction action;
  action.savings_level = sample_categorical(table.savings_probs(bucket), rng);
  action.mitigation_level = sample_categorical(table.mitigation_probs(bucket), rng);
  return action;
}

std::vector<CommonsPolicy> table_policies(const std::vector<CommonsPolicyTable>& tables,
                                          const CommonsConfig& config) {
  std::vector<CommonsPolicy> policies;
  policies.reserve(tables.size());
  for (const CommonsPolicyTable& table : tables) {
    policies.push_back([table, config](const CommonsObservation& obs, Rng& rng) {
      return sample_action(table, observation_bucket(obs, config), rng);
    });
  }
  return policies;
}

std::vector<CommonsPolicyTable> init_commons_tables(const CommonsConfig& config,
                                                    const TrainConfig& train) {
  std::vector<CommonsPolicyTable> tables;
  tables.reserve(static_cast<std::size_t>(config.n_agents));
  for (int i = 0; i < config.n_agents; ++i) {
    if (const auto* gaussian = std::get_if<GaussianInit>(&train.init)) {
      Rng rng = Rng::derive(train.seed, kInitStreamBase + static_cast<std::uint64_t>(i));
      tables.push_back(CommonsPolicyTable::gaussian(config.num_obs_buckets(),
                                                    config.action_levels, gaussian->sigma, rng));
    } else {
      tables.push_back(CommonsPolicyTable::zeros(config.num_obs_buckets(), config.action_levels));
    }
  }
  return tables;
}

namespace {

struct LoggedStep {
  int bucket;
  AllocationAction action;
};

// Per-head score-function gradient with entropy bonus, accumulated in place.
void accumulate_head_gradient(std::vector<double>& grad, const std::vector<double>& probs,
                              int bucket, int chosen, double advantage, double entropy_coef) {
  const int levels = static_cast<int>(probs.size());
  const std::size_t base = static_cast<std::size_t>(bucket) * static_cast<std::size_t>(levels);
  double entropy = 0.0;
  if (entropy_coef != 0.0) {
    for (const double p : probs) {
      if (p > 0.0) entropy -= p * std::log(p);
    }
  }
  for (int l = 0; l < levels; ++l) {
    const double p = probs[static_cast<std::size_t>(l)];
    double g = advantage * ((l == chosen ? 1.0 : 0.0) - p);
    if (entropy_coef != 0.0 && p > 0.0) {
      g += entropy_coef * (-p * (std::log(p) + entropy));
    }
    grad[base + static_cast<std::size_t>(l)] += g;
  }
}

}  // namespace

std::vector<CommonsPolicyTable> train_subset(const CommonsConfig& config, const TrainConfig& train,
                                             const std::vector<CommonsPolicy>& base_policies,
                                             const std::vector<bool>& learnable,
                                             std::vector<double>* reward_curve) {
  config.validate();
  train.validate();
  const auto n = static_cast<std::size_t>(config.n_agents);
  if (base_policies.size() != n || learnable.size() != n) {
    throw std::invalid_argument("base_policies and learnable must have one entry per agent");
  }
  if (std::none_of(learnable.begin(), learnable.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("at least one agent must be learnable");
  }

  std::vector<CommonsPolicyTable> tables = init_commons_tables(config, train);
  for (std::size_t i = 0; i < n; ++i) {
    if (!learnable[i]) tables[i] = CommonsPolicyTable{};
  }

  struct EpisodeData {
    std::vector<std::vector<LoggedStep>> logs;  // [agent][step], learnable agents only
    std::vector<std::vector<double>> rewards;   // [agent][step]
  };

  for (int u = 0; u < train.total_updates; ++u) {
    std::vector<EpisodeData> batch;
    batch.reserve(static_cast<std::size_t>(train.episodes_per_update));
    for (int e = 0; e < train.episodes_per_update; ++e) {
      EpisodeData data;
      data.logs.resize(n);
      data.rewards.resize(n);
      std::vector<CommonsPolicy> policies(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (learnable[i]) {
          CommonsPolicyTable* table = &tables[i];
          std::vector<LoggedStep>* log = &data.logs[i];
          policies[i] = [table, log, &config](const CommonsObservation& obs, Rng& rng) {
            const int bucket = observation_bucket(obs, config);
            const AllocationAction action = sample_action(*table, bucket, rng);
            log->push_back({bucket, action});
            return action;
          };
        } else {
          policies[i] = base_policies[i];
        }
      }
      const std::uint64_t stream =
          kEpisodeStreamBase +
          static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(train.episodes_per_update) +
          static_cast<std::uint64_t>(e);
      const EpisodeRecord record =
          run_policy_profile(config, policies, derive_seed(train.seed, stream));
      for (std::size_t i = 0; i < n; ++i) {
        if (!learnable[i]) continue;
        data.rewards[i].reserve(record.flows.size());
        for (const auto& step : record.flows) {
          data.rewards[i].push_back(step[i].reward);
        }
      }
      batch.push_back(std::move(data));
    }

    double batch_reward = 0.0;
    int learnable_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!learnable[i]) continue;
      ++learnable_count;
      CommonsPolicyTable& table = tables[i];
      std::vector<double> savings_grad(table.savings_logits.size(), 0.0);
      std::vector<double> mitigation_grad(table.mitigation_logits.size(), 0.0);
      std::vector<double> td_sum(table.values.size(), 0.0);
      std::vector<int> td_count(table.values.size(), 0);

      for (const EpisodeData& data : batch) {
        const auto& log = data.logs[i];
        const auto& rewards = data.rewards[i];
        std::vector<double> returns(rewards.size());
        double ret = 0.0;
        for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
          ret = rewards[static_cast<std::size_t>(t)] + train.gamma * ret;
          returns[static_cast<std::size_t>(t)] = ret;
        }
        for (std::size_t t = 0; t < log.size(); ++t) {
          const int bucket = log[t].bucket;
          const double advantage = returns[t] - table.values[static_cast<std::size_t>(bucket)];
          accumulate_head_gradient(savings_grad, table.savings_probs(bucket), bucket,
                                   log[t].action.savings_level, advantage, train.entropy_coef);
          accumulate_head_gradient(mitigation_grad, table.mitigation_probs(bucket), bucket,
                                   log[t].action.mitigation_level, advantage, train.entropy_coef);
          td_sum[static_cast<std::size_t>(bucket)] += advantage;
          td_count[static_cast<std::size_t>(bucket)] += 1;
        }
        batch_reward += data.rewards[i].empty()
                            ? 0.0
                            : std::accumulate(rewards.begin(), rewards.end(), 0.0);
      }

      const double scale = train.actor_lr / static_cast<double>(train.episodes_per_update);
      for (std::size_t k = 0; k < table.savings_logits.size(); ++k) {
        table.savings_logits[k] += scale * savings_grad[k];
        table.mitigation_logits[k] += scale * mitigation_grad[k];
      }
      for (std::size_t b = 0; b < table.values.size(); ++b) {
        if (td_count[b] > 0) {
          table.values[b] += train.critic_lr * td_sum[b] / static_cast<double>(td_count[b]);
        }
      }
    }

    if (reward_curve != nullptr) {
      reward_curve->push_back(batch_reward / (static_cast<double>(train.episodes_per_update) *
                                              static_cast<double>(learnable_count)));
    }
  }
  return tables;
}

double evaluate_mean_reward(const CommonsConfig& config, const std::vector<CommonsPolicy>& policies,
                            std::uint64_t seed, int episodes) {
  if (episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const EpisodeRecord record =
        run_policy_profile(config, policies, derive_seed(seed, static_cast<std::uint64_t>(e)));
    for (int i = 0; i < config.n_agents; ++i) {
      total += record.agent_total_reward(i);
    }
  }
  return total / (static_cast<double>(episodes) * static_cast<double>(config.n_agents));
}

CommonsTrainResult train_commons(const CommonsConfig& config, const TrainConfig& train,
                                 int eval_episodes) {
  config.validate();
  train.validate();
  if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be at least 1");

  CommonsTrainResult result;
  const IndexReferences refs = compute_references(config, derive_seed(train.seed, kEvalStream));
  const std::uint64_t eval_seed = derive_seed(train.seed, kEvalStream);
  const std::uint64_t index_seed = derive_seed(train.seed, kIndexEpisodeStream);

  const std::vector<CommonsPolicy> before =
      table_policies(init_commons_tables(config, train), config);
  result.eval_reward_before = evaluate_mean_reward(config, before, eval_seed, eval_episodes);
  result.before = compute_indices(run_policy_profile(config, before, index_seed), refs);

  const std::vector<bool> learnable(static_cast<std::size_t>(config.n_agents), true);
  const std::vector<CommonsPolicy> base(static_cast<std::size_t>(config.n_agents));
  result.tables = train_subset(config, train, base, learnable, &result.reward_curve);

  const std::vector<CommonsPolicy> after = table_policies(result.tables, config);
  result.eval_reward_after = evaluate_mean_reward(config, after, eval_seed, eval_episodes);
  result.after = compute_indices(run_policy_profile(config, after, index_seed), refs);
  return result;
}

}  // namespace freerider
