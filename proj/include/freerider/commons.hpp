#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "freerider/a2c.hpp"
#include "freerider/rng.hpp"

#include <json.hpp>

namespace freerider {

// N-agent capital/climate commons. Each agent owns a capital stock, produces
// with it, splits output between consumption, savings, and mitigation, and
// contributes emissions to a shared temperature that damages everyone's
// production. Actions are discretized: level k of `action_levels` maps to the
// rate k / (action_levels - 1), so the top level means "all of it".
struct CommonsConfig {
  int n_agents = 3;
  double productivity = 1.0;          // scale of the production function
  double capital_elasticity = 0.33;   // capital exponent in production
  double depreciation = 0.1;          // capital carried over = (1 - depreciation)
  double emission_intensity = 1.0;    // emissions per unit of unmitigated output
  double temp_sensitivity = 0.001;    // temperature rise per unit of emissions
  double damage_coef = 0.005;         // output divisor grows with temperature^2
  double mitigation_cost_scale = 0.1;
  double mitigation_cost_exponent = 2.0;
  double utility_curvature = 0.5;     // isoelastic utility exponent (eta)
  double gamma = 0.96;                // discount used for utility aggregates
  int action_levels = 10;
  int episode_length = 50;
  double initial_capital = 10.0;
  double initial_temperature = 0.0;

  // Observation discretization for the tabular learner.
  int obs_capital_bins = 8;
  int obs_temperature_bins = 8;
  int obs_time_phases = 4;
  double obs_temperature_span = 1.0;  // temperature range covered by the bins

  void validate() const;  // throws std::invalid_argument
  double level_to_rate(int level) const;
  int num_obs_buckets() const;
};

struct CommonsState {
  std::vector<double> capital;  // one stock per agent
  double temperature = 0.0;
  int t = 0;

  static CommonsState initial(const CommonsConfig& config);
};

// Savings and mitigation levels, both in {0, ..., action_levels - 1}.
struct AllocationAction {
  int savings_level = 0;
  int mitigation_level = 0;
};

// Per-agent realized flows for one step.
struct AgentFlows {
  double gross_output = 0.0;
  double savings_rate = 0.0;
  double mitigation_rate = 0.0;
  double consumption = 0.0;
  double emissions = 0.0;
  double reward = 0.0;
  bool consumption_floored = false;
};

struct CommonsStepResult {
  CommonsState next;
  std::vector<AgentFlows> flows;
};

double isoelastic_utility(double consumption, double curvature);

// One synchronous step of the commons dynamics. Throws on bad action levels
// or an action count that does not match n_agents. Deterministic.
CommonsStepResult commons_step(const CommonsConfig& config, const CommonsState& state,
                               const std::vector<AllocationAction>& actions);

// What one agent observes: its own capital plus the shared variables.
struct CommonsObservation {
  double capital = 0.0;
  double temperature = 0.0;
  int t = 0;
};

// Bucket index for the tabular learner: log-spaced capital bins around the
// initial stock, linear temperature bins, coarse episode phase.
int observation_bucket(const CommonsObservation& obs, const CommonsConfig& config);

using CommonsPolicy = std::function<AllocationAction(const CommonsObservation&, Rng&)>;

enum class MaskedPolicyKind { NoConsumption, FullConsumption, UniformRandom };

MaskedPolicyKind masked_policy_kind_from_string(const std::string& name);
std::string to_string(MaskedPolicyKind kind);

// no_consumption: maximum savings and mitigation (nothing left to consume).
// full_consumption: zero savings and mitigation. uniform_random: both levels
// uniform over {0, ..., action_levels - 1}.
CommonsPolicy masked_policy(MaskedPolicyKind kind, int action_levels);

struct EpisodeRecord {
  std::vector<CommonsState> states;           // length episode_length + 1
  std::vector<std::vector<AllocationAction>> actions;  // [step][agent]
  std::vector<std::vector<AgentFlows>> flows;          // [step][agent]
  std::uint64_t seed = 0;

  int num_steps() const { return static_cast<int>(flows.size()); }
  double total_gross_output() const;
  double temperature_rise() const;
  // Discounted utility summed over agents and steps.
  double total_discounted_utility(double gamma) const;
  double agent_discounted_utility(int agent, double gamma) const;
  double agent_total_reward(int agent) const;
};

// Rolls one episode with per-agent policies (agents queried in index order
// each step, all from the same stream). Deterministic given the seed.
EpisodeRecord run_policy_profile(const CommonsConfig& config,
                                 const std::vector<CommonsPolicy>& policies, std::uint64_t seed);

// CSV schema: step,agent,capital,gross_output,savings_rate,mitigation_rate,
// consumption,emissions,temperature,reward. Capital and temperature are the
// values the step started from.
std::string episode_csv(const EpisodeRecord& record);

// Reference scales for the normalized indices, taken from the two masked
// extremes: no_consumption maximizes output and minimizes utility,
// full_consumption the reverse, and also fixes the no-mitigation temperature
// rise used as the climate yardstick.
struct IndexReferences {
  double output_hi = 0.0;
  double output_lo = 0.0;
  double utility_hi = 0.0;
  double utility_lo = 0.0;
  double temperature_rise_ref = 0.0;
  double gamma = 0.0;  // discount the utility references were computed with
};

IndexReferences compute_references(const CommonsConfig& config, std::uint64_t seed);

struct IndexReport {
  double economic = 0.0;   // normalized total gross output
  double climate = 0.0;    // 1 - temperature rise / reference rise
  double utility = 0.0;    // normalized total discounted utility
  double raw_output = 0.0;
  double raw_temperature_rise = 0.0;
  double raw_utility = 0.0;
};

// All three indices are clipped to [0, 1]. Throws when a reference interval
// is degenerate (hi <= lo, or a non-positive temperature reference).
IndexReport compute_indices(const EpisodeRecord& record, const IndexReferences& references);

nlohmann::json to_json(const IndexReport& report);
nlohmann::json to_json(const IndexReferences& references);

// Tabular policy for the commons learner: independent softmax heads for the
// savings and mitigation levels per observation bucket, plus a bucket-indexed
// critic.
struct CommonsPolicyTable {
  int buckets = 0;
  int levels = 0;
  std::vector<double> savings_logits;     // buckets x levels, row-major
  std::vector<double> mitigation_logits;  // buckets x levels, row-major
  std::vector<double> values;             // buckets

  static CommonsPolicyTable zeros(int buckets, int levels);
  static CommonsPolicyTable gaussian(int buckets, int levels, double sigma, Rng& rng);
  std::vector<double> savings_probs(int bucket) const;
  std::vector<double> mitigation_probs(int bucket) const;
};

AllocationAction sample_action(const CommonsPolicyTable& table, int bucket, Rng& rng);

// Wraps tables as CommonsPolicy callables (one per agent).
std::vector<CommonsPolicy> table_policies(const std::vector<CommonsPolicyTable>& tables,
                                          const CommonsConfig& config);

struct CommonsTrainResult {
  std::vector<CommonsPolicyTable> tables;
  std::vector<double> reward_curve;  // per update: batch mean episode reward per agent
  IndexReport before;
  IndexReport after;
  double eval_reward_before = 0.0;
  double eval_reward_after = 0.0;
};

// Trains all agents with the same actor-critic scheme as the matrix-game
// learner (gamma, learning rates, entropy bonus, batch size, seed, and init
// are read from `train`; the horizon field is ignored because episodes have
// the configured fixed length).
CommonsTrainResult train_commons(const CommonsConfig& config, const TrainConfig& train,
                                 int eval_episodes = 64);

// Mean undiscounted episode reward per agent under the given policies.
double evaluate_mean_reward(const CommonsConfig& config, const std::vector<CommonsPolicy>& policies,
                            std::uint64_t seed, int episodes);

// Fresh learner tables per agent from train.init (agents get independent
// Gaussian draws; zeros init is agent-independent).
std::vector<CommonsPolicyTable> init_commons_tables(const CommonsConfig& config,
                                                    const TrainConfig& train);

// Shared training core: only agents flagged learnable are trained, the rest
// follow their entry in base_policies (learnable slots of base_policies are
// ignored and may be empty). Returns tables indexed by agent; non-learnable
// slots hold empty tables. reward_curve, when given, receives the batch mean
// episode reward per learnable agent for each update.
std::vector<CommonsPolicyTable> train_subset(const CommonsConfig& config, const TrainConfig& train,
                                             const std::vector<CommonsPolicy>& base_policies,
                                             const std::vector<bool>& learnable,
                                             std::vector<double>* reward_curve);

}  // namespace freerider
