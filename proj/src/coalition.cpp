#include "freerider/coalition.hpp"

#include <algorithm>
#include <stdexcept>

#include "freerider/rng.hpp"

namespace freerider {
namespace {

constexpr std::uint64_t kMemberStream = 7000;
constexpr std::uint64_t kEvalStream = 7100;
constexpr std::uint64_t kTrainStream = 7200;

std::vector<int> sample_members(int n_agents, const CoalitionSizeSpec& sizes, Rng& rng) {
  int size = 0;
  if (sizes.kind == CoalitionSizeSpec::Kind::Fixed) {
    size = sizes.fixed_size;
  } else {
    size = 1 + rng.uniform_int(n_agents - 1);  // uniform over {1, ..., n-1}
  }
  if (size < 1 || size >= n_agents) {
    throw std::invalid_argument("coalition size must lie in [1, n_agents - 1], got " +
                                std::to_string(size));
  }
  // Partial Fisher-Yates over the agent ids.
  std::vector<int> ids(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) ids[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < size; ++i) {
    const int j = i + rng.uniform_int(n_agents - i);
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }
  std::vector<int> members(ids.begin(), ids.begin() + size);
  std::sort(members.begin(), members.end());
  return members;
}

// Mean discounted utility per member over evaluation episodes.
std::vector<double> member_values(const CommonsConfig& config,
                                  const std::vector<CommonsPolicy>& policies,
                                  const std::vector<int>& members, std::uint64_t seed,
                                  int episodes, double gamma) {
  std::vector<double> values(members.size(), 0.0);
  for (int e = 0; e < episodes; ++e) {
    const EpisodeRecord record =
        run_policy_profile(config, policies, derive_seed(seed, static_cast<std::uint64_t>(e)));
    for (std::size_t m = 0; m < members.size(); ++m) {
      values[m] += record.agent_discounted_utility(members[m], gamma);
    }
  }
  for (double& v : values) v /= static_cast<double>(episodes);
  return values;
}

}  // namespace

int CoalitionAuditReport::samples_with_group_deviation() const {
  int count = 0;
  for (const CoalitionSample& sample : samples) {
    if (sample.every_member_improves) ++count;
  }
  return count;
}

CoalitionAuditReport coalition_audit(const CommonsConfig& config,
                                     const std::vector<CommonsPolicy>& fixed_policies,
                                     const CoalitionSizeSpec& sizes, int num_samples,
                                     const TrainConfig& train, std::uint64_t seed,
                                     int eval_episodes, double improvement_threshold) {
  config.validate();
  train.validate();
  if (config.n_agents < 2) {
    throw std::invalid_argument("coalition audit needs at least 2 agents");
  }
  if (num_samples < 1) {
    throw std::invalid_argument("num_samples must be at least 1, got " +
                                std::to_string(num_samples));
  }
  if (eval_episodes < 1) {
    throw std::invalid_argument("eval_episodes must be at least 1");
  }
  if (fixed_policies.size() != static_cast<std::size_t>(config.n_agents)) {
    throw std::invalid_argument("fixed_policies must have one entry per agent");
  }

  CoalitionAuditReport report;
  report.n_agents = config.n_agents;
  report.requested_samples = num_samples;
  report.improvement_threshold = improvement_threshold;

  Rng member_rng = Rng::derive(seed, kMemberStream);
  for (int k = 0; k < num_samples; ++k) {
    CoalitionSample sample;
    sample.members = sample_members(config.n_agents, sizes, member_rng);

    const std::uint64_t eval_seed = derive_seed(seed, kEvalStream + static_cast<std::uint64_t>(k));
    const std::vector<double> pre = member_values(config, fixed_policies, sample.members,
                                                  eval_seed, eval_episodes, config.gamma);

    std::vector<bool> learnable(static_cast<std::size_t>(config.n_agents), false);
    for (const int agent : sample.members) learnable[static_cast<std::size_t>(agent)] = true;
    TrainConfig member_train = train;
    member_train.seed = derive_seed(seed, kTrainStream + static_cast<std::uint64_t>(k));
    const std::vector<CommonsPolicyTable> tables =
        train_subset(config, member_train, fixed_policies, learnable, nullptr);

    std::vector<CommonsPolicy> post_policies = fixed_policies;
    for (const int agent : sample.members) {
      const auto i = static_cast<std::size_t>(agent);
      const CommonsPolicyTable table = tables[i];
      const CommonsConfig cfg = config;
      post_policies[i] = [table, cfg](const CommonsObservation& obs, Rng& rng) {
        return sample_action(table, observation_bucket(obs, cfg), rng);
      };
    }
    const std::vector<double> post = member_values(config, post_policies, sample.members,
                                                   eval_seed, eval_episodes, config.gamma);

    sample.every_member_improves = true;
    for (std::size_t m = 0; m < sample.members.size(); ++m) {
      CoalitionMemberOutcome outcome;
      outcome.agent = sample.members[m];
      outcome.pre_value = pre[m];
      outcome.post_value = post[m];
      outcome.improvement = post[m] - pre[m];
      sample.pre_total += outcome.pre_value;
      sample.post_total += outcome.post_value;
      if (!(outcome.improvement > improvement_threshold)) {
        sample.every_member_improves = false;
      }
      sample.outcomes.push_back(outcome);
    }
    sample.total_improvement = sample.post_total - sample.pre_total;
    sample.total_improves = sample.total_improvement > improvement_threshold;
    report.samples.push_back(std::move(sample));
  }
  return report;
}

nlohmann::json to_json(const CoalitionAuditReport& report) {
  nlohmann::json out;
  out["n_agents"] = report.n_agents;
  out["requested_samples"] = report.requested_samples;
  out["improvement_threshold"] = report.improvement_threshold;
  out["samples_with_group_deviation"] = report.samples_with_group_deviation();
  nlohmann::json samples = nlohmann::json::array();
  for (const CoalitionSample& sample : report.samples) {
    nlohmann::json entry;
    entry["members"] = sample.members;
    entry["pre_total"] = sample.pre_total;
    entry["post_total"] = sample.post_total;
    entry["total_improvement"] = sample.total_improvement;
    entry["every_member_improves"] = sample.every_member_improves;
    entry["total_improves"] = sample.total_improves;
    nlohmann::json outcomes = nlohmann::json::array();
    for (const CoalitionMemberOutcome& outcome : sample.outcomes) {
      outcomes.push_back({{"agent", outcome.agent},
                          {"pre_value", outcome.pre_value},
                          {"post_value", outcome.post_value},
                          {"improvement", outcome.improvement}});
    }
    entry["member_outcomes"] = outcomes;
    samples.push_back(std::move(entry));
  }
  out["samples"] = samples;
  return out;
}

}  // namespace freerider
