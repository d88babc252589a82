#pragma once

#include <cstdint>
#include <vector>

#include "freerider/a2c.hpp"
#include "freerider/commons.hpp"

#include <json.hpp>

namespace freerider {

// How coalition sizes are drawn: uniform over {1, ..., n_agents - 1}, or a
// single fixed size in that range.
struct CoalitionSizeSpec {
  enum class Kind { Uniform, Fixed };
  Kind kind = Kind::Uniform;
  int fixed_size = 1;

  static CoalitionSizeSpec uniform() { return {Kind::Uniform, 1}; }
  static CoalitionSizeSpec fixed(int size) { return {Kind::Fixed, size}; }
};

struct CoalitionMemberOutcome {
  int agent = 0;
  double pre_value = 0.0;   // discounted utility under the fixed profile
  double post_value = 0.0;  // discounted utility after the coalition retrains
  double improvement = 0.0;
};

struct CoalitionSample {
  std::vector<int> members;  // sorted agent ids, non-empty proper subset
  std::vector<CoalitionMemberOutcome> outcomes;
  double pre_total = 0.0;
  double post_total = 0.0;
  double total_improvement = 0.0;
  bool every_member_improves = false;
  bool total_improves = false;
};

struct CoalitionAuditReport {
  int n_agents = 0;
  int requested_samples = 0;
  double improvement_threshold = 0.0;
  std::vector<CoalitionSample> samples;

  int samples_with_group_deviation() const;
};

// Group-deviation audit of a fixed commons profile: sampled non-empty proper
// subsets of agents jointly retrain against the frozen outsiders, and each
// member's discounted utility is compared before and after. num_samples must
// be at least 1. A singleton coalition reduces to the single-agent
// retraining audit.
CoalitionAuditReport coalition_audit(const CommonsConfig& config,
                                     const std::vector<CommonsPolicy>& fixed_policies,
                                     const CoalitionSizeSpec& sizes, int num_samples,
                                     const TrainConfig& train, std::uint64_t seed,
                                     int eval_episodes = 32,
                                     double improvement_threshold = 1e-3);

nlohmann::json to_json(const CoalitionAuditReport& report);

}  // namespace freerider
