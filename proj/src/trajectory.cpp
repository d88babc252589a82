#include "freerider/trajectory.hpp"

#include <sstream>
#include <stdexcept>

#include "freerider/io.hpp"

namespace freerider {

Trajectory rollout(const MatrixGame& game, const MemoryOnePolicy& policy1,
                   const MemoryOnePolicy& policy2, const HorizonModel& horizon,
                   std::uint64_t seed) {
  Rng rng(seed);
  const int length = sample_horizon(horizon, rng);

  Trajectory traj;
  traj.seed = seed;
  traj.steps.reserve(static_cast<std::size_t>(length));

  GameState state = GameState::Start;
  for (int t = 0; t < length; ++t) {
    const Action a1 = rng.bernoulli(policy1[state]) ? Action::Defect : Action::Cooperate;
    const Action a2 = rng.bernoulli(policy2[state]) ? Action::Defect : Action::Cooperate;
    const StepResult res = step(game, state, a1, a2);
    traj.steps.push_back({state, a1, a2, res.reward1, res.reward2});
    state = res.next_state;
  }
  return traj;
}

double episode_return(const Trajectory& traj, int player, double gamma) {
  if (player != 0 && player != 1) throw std::invalid_argument("player must be 0 or 1");
  double total = 0.0;
  double weight = 1.0;
  for (const TimeStep& ts : traj.steps) {
    total += weight * (player == 0 ? ts.reward1 : ts.reward2);
    weight *= gamma;
  }
  return total;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "step,state,action_p1,action_p2,reward_p1,reward_p2\n";
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const TimeStep& ts = traj.steps[t];
    out << t << ',' << to_string(ts.state) << ',' << to_char(ts.action1) << ','
        << to_char(ts.action2) << ',' << format_double(ts.reward1) << ','
        << format_double(ts.reward2) << '\n';
  }
  return out.str();
}

Trajectory trajectory_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const std::size_t c_state = table.column("state");
  const std::size_t c_a1 = table.column("action_p1");
  const std::size_t c_a2 = table.column("action_p2");
  const std::size_t c_r1 = table.column("reward_p1");
  const std::size_t c_r2 = table.column("reward_p2");

  Trajectory traj;
  for (const auto& row : table.rows) {
    TimeStep ts{};
    ts.state = state_from_string(row[c_state]);
    ts.action1 = action_from_char(row[c_a1].at(0));
    ts.action2 = action_from_char(row[c_a2].at(0));
    ts.reward1 = std::stod(row[c_r1]);
    ts.reward2 = std::stod(row[c_r2]);
    traj.steps.push_back(ts);
  }
  return traj;
}

}  // namespace freerider
