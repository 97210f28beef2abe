#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "frd/cartpole.hpp"
#include "frd/mlp.hpp"
#include "frd/replay.hpp"
#include "frd/rng.hpp"

namespace frd {

struct A2cConfig {
  int hidden_layers = 2;  // l
  int hidden_width = 24;  // n
  Activation activation = Activation::Tanh;
  double discount = 0.99;
  double policy_lr = 1e-3;
  double value_lr = 5e-3;

  MlpConfig policy_net_config() const;  // 4 -> ... -> 2, Softmax
  MlpConfig value_net_config() const;   // 4 -> ... -> 1, Linear
};

struct A2cAgent {
  A2cConfig config;
  MlpModel policy_net;
  MlpModel value_net;
  ReplayMemory local_rm;
  std::vector<int> episode_scores;
};

A2cAgent make_agent(const A2cConfig& cfg, std::uint64_t seed);

PolicyPair policy_distribution(const A2cAgent& agent, const EnvState& state);
double state_value(const A2cAgent& agent, const EnvState& state);

// Samples an action from the current policy and records the (state, policy)
// pair in the agent's replay memory.
std::pair<Action, PolicyPair> select_action(A2cAgent& agent,
                                            const EnvState& state, Rng& rng);

// G_t = sum_k gamma^k r_{t+k}
std::vector<double> discounted_returns(const std::vector<TrajectoryStep>& trajectory,
                                       double gamma);

struct EpisodeLosses {
  double policy_loss = 0.0;  // -sum_t A_t log pi(a_t | s_t)
  double value_loss = 0.0;   // sum_t (G_t - V(s_t))^2
};

// One gradient step on each net from a full-episode trajectory, with
// advantages A_t = G_t - V(s_t) (V held constant for the policy step).
EpisodeLosses train_on_episode(A2cAgent& agent,
                               const std::vector<TrajectoryStep>& trajectory);

// Plays one episode (env reset seed and action draws both come from `rng`),
// trains on it, records the score. Returns the score.
int run_training_episode(A2cAgent& agent, const EnvConfig& env_cfg, Rng& rng);

struct MissionProgress {
  double rolling_average = 0.0;  // over the 10 latest episodes
  bool complete = false;         // >= 10 episodes played and average >= 490
};

MissionProgress mission_progress(const A2cAgent& agent);

}  // namespace frd
