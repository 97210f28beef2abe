#include "frd/a2c.hpp"

#include <algorithm>
#include <cmath>

namespace frd {

namespace {
constexpr int kMissionWindow = 10;
constexpr double kMissionScore = 490.0;
}  // namespace

MlpConfig A2cConfig::policy_net_config() const {
  MlpConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_layers = hidden_layers;
  cfg.hidden_width = hidden_width;
  cfg.output_dim = 2;
  cfg.output_head = OutputHead::Softmax;
  cfg.activation = activation;
  return cfg;
}

MlpConfig A2cConfig::value_net_config() const {
  MlpConfig cfg = policy_net_config();
  cfg.output_dim = 1;
  cfg.output_head = OutputHead::Linear;
  return cfg;
}

A2cAgent make_agent(const A2cConfig& cfg, std::uint64_t seed) {
  A2cAgent agent;
  agent.config = cfg;
  agent.policy_net = init_mlp(cfg.policy_net_config(), mix_seed(seed));
  agent.value_net = init_mlp(cfg.value_net_config(), mix_seed(seed ^ 0x51ed270b8a1c6d3bull));
  return agent;
}

PolicyPair policy_distribution(const A2cAgent& agent, const EnvState& state) {
  const auto arr = state.as_array();
  const auto out = forward(agent.policy_net, arr);
  return {static_cast<float>(out[0]), static_cast<float>(out[1])};
}

double state_value(const A2cAgent& agent, const EnvState& state) {
  const auto arr = state.as_array();
  return forward(agent.value_net, arr)[0];
}

std::pair<Action, PolicyPair> select_action(A2cAgent& agent,
                                            const EnvState& state, Rng& rng) {
  const PolicyPair dist = policy_distribution(agent, state);
  const Action action = sample_action(dist, rng);
  agent.local_rm.add(state, dist);
  return {action, dist};
}

std::vector<double> discounted_returns(const std::vector<TrajectoryStep>& trajectory,
                                       double gamma) {
  std::vector<double> returns(trajectory.size());
  double g = 0.0;
  for (std::size_t t = trajectory.size(); t-- > 0;) {
    g = trajectory[t].reward + gamma * g;
    returns[t] = g;
  }
  return returns;
}

EpisodeLosses train_on_episode(A2cAgent& agent,
                               const std::vector<TrajectoryStep>& trajectory) {
  if (trajectory.empty())
    throw std::invalid_argument("train_on_episode: empty trajectory");

  const std::size_t n = trajectory.size();
  const auto returns = discounted_returns(trajectory, agent.config.discount);

  TrainBatch policy_batch;
  policy_batch.kind = LossKind::PolicyGradient;
  TrainBatch value_batch;
  value_batch.kind = LossKind::SquaredError;
  policy_batch.inputs.reserve(n);
  value_batch.inputs.reserve(n);

  for (std::size_t t = 0; t < n; ++t) {
    const auto arr = trajectory[t].state.as_array();
    std::vector<float> input(arr.begin(), arr.end());
    const double advantage = returns[t] - state_value(agent, trajectory[t].state);

    std::vector<float> one_hot(2, 0.0f);
    one_hot[static_cast<int>(trajectory[t].action)] = 1.0f;
    policy_batch.inputs.push_back(input);
    policy_batch.targets.push_back(std::move(one_hot));
    policy_batch.weights.push_back(static_cast<float>(advantage));

    value_batch.inputs.push_back(std::move(input));
    value_batch.targets.push_back({static_cast<float>(returns[t])});
  }

  double policy_mean_loss = 0.0;
  double value_mean_loss = 0.0;
  const MlpGradient policy_grad =
      backward(agent.policy_net, policy_batch, &policy_mean_loss);
  const MlpGradient value_grad =
      backward(agent.value_net, value_batch, &value_mean_loss);
  apply_update(agent.policy_net, policy_grad, agent.config.policy_lr);
  apply_update(agent.value_net, value_grad, agent.config.value_lr);

  return {policy_mean_loss * static_cast<double>(n),
          value_mean_loss * static_cast<double>(n)};
}

int run_training_episode(A2cAgent& agent, const EnvConfig& env_cfg, Rng& rng) {
  CartpoleEnv env(env_cfg);
  EnvState state = env.reset(rng());

  std::vector<TrajectoryStep> trajectory;
  while (env.live()) {
    const auto [action, dist] = select_action(agent, state, rng);
    const StepOutcome out = env.step(action);
    trajectory.push_back({state, dist, action, out.reward});
    state = out.next_state;
  }
  train_on_episode(agent, trajectory);
  const int score = static_cast<int>(trajectory.size());
  agent.episode_scores.push_back(score);
  return score;
}

MissionProgress mission_progress(const A2cAgent& agent) {
  MissionProgress progress;
  const auto& scores = agent.episode_scores;
  if (scores.empty()) return progress;
  const std::size_t window =
      std::min<std::size_t>(scores.size(), kMissionWindow);
  double sum = 0.0;
  for (std::size_t i = scores.size() - window; i < scores.size(); ++i)
    sum += scores[i];
  progress.rolling_average = sum / static_cast<double>(window);
  progress.complete = scores.size() >= kMissionWindow &&
                      progress.rolling_average >= kMissionScore;
  return progress;
}

}  // namespace frd
