#include "frd/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace frd {

Action sample_action(const PolicyPair& policy, Rng& rng) {
  return uniform01(rng) < policy[0] ? Action::Left : Action::Right;
}

void EnvConfig::validate() const {
  if (!(gravity > 0) || !(cart_mass > 0) || !(pole_mass > 0) ||
      !(pole_half_length > 0) || !(time_step > 0) || !(position_limit > 0) ||
      !(angle_limit > 0)) {
    throw std::invalid_argument("EnvConfig: physical constants must be positive");
  }
  if (force_magnitude < 0) throw std::invalid_argument("EnvConfig: negative force");
  if (init_noise_half_width < 0)
    throw std::invalid_argument("EnvConfig: negative init noise width");
  if (max_steps < 1) throw std::invalid_argument("EnvConfig: max_steps < 1");
}

const char* termination_cause_name(TerminationCause cause) {
  switch (cause) {
    case TerminationCause::None: return "none";
    case TerminationCause::PoleFell: return "pole_fell";
    case TerminationCause::CartOutOfRange: return "cart_out_of_range";
    case TerminationCause::MaxScore: return "max_score";
  }
  return "unknown";
}

EnvState dynamics_step(const EnvConfig& cfg, const EnvState& s, Action action) {
  const double force =
      action == Action::Right ? cfg.force_magnitude : -cfg.force_magnitude;
  const double total_mass = cfg.cart_mass + cfg.pole_mass;
  const double pole_mass_length = cfg.pole_mass * cfg.pole_half_length;

  const double x = s.cart_position;
  const double x_dot = s.cart_velocity;
  const double theta = s.pole_angle;
  const double theta_dot = s.pole_angular_velocity;

  const double cos_theta = std::cos(theta);
  const double sin_theta = std::sin(theta);

  const double temp =
      (force + pole_mass_length * theta_dot * theta_dot * sin_theta) / total_mass;
  const double theta_acc =
      (cfg.gravity * sin_theta - cos_theta * temp) /
      (cfg.pole_half_length *
       (4.0 / 3.0 - cfg.pole_mass * cos_theta * cos_theta / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_theta / total_mass;

  EnvState next;
  next.cart_position = static_cast<float>(x + cfg.time_step * x_dot);
  next.cart_velocity = static_cast<float>(x_dot + cfg.time_step * x_acc);
  next.pole_angle = static_cast<float>(theta + cfg.time_step * theta_dot);
  next.pole_angular_velocity =
      static_cast<float>(theta_dot + cfg.time_step * theta_acc);
  return next;
}

CartpoleEnv::CartpoleEnv(EnvConfig cfg) : cfg_(cfg) { cfg_.validate(); }

EnvState CartpoleEnv::reset(std::uint64_t seed) {
  Rng rng(mix_seed(seed));
  const double w = cfg_.init_noise_half_width;
  state_.cart_position = static_cast<float>(uniform(rng, -w, w));
  state_.cart_velocity = static_cast<float>(uniform(rng, -w, w));
  state_.pole_angle = static_cast<float>(uniform(rng, -w, w));
  state_.pole_angular_velocity = static_cast<float>(uniform(rng, -w, w));
  steps_ = 0;
  live_ = true;
  cause_ = TerminationCause::None;
  return state_;
}

void CartpoleEnv::set_state(const EnvState& s) {
  state_ = s;
  live_ = true;
  cause_ = TerminationCause::None;
}

StepOutcome CartpoleEnv::step(Action action) {
  if (!live_) throw std::logic_error("CartpoleEnv::step: episode is not live");

  state_ = dynamics_step(cfg_, state_, action);
  ++steps_;

  StepOutcome out;
  out.next_state = state_;
  out.reward = 1.0f;

  if (steps_ >= cfg_.max_steps) {
    out.cause = TerminationCause::MaxScore;
  } else if (std::abs(static_cast<double>(state_.pole_angle)) > cfg_.angle_limit) {
    out.cause = TerminationCause::PoleFell;
  } else if (std::abs(static_cast<double>(state_.cart_position)) >
             cfg_.position_limit) {
    out.cause = TerminationCause::CartOutOfRange;
  }

  out.terminated = out.cause != TerminationCause::None;
  if (out.terminated) {
    live_ = false;
    cause_ = out.cause;
  }
  return out;
}

EpisodeResult run_episode(const EnvConfig& cfg, const PolicyFn& policy,
                          std::uint64_t seed) {
  CartpoleEnv env(cfg);
  EnvState state = env.reset(seed);
  Rng action_rng(mix_seed(seed ^ 0xc2b2ae3d27d4eb4full));

  EpisodeResult result;
  while (env.live()) {
    const PolicyPair dist = policy(state);
    const Action action = sample_action(dist, action_rng);
    const StepOutcome out = env.step(action);
    result.trajectory.push_back({state, dist, action, out.reward});
    state = out.next_state;
    if (out.terminated) result.cause = out.cause;
  }
  result.score = static_cast<int>(result.trajectory.size());
  return result;
}

}  // namespace frd
