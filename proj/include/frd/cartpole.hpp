#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "frd/rng.hpp"

namespace frd {

enum class Action : int { Left = 0, Right = 1 };

// Action distribution (p_left, p_right); sums to 1.
using PolicyPair = std::array<float, 2>;

Action sample_action(const PolicyPair& policy, Rng& rng);

struct EnvState {
  float cart_position = 0.0f;          // m
  float cart_velocity = 0.0f;          // m/s
  float pole_angle = 0.0f;             // rad
  float pole_angular_velocity = 0.0f;  // rad/s

  std::array<float, 4> as_array() const {
    return {cart_position, cart_velocity, pole_angle, pole_angular_velocity};
  }
  bool operator==(const EnvState&) const = default;
};

struct EnvConfig {
  double gravity = 9.8;             // m/s^2
  double cart_mass = 1.0;           // kg
  double pole_mass = 0.1;           // kg
  double pole_half_length = 0.5;    // m
  double force_magnitude = 10.0;    // N
  double time_step = 0.02;          // s
  double position_limit = 2.4;      // m
  double angle_limit = 12.0 * std::numbers::pi / 180.0;  // rad
  int max_steps = 500;
  double init_noise_half_width = 0.05;

  void validate() const;  // throws std::invalid_argument
};

enum class TerminationCause { None, PoleFell, CartOutOfRange, MaxScore };

const char* termination_cause_name(TerminationCause cause);

struct StepOutcome {
  EnvState next_state;
  float reward = 0.0f;  // +1 per live step
  bool terminated = false;
  TerminationCause cause = TerminationCause::None;
};

// One explicit-Euler step of the cart-pole equations of motion. Pure
// dynamics; termination bookkeeping lives in CartpoleEnv.
EnvState dynamics_step(const EnvConfig& cfg, const EnvState& s, Action action);

class CartpoleEnv {
 public:
  explicit CartpoleEnv(EnvConfig cfg = {});

  // Starts a new episode with every component ~ U[-w, +w],
  // w = init_noise_half_width. Same seed, same state.
  EnvState reset(std::uint64_t seed);

  // Installs an arbitrary live state (testing hook); keeps the step count.
  void set_state(const EnvState& s);

  // Advances one step. Throws std::logic_error if the episode is over.
  StepOutcome step(Action action);

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  int steps_taken() const { return steps_; }
  bool live() const { return live_; }
  TerminationCause cause() const { return cause_; }

 private:
  EnvConfig cfg_;
  EnvState state_{};
  int steps_ = 0;
  bool live_ = false;
  TerminationCause cause_ = TerminationCause::None;
};

using PolicyFn = std::function<PolicyPair(const EnvState&)>;

struct TrajectoryStep {
  EnvState state;
  PolicyPair policy;  // distribution the action was sampled from
  Action action;
  float reward;
};

struct EpisodeResult {
  int score = 0;  // steps survived, == trajectory.size()
  std::vector<TrajectoryStep> trajectory;
  TerminationCause cause = TerminationCause::None;
};

// Plays one full episode, sampling each action from policy(state).
EpisodeResult run_episode(const EnvConfig& cfg, const PolicyFn& policy,
                          std::uint64_t seed);

}  // namespace frd
