#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "frd/cartpole.hpp"

using namespace frd;

namespace {

// Independent transcription of the cart-pole equations of motion, kept apart
// from the implementation on purpose. State components are held as float
// between steps, matching the observation type.
struct OracleState {
  float x, v, th, w;
};

OracleState oracle_euler_step(const EnvConfig& c, OracleState s, double force) {
  const double m_total = c.cart_mass + c.pole_mass;
  const double ml = c.pole_mass * c.pole_half_length;
  const double sin_t = std::sin((double)s.th);
  const double cos_t = std::cos((double)s.th);
  const double tmp = (force + ml * (double)s.w * (double)s.w * sin_t) / m_total;
  const double alpha = (c.gravity * sin_t - cos_t * tmp) /
                       (c.pole_half_length *
                        (4.0 / 3.0 - c.pole_mass * cos_t * cos_t / m_total));
  const double a = tmp - ml * alpha * cos_t / m_total;
  OracleState n;
  n.x = (float)((double)s.x + c.time_step * (double)s.v);
  n.v = (float)((double)s.v + c.time_step * a);
  n.th = (float)((double)s.th + c.time_step * (double)s.w);
  n.w = (float)((double)s.w + c.time_step * alpha);
  return n;
}

PolicyPair uniform_policy(const EnvState&) { return {0.5f, 0.5f}; }

}  // namespace

TEST_CASE("reset is deterministic per seed") {
  CartpoleEnv env;
  const EnvState a = env.reset(42);
  const EnvState b = env.reset(42);
  CHECK(a == b);
  const EnvState c = env.reset(43);
  CHECK(a != c);
}

TEST_CASE("reset with zero noise width gives the zero state") {
  EnvConfig cfg;
  cfg.init_noise_half_width = 0.0;
  CartpoleEnv env(cfg);
  CHECK(env.reset(123) == EnvState{0.0f, 0.0f, 0.0f, 0.0f});
}

TEST_CASE("reset components stay within the noise half width") {
  CartpoleEnv env;
  for (std::uint64_t seed = 7; seed < 1007; ++seed) {
    const EnvState s = env.reset(seed);
    for (float c : s.as_array()) {
      CHECK(c >= -0.05f);
      CHECK(c <= 0.05f);
    }
  }
}

TEST_CASE("first step from the zero state: cart velocity and mirror symmetry") {
  EnvConfig cfg;
  CartpoleEnv env(cfg);
  env.set_state({});
  const EnvState right = env.step(Action::Right).next_state;
  env.set_state({});
  const EnvState left = env.step(Action::Left).next_state;

  // Dominant term of the first velocity update, before pole reaction.
  const double base = cfg.force_magnitude * cfg.time_step / (cfg.cart_mass + cfg.pole_mass);
  CHECK(std::abs(right.cart_velocity) ==
        doctest::Approx(base).epsilon(0.15));

  CHECK(right.cart_position == -left.cart_position);
  CHECK(right.cart_velocity == -left.cart_velocity);
  CHECK(right.pole_angle == -left.pole_angle);
  CHECK(right.pole_angular_velocity == -left.pole_angular_velocity);
}

TEST_CASE("dynamics match an independent Euler oracle over 50 steps") {
  EnvConfig cfg;
  EnvState s{};
  OracleState o{0.0f, 0.0f, 0.0f, 0.0f};
  for (int i = 0; i < 50; ++i) {
    s = dynamics_step(cfg, s, Action::Right);
    o = oracle_euler_step(cfg, o, cfg.force_magnitude);
    CHECK(std::abs(s.cart_position - o.x) <= 1e-6);
    CHECK(std::abs(s.cart_velocity - o.v) <= 1e-6);
    CHECK(std::abs(s.pole_angle - o.th) <= 1e-6);
    CHECK(std::abs(s.pole_angular_velocity - o.w) <= 1e-6);
  }
}

TEST_CASE("pole past the angle limit terminates with PoleFell") {
  EnvConfig cfg;
  CartpoleEnv env(cfg);
  EnvState s{};
  s.pole_angle = static_cast<float>(cfg.angle_limit) + 1e-4f;
  env.set_state(s);
  const StepOutcome out = env.step(Action::Left);
  CHECK(out.terminated);
  CHECK(out.cause == TerminationCause::PoleFell);
  CHECK_THROWS_AS(env.step(Action::Left), std::logic_error);
}

TEST_CASE("cart past the position limit terminates with CartOutOfRange") {
  EnvConfig cfg;
  CartpoleEnv env(cfg);
  EnvState s{};
  s.cart_position = static_cast<float>(cfg.position_limit) + 0.01f;
  env.set_state(s);
  const StepOutcome out = env.step(Action::Left);
  CHECK(out.terminated);
  CHECK(out.cause == TerminationCause::CartOutOfRange);
}

TEST_CASE("zero force and zero state stay exactly at rest") {
  EnvConfig cfg;
  cfg.force_magnitude = 0.0;
  cfg.init_noise_half_width = 0.0;
  CartpoleEnv env(cfg);
  env.reset(1);
  for (int i = 0; i < 100; ++i) {
    const StepOutcome out = env.step(i % 2 == 0 ? Action::Left : Action::Right);
    CHECK(out.next_state == EnvState{0.0f, 0.0f, 0.0f, 0.0f});
    if (out.terminated) {
      CHECK(out.cause == TerminationCause::MaxScore);
      break;
    }
  }
}

TEST_CASE("identical seed and action sequence give a bitwise identical trajectory") {
  EnvConfig cfg;
  auto play = [&cfg] {
    CartpoleEnv env(cfg);
    env.reset(77);
    Rng rng(5);
    std::vector<EnvState> states;
    while (env.live()) {
      const Action a = uniform01(rng) < 0.5 ? Action::Left : Action::Right;
      states.push_back(env.step(a).next_state);
    }
    return states;
  };
  CHECK(play() == play());
}

TEST_CASE("episodes end by exactly one of the three causes") {
  EnvConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const EpisodeResult r = run_episode(cfg, uniform_policy, seed);
    CHECK((r.cause == TerminationCause::PoleFell ||
           r.cause == TerminationCause::CartOutOfRange ||
           r.cause == TerminationCause::MaxScore));
    CHECK(r.score == (int)r.trajectory.size());
    CHECK(r.score <= cfg.max_steps);
  }
}

TEST_CASE("uniform random play: median score lands in the usual band") {
  EnvConfig cfg;
  std::vector<int> scores;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    scores.push_back(run_episode(cfg, uniform_policy, seed).score);
  std::sort(scores.begin(), scores.end());
  const int median = scores[scores.size() / 2];
  CHECK(median >= 15);
  CHECK(median <= 40);
}

TEST_CASE("always-Left play ends early") {
  EnvConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EpisodeResult r =
        run_episode(cfg, [](const EnvState&) { return PolicyPair{1.0f, 0.0f}; }, seed);
    CHECK(r.score < 200);
    CHECK((r.cause == TerminationCause::PoleFell ||
           r.cause == TerminationCause::CartOutOfRange));
  }
}

TEST_CASE("a 500-step episode reports MaxScore") {
  // Alternating forces around zero keep the pole up long enough only with a
  // balanced controller; instead check the cause wiring directly.
  EnvConfig cfg;
  cfg.init_noise_half_width = 0.0;
  cfg.force_magnitude = 0.0;
  const EpisodeResult r = run_episode(cfg, uniform_policy, 3);
  CHECK(r.score == 500);
  CHECK(r.cause == TerminationCause::MaxScore);
}

TEST_CASE("config validation rejects nonsense") {
  EnvConfig cfg;
  cfg.time_step = 0.0;
  CHECK_THROWS_AS(CartpoleEnv{cfg}, std::invalid_argument);
  cfg = {};
  cfg.max_steps = 0;
  CHECK_THROWS_AS(CartpoleEnv{cfg}, std::invalid_argument);
}
