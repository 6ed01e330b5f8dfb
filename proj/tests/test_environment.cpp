#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ftfc/environment.hpp"
#include "ftfc/error.hpp"
#include "ftfc/fcs.hpp"
#include "oracles.hpp"

using namespace ftfc;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

EpisodeSpec fixed_spec(std::uint64_t seed = 1, std::string_view scenario = "nominal") {
  EpisodeSpec s;
  s.scenario = build_scenario(scenario);
  s.seed = seed;
  s.initial = TrimTarget{10000.0, 300.0, 0.5};
  return s;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_SUITE("environment") {

TEST_CASE("reward terms vanish at the origin") {
  const RewardConfig c;
  CHECK(tracking_reward(0.0, 1.0, 60.0) == 0.0);
  CHECK(attitude_reward(0.0, 0.0, 0.0, 0.0, c) == 0.0);
  CHECK(control_reward({0.0, 0.0, 0.0, 0.0}, c) == 0.0);
  CHECK(total_reward({}, c) == 0.0);
  CHECK(total_reward({-1.0, -1.0, -1.0, -1.0, -1.0}, c) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(total_reward({-0.5, 0.0, 0.0, 0.0, 0.0}, c) == doctest::Approx(-0.12).epsilon(1e-15));
}

TEST_CASE("total reward is the weighted sum with the published weights") {
  const RewardConfig c;
  const std::array<double, 5> lambda{0.24, 0.2, 0.16, 0.2, 0.2};
  CHECK(c.weights == lambda);
  for (int i = 0; i < 5; ++i) {
    std::array<double, 5> v{};
    v[i] = -1.0;
    const RewardComponents r{v[0], v[1], v[2], v[3], v[4]};
    CHECK(total_reward(r, c) == -lambda[i]);
  }
}

TEST_CASE("reward terms match their definitions") {
  const RewardConfig c;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double e = 200.0 * n(rng);
    CHECK(tracking_reward(e, 1.0, 60.0) == doctest::Approx(oracle::tracking(e, 1.0, 60.0)).epsilon(1e-14));
    const double p = n(rng), q = n(rng), r = n(rng), phi = n(rng);
    const double att = oracle::geometric_penalty({oracle::kernel(p, c.rate_scale_p), oracle::kernel(q, c.rate_scale_q),
                                                  oracle::kernel(r, c.rate_scale_r), oracle::kernel(phi, c.roll_scale)});
    CHECK(attitude_reward(p, q, r, phi, c) == doctest::Approx(att).epsilon(1e-12));
    const std::array<double, 4> d{0.1 * n(rng), 0.1 * n(rng), 0.1 * n(rng), 0.1 * n(rng)};
    const double ctl = oracle::geometric_penalty({oracle::kernel(d[0], 0.1), oracle::kernel(d[1], 0.1),
                                                  oracle::kernel(d[2], 0.1), oracle::kernel(d[3], 0.1)});
    CHECK(control_reward(d, c) == doctest::Approx(ctl).epsilon(1e-12));
  }
}

TEST_CASE("total reward stays in [-1, 0] for random observations and actions") {
  const RewardConfig c;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    Observation o;
    for (double& x : o.raw) x = 1e3 * u(rng) * u(rng) * u(rng);
    const ControlInputs a{u(rng), u(rng), u(rng), 0.5 + 0.5 * u(rng)};
    const ControlInputs b{u(rng), u(rng), u(rng), 0.5 + 0.5 * u(rng)};
    const double r = total_reward(reward_components(o, a, b, c), c);
    REQUIRE(r <= 0.0);
    REQUIRE(r >= -1.0);
  }
}

TEST_CASE("reward falls strictly as altitude error grows") {
  const RewardConfig c;
  Observation o;
  double previous = 1.0;
  for (double e = 0.0; e < 600.0; e += 5.0) {
    o[ObsChannel::kErrorAltitude] = -e;
    const double r = total_reward(reward_components(o, {}, {}, c), c);
    CHECK(r < previous);
    previous = r;
  }
}

TEST_CASE("observation normalization is a bijection on the documented ranges") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto scaling = observation_scaling();
  for (int i = 0; i < 10000; ++i) {
    Observation o;
    for (std::size_t k = 0; k < kObservationSize; ++k) o.raw[k] = scaling[k].center + u(rng) * scaling[k].half_range;
    const Observation back = Observation::denormalize(o.normalized());
    for (std::size_t k = 0; k < kObservationSize; ++k) {
      REQUIRE(std::abs(back.raw[k] - o.raw[k]) <= 1e-12 * std::max(1.0, std::abs(o.raw[k])));
    }
  }
  Observation far;
  far.raw.fill(1e9);
  for (double x : far.normalized()) CHECK(x == 1.0);
}

TEST_CASE("heading error wraps the short way round") {
  Environment env;
  EpisodeSpec s = fixed_spec();
  s.initial = TrimTarget{10000.0, 300.0, 179.0 * kDeg};
  SetpointSchedule sched;
  sched.changes = {{0, {10000.0, -179.0 * kDeg, 300.0}}};
  s.schedule = sched;
  const Observation o = env.reset(s);
  // reference minus measured: -179 - 179 = -358 deg, i.e. +2 deg
  CHECK(o[ObsChannel::kErrorHeading] == doctest::Approx(2.0 * kDeg).epsilon(1e-9));
}

TEST_CASE("initial tracking errors are zero and the first action change is measured from trim") {
  Environment env;
  EpisodeSpec s = fixed_spec();
  SetpointSchedule sched;
  sched.changes = {{0, {10000.0, 0.5, 300.0}}};
  s.schedule = sched;
  const Observation o = env.reset(s);
  CHECK(o[ObsChannel::kErrorAltitude] == 0.0);
  CHECK(o[ObsChannel::kErrorHeading] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(o[ObsChannel::kErrorAirspeed]) < 1e-9);
  CHECK(env.previous_action() == env.trim().controls);
  const StepResult r = env.step(env.trim().controls);
  CHECK(r.info.reward_terms.control == 0.0);
  CHECK(r.reward <= 0.0);
  CHECK(r.reward > -0.1);
}

TEST_CASE("step before reset and after termination is a usage error") {
  EnvironmentConfig cfg;
  cfg.horizon = 5;
  cfg.fault_trigger_step = 0;
  Environment env(default_airframe(), cfg);
  CHECK(kind_of([&] { env.step({}); }) == ErrorKind::kUsage);
  EpisodeSpec s = fixed_spec();
  s.scenario.trigger_step = 0;
  env.reset(s);
  StepResult r;
  for (int i = 0; i < 5; ++i) r = env.step(env.trim().controls);
  CHECK(r.terminated);
  CHECK_FALSE(r.crash);
  CHECK(r.info.step == 5);
  CHECK(kind_of([&] { env.step({}); }) == ErrorKind::kUsage);
}

TEST_CASE("crash conditions terminate the episode") {
  SUBCASE("altitude floor") {
    EnvironmentConfig cfg;
    cfg.crash.min_altitude = 10500.0;
    Environment env(default_airframe(), cfg);
    env.reset(fixed_spec());
    const StepResult r = env.step(env.trim().controls);
    CHECK(r.crash);
    CHECK(r.terminated);
    CHECK(r.info.crash_reason == "altitude_floor");
  }
  SUBCASE("load factor") {
    EnvironmentConfig cfg;
    cfg.crash.max_nz = 2.5;
    Environment env(default_airframe(), cfg);
    env.reset(fixed_spec());
    StepResult r;
    ControlInputs pull = env.trim().controls;
    pull.elevator = -1.0;  // full nose-up
    for (int i = 0; i < 200 && !env.terminated(); ++i) r = env.step(pull);
    CHECK(r.crash);
    CHECK(r.info.crash_reason == "load_factor");
  }
  SUBCASE("angular rate") {
    EnvironmentConfig cfg;
    cfg.crash.max_rate = 0.05;
    Environment env(default_airframe(), cfg);
    env.reset(fixed_spec());
    StepResult r;
    for (int i = 0; i < 100 && !env.terminated(); ++i) r = env.step({1.0, 0.0, 0.0, 0.5});
    CHECK(r.crash);
    CHECK(r.info.crash_reason == "angular_rate");
  }
}

TEST_CASE("identical specs and actions give identical trajectories") {
  Environment a, b;
  EpisodeSpec s;
  s.seed = 42;
  s.randomization = RandomizationMode::kMild;
  s.scenario = build_scenario("broken_aileron");
  const Observation oa = a.reset(s), ob = b.reset(s);
  CHECK(oa == ob);
  CHECK(a.randomization_edits() == b.randomization_edits());
  FlightControlSystem fa, fb;
  fa.reset(a.trim().controls, a.trim().theta);
  fb.reset(b.trim().controls, b.trim().theta);
  Observation xa = oa, xb = ob;
  while (!a.terminated()) {
    const StepResult ra = a.step(fa.step(xa, 0.1));
    const StepResult rb = b.step(fb.step(xb, 0.1));
    REQUIRE(ra.observation == rb.observation);
    REQUIRE(ra.reward == rb.reward);
    xa = ra.observation;
    xb = rb.observation;
  }
  CHECK(a.state() == b.state());
}

TEST_CASE("seeds select the initial condition, schedule and randomization") {
  Environment env;
  EpisodeSpec s;
  s.randomization = RandomizationMode::kMild;
  s.seed = 1;
  env.reset(s);
  const auto edits1 = env.randomization_edits();
  const auto sched1 = env.schedule();
  const double h1 = env.state().altitude;
  s.seed = 2;
  env.reset(s);
  CHECK(env.randomization_edits() != edits1);
  CHECK(env.state().altitude != h1);
  CHECK_FALSE(env.schedule() == sched1);

  // A separate randomization seed changes only the parameter draws.
  s.seed = 1;
  s.randomization_seed = 777;
  env.reset(s);
  CHECK(env.randomization_edits() != edits1);
  CHECK(env.randomization_edits().size() == edits1.size());
  CHECK(env.schedule() == sched1);

  const auto& rows = RandomizationSpec::training_ranges().shrunk(kMildRandomizationFraction).rows;
  std::size_t k = 0;
  for (const auto& row : rows) {
    for (std::size_t m = 0; m < row.members.size(); ++m, ++k) {
      CHECK(env.randomization_edits()[k].value >= row.low);
      CHECK(env.randomization_edits()[k].value <= row.high);
    }
  }
}

TEST_CASE("setpoint schedule follows the largest step not after t") {
  SetpointSchedule s;
  s.changes = {{0, {5000, 0.0, 300}}, {200, {6000, 0.2, 310}}, {500, {7000, 0.4, 320}}};
  CHECK(s.active(0).altitude == 5000);
  CHECK(s.active(199).altitude == 5000);
  CHECK(s.active(200).altitude == 6000);
  CHECK(s.active(999).altitude == 7000);
  CHECK_NOTHROW(s.validate({}));
  s.changes[1].step = 0;
  CHECK_THROWS_AS(s.validate({}), Error);
  s.changes[1] = {200, {60000, 0.2, 310}};
  CHECK(kind_of([&] { s.validate({}); }) == ErrorKind::kEnvelope);

  Environment env;
  EpisodeSpec spec;
  spec.seed = 9;
  env.reset(spec);
  const auto& changes = env.schedule().changes;
  REQUIRE(changes.size() == 2);
  CHECK(changes[1].step == 200);
  const FlightEnvelope envp;
  CHECK(envp.contains(changes[1].refs.altitude, changes[1].refs.airspeed));
  CHECK(std::abs(changes[1].refs.altitude - changes[0].refs.altitude) <= 1000.0);
}

TEST_CASE("faults switch on at the trigger step") {
  Environment env;
  EpisodeSpec s = fixed_spec(3, "jammed_rudder");
  env.reset(s);
  CHECK(s.scenario.trigger_step == 100);
  FlightControlSystem fcs;
  fcs.reset(env.trim().controls, env.trim().theta);
  Observation o = env.observation();
  for (int t = 0; t < 110; ++t) {
    const StepResult r = env.step(fcs.step(o, 0.1));
    o = r.observation;
    // info.fault_active describes the dynamics of the step just taken.
    CHECK(r.info.fault_active == (t >= 100));
  }
  CHECK(env.state().rudder == build_scenario("jammed_rudder").actuators.rudder.jam_angle.value());
  CHECK(env.plant().constraints.rudder.jam_angle.has_value());
}

TEST_CASE("randomization is redrawn mid-episode at the configured interval") {
  EnvironmentConfig cfg;
  cfg.randomization_interval = 20;
  Environment env(default_airframe(), cfg);
  EpisodeSpec s = fixed_spec();
  s.randomization = RandomizationMode::kMild;
  env.reset(s);
  const auto first = env.randomization_edits();
  for (int t = 1; t <= 20; ++t) {
    const StepResult r = env.step(env.trim().controls);
    CHECK(r.info.randomization_redrawn == (t - 1 == 20));
  }
  const StepResult r = env.step(env.trim().controls);
  CHECK(r.info.randomization_redrawn);
  CHECK(env.randomization_edits() != first);
}

TEST_CASE("rewards stay bounded along closed-loop episodes") {
  Environment env;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    EpisodeSpec s;
    s.seed = seed;
    s.scenario = build_scenario("damaged_semi_wing");
    Observation o = env.reset(s);
    FlightControlSystem fcs;
    fcs.reset(env.trim().controls, env.trim().theta);
    double ret = 0.0;
    while (!env.terminated()) {
      const StepResult r = env.step(fcs.step(o, 0.1));
      REQUIRE(r.reward <= 0.0);
      REQUIRE(r.reward >= -1.0);
      ret += r.reward;
      o = r.observation;
    }
    CHECK(ret >= -1000.0);
  }
}

TEST_CASE("configuration validation") {
  EnvironmentConfig cfg;
  cfg.reward.weights = {0.3, 0.2, 0.16, 0.2, 0.2};
  CHECK_THROWS_AS(Environment(default_airframe(), cfg), Error);
  cfg = {};
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.fault_trigger_step = 2000;
  CHECK_THROWS_AS(cfg.validate(), Error);
  Environment env;
  EpisodeSpec s = fixed_spec();
  s.scenario.edits.push_back({"Cx_wat", EditMode::kScale, 2.0});
  CHECK(kind_of([&] { env.reset(s); }) == ErrorKind::kUnknownParameter);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 1) != derive_seed(2, 1));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}

}  // TEST_SUITE
