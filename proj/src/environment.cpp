#include "ftfc/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftfc/error.hpp"

namespace ftfc {

namespace {

constexpr double kPi = std::numbers::pi;

// Ranges cover normal flight with margin; values outside saturate at +-1.
// Tracking errors use tight ranges so that the small residuals of settled
// flight stay resolvable; large reference steps saturate but keep their sign.
constexpr std::array<ChannelScaling, kObservationSize> kScaling = {{
    {"err_altitude", 0.0, 200.0},
    {"err_heading", 0.0, 0.5},
    {"err_airspeed", 0.0, 20.0},
    {"altitude", 14000.0, 11000.0},
    {"alpha", 0.05, 0.35},
    {"beta", 0.0, 0.35},
    {"phi", 0.0, kPi},
    {"theta", 0.0, kPi / 2},
    {"p", 0.0, 1.0},
    {"q", 0.0, 1.0},
    {"r", 0.0, 1.0},
    {"u", 310.0, 90.0},
    {"v", 0.0, 60.0},
    {"w", 0.0, 100.0},
    {"nx", 0.0, 1.5},
    {"ny", 0.0, 1.5},
    {"nz", 1.0, 3.0},
}};

}  // namespace

std::span<const ChannelScaling, kObservationSize> observation_scaling() { return kScaling; }

std::array<double, kObservationSize> Observation::normalized() const {
  std::array<double, kObservationSize> out{};
  for (std::size_t i = 0; i < kObservationSize; ++i) {
    out[i] = std::clamp((raw[i] - kScaling[i].center) / kScaling[i].half_range, -1.0, 1.0);
  }
  return out;
}

Observation Observation::denormalize(const std::array<double, kObservationSize>& normalized) {
  Observation o;
  for (std::size_t i = 0; i < kObservationSize; ++i) {
    o.raw[i] = kScaling[i].center + normalized[i] * kScaling[i].half_range;
  }
  return o;
}

// ---------------------------------------------------------------------------

double tracking_reward(double error, double k, double scale) {
  return -1.0 + std::exp(-k * std::abs(error / scale));
}

double gaussian_kernel(double x, double scale) {
  const double z = x / scale;
  return std::exp(-z * z);
}

double attitude_reward(double p, double q, double r, double phi, const RewardConfig& c) {
  const double product = gaussian_kernel(p, c.rate_scale_p) * gaussian_kernel(q, c.rate_scale_q) *
                         gaussian_kernel(r, c.rate_scale_r) * gaussian_kernel(phi, c.roll_scale);
  return -1.0 + std::pow(product, 0.25);
}

double control_reward(const std::array<double, 4>& deltas, const RewardConfig& c) {
  double product = 1.0;
  for (std::size_t i = 0; i < 4; ++i) product *= gaussian_kernel(deltas[i], c.control_delta_scale[i]);
  return -1.0 + std::pow(product, 0.25);
}

double total_reward(const RewardComponents& r, const RewardConfig& c) {
  const auto& w = c.weights;
  return w[0] * r.altitude + w[1] * r.heading + w[2] * r.airspeed + w[3] * r.attitude +
         w[4] * r.control;
}

RewardComponents reward_components(const Observation& obs, const ControlInputs& action,
                                   const ControlInputs& previous, const RewardConfig& c) {
  using enum ObsChannel;
  RewardComponents r;
  r.altitude = tracking_reward(obs[kErrorAltitude], c.altitude.k, c.altitude.scale);
  r.heading = tracking_reward(obs[kErrorHeading], c.heading.k, c.heading.scale);
  r.airspeed = tracking_reward(obs[kErrorAirspeed], c.airspeed.k, c.airspeed.scale);
  r.attitude = attitude_reward(obs[kP], obs[kQ], obs[kR], obs[kPhi], c);
  const auto a = action.to_array();
  const auto b = previous.to_array();
  r.control = control_reward({a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}, c);
  return r;
}

void RewardConfig::validate() const {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) fail(ErrorKind::kInvalidArgument, "reward weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorKind::kInvalidArgument, "reward weights must sum to 1");
  for (const TrackingShape* s : {&altitude, &heading, &airspeed}) {
    if (!(s->k > 0.0) || !(s->scale > 0.0)) {
      fail(ErrorKind::kInvalidArgument, "tracking reward k and scale must be positive");
    }
  }
  for (double s : {rate_scale_p, rate_scale_q, rate_scale_r, roll_scale}) {
    if (!(s > 0.0)) fail(ErrorKind::kInvalidArgument, "attitude reward scales must be positive");
  }
  for (double s : control_delta_scale) {
    if (!(s > 0.0)) fail(ErrorKind::kInvalidArgument, "control reward scales must be positive");
  }
}

// ---------------------------------------------------------------------------

Setpoint SetpointSchedule::active(int step) const {
  Setpoint refs = changes.empty() ? Setpoint{} : changes.front().refs;
  for (const SetpointChange& c : changes) {
    if (c.step > step) break;
    refs = c.refs;
  }
  return refs;
}

void SetpointSchedule::validate(const FlightEnvelope& envelope) const {
  if (changes.empty()) fail(ErrorKind::kInvalidArgument, "setpoint schedule is empty");
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const SetpointChange& c = changes[i];
    if (i > 0 && c.step <= changes[i - 1].step) {
      fail(ErrorKind::kInvalidArgument, "setpoint schedule steps must be strictly increasing");
    }
    if (!envelope.contains(c.refs.altitude, c.refs.airspeed)) {
      fail(ErrorKind::kEnvelope, "setpoint outside the flight envelope");
    }
    if (!std::isfinite(c.refs.heading)) fail(ErrorKind::kInvalidArgument, "non-finite heading setpoint");
  }
}

void EnvironmentConfig::validate() const {
  if (horizon < 1) fail(ErrorKind::kInvalidArgument, "horizon must be >= 1");
  if (!(step.dt > 0.0) || step.substeps < 1) {
    fail(ErrorKind::kInvalidArgument, "step dt must be positive with >= 1 substep");
  }
  if (!(gust_sigma >= 0.0)) fail(ErrorKind::kInvalidArgument, "gust sigma must be non-negative");
  if (fault_trigger_step < 0 || fault_trigger_step > horizon) {
    fail(ErrorKind::kInvalidArgument, "fault trigger outside the episode horizon");
  }
  if (randomization_interval < 0) fail(ErrorKind::kInvalidArgument, "randomization interval < 0");
  if (trim_attempts < 1) fail(ErrorKind::kInvalidArgument, "trim_attempts must be >= 1");
  if (!(envelope.altitude_min < envelope.altitude_max) ||
      !(envelope.airspeed_min < envelope.airspeed_max)) {
    fail(ErrorKind::kInvalidArgument, "degenerate flight envelope");
  }
  reward.validate();
  randomization.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

enum SeedStream : std::uint64_t { kInitial = 1, kSchedule = 2, kRandomization = 3, kGust = 4 };

RandomizationSpec ranges_for(const RandomizationSpec& full, RandomizationMode mode) {
  if (mode == RandomizationMode::kMild) return full.shrunk(kMildRandomizationFraction);
  return full;
}

SetpointSchedule draw_schedule(const TrimTarget& start, const EnvironmentConfig& cfg,
                               std::mt19937_64& rng) {
  const SetpointChangeRanges& r = cfg.setpoint_change;
  const FlightEnvelope& env = cfg.envelope;
  SetpointSchedule s;
  s.changes.push_back({0, {start.altitude, start.heading, start.airspeed}});
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dh = r.altitude * unit(rng);
  const double dpsi = r.heading * unit(rng);
  const double dv = r.airspeed * unit(rng);
  if (r.step > 0 && r.step < cfg.horizon) {
    Setpoint next;
    next.altitude = std::clamp(start.altitude + dh, env.altitude_min, env.altitude_max);
    next.heading = wrap_angle(start.heading + dpsi);
    next.airspeed = std::clamp(start.airspeed + dv, env.airspeed_min, env.airspeed_max);
    s.changes.push_back({r.step, next});
  }
  return s;
}

bool is_physics_failure(ErrorKind k) {
  return k == ErrorKind::kStateSingularity || k == ErrorKind::kNumericalDivergence ||
         k == ErrorKind::kInvalidAirData;
}

}  // namespace

Environment::Environment(Airframe airframe, EnvironmentConfig config)
    : airframe_(std::move(airframe)), config_(std::move(config)) {
  config_.validate();
  validate(airframe_.aero);
  validate(airframe_.geometry);
  plant_ = airframe_.plant();
}

void Environment::rebuild_plant() {
  const Plant base = airframe_.plant();
  const EditedAirframe dr = apply_edits(base.aero, base.geometry, base.constraints, dr_edits_);
  plant_ = Plant{dr.aero, dr.geometry, base.actuators, dr.actuators};
  if (fault_active_) plant_ = apply_scenario(plant_, spec_.scenario);
}

Observation Environment::reset(const EpisodeSpec& spec) {
  if (spec.scenario.trigger_step < 0 || spec.scenario.trigger_step > config_.horizon) {
    fail(ErrorKind::kInvalidArgument, "fault trigger outside the episode horizon");
  }
  // Catch unknown targets before any state changes.
  apply_edits(airframe_.aero, airframe_.geometry, {}, spec.scenario.edits);
  if (spec.randomization_edits) {
    apply_edits(airframe_.aero, airframe_.geometry, {}, *spec.randomization_edits);
  }

  spec_ = spec;
  std::mt19937_64 init_rng(derive_seed(spec.seed, kInitial));
  dr_rng_.seed(derive_seed(spec.randomization_seed.value_or(spec.seed), kRandomization));
  const RandomizationSpec ranges = ranges_for(config_.randomization, spec.randomization);
  const FlightEnvelope& env = config_.envelope;

  fault_active_ = false;
  TrimTarget target;
  for (int attempt = 0;; ++attempt) {
    if (spec.randomization_edits) {
      dr_edits_ = *spec.randomization_edits;
    } else if (spec.randomization != RandomizationMode::kNone) {
      dr_edits_ = sample_randomization(ranges, dr_rng_);
    } else {
      dr_edits_.clear();
    }
    if (spec.initial) {
      target = *spec.initial;
    } else {
      target.altitude =
          std::uniform_real_distribution<double>(env.altitude_min, env.altitude_max)(init_rng);
      target.airspeed =
          std::uniform_real_distribution<double>(env.airspeed_min, env.airspeed_max)(init_rng);
      target.heading = std::uniform_real_distribution<double>(-kPi, kPi)(init_rng);
    }
    rebuild_plant();
    try {
      trim_ = find_trim(target, plant_, env);
      break;
    } catch (const Error& e) {
      const bool can_resample =
          !spec.initial || (!spec.randomization_edits && spec.randomization != RandomizationMode::kNone);
      if (e.kind() != ErrorKind::kTrimFailure || !can_resample ||
          attempt + 1 >= config_.trim_attempts) {
        throw;
      }
    }
  }

  if (spec.schedule) {
    spec.schedule->validate(env);
    schedule_ = *spec.schedule;
  } else {
    std::mt19937_64 schedule_rng(derive_seed(spec.seed, kSchedule));
    schedule_ = draw_schedule(target, config_, schedule_rng);
  }

  gust_ = WindGust(config_.gust_sigma, derive_seed(spec.seed, kGust));
  state_ = trim_.state;
  previous_action_ = trim_.controls;
  step_ = 0;
  terminated_ = false;
  has_reset_ = true;
  if (spec_.scenario.trigger_step == 0) {
    fault_active_ = true;
    rebuild_plant();
  }
  air_ = measure(state_, plant_, Vec3::Zero());
  observation_ = observe();
  return observation_;
}

Observation Environment::observe() const {
  using enum ObsChannel;
  const Setpoint refs = schedule_.active(step_);
  Observation o;
  o[kErrorAltitude] = refs.altitude - state_.altitude;
  o[kErrorHeading] = wrap_angle(refs.heading - state_.psi);
  o[kErrorAirspeed] = refs.airspeed - air_.airspeed;
  o[kAltitude] = state_.altitude;
  o[kAlpha] = air_.alpha;
  o[kBeta] = air_.beta;
  o[kPhi] = state_.phi;
  o[kTheta] = state_.theta;
  o[kP] = state_.p;
  o[kQ] = state_.q;
  o[kR] = state_.r;
  o[kU] = state_.u;
  o[kV] = state_.v;
  o[kW] = state_.w;
  o[kNx] = air_.nx;
  o[kNy] = air_.ny;
  o[kNz] = air_.nz;
  return o;
}

StepResult Environment::step(const ControlInputs& action) {
  if (!has_reset_) fail(ErrorKind::kUsage, "step() called before reset()");
  if (terminated_) fail(ErrorKind::kUsage, "step() called on a terminated episode");

  const ControlInputs a = action.clamped();
  StepResult out;

  if (!fault_active_ && step_ >= spec_.scenario.trigger_step) {
    fault_active_ = true;
    rebuild_plant();
  }
  const bool sampled_dr = !spec_.randomization_edits && spec_.randomization != RandomizationMode::kNone;
  if (sampled_dr && config_.randomization_interval > 0 && step_ > 0 &&
      step_ % config_.randomization_interval == 0) {
    dr_edits_ = sample_randomization(ranges_for(config_.randomization, spec_.randomization), dr_rng_);
    rebuild_plant();
    out.info.randomization_redrawn = true;
  }

  const Vec3 gust = config_.gusts ? gust_.draw() : Vec3::Zero();
  bool physics_failed = false;
  try {
    AircraftState next = ftfc::step(state_, a, plant_, gust, config_.step);
    const AirData air = measure(next, plant_, gust);
    state_ = next;
    air_ = air;
  } catch (const Error& e) {
    if (!is_physics_failure(e.kind())) throw;
    physics_failed = true;
    out.info.crash_reason = std::string(to_string(e.kind()));
  }
  ++step_;

  observation_ = observe();
  const CrashLimits& lim = config_.crash;
  if (!physics_failed) {
    if (std::abs(state_.p) > lim.max_rate || std::abs(state_.q) > lim.max_rate ||
        std::abs(state_.r) > lim.max_rate) {
      out.info.crash_reason = "angular_rate";
    } else if (air_.nz > lim.max_nz || air_.nz < lim.min_nz) {
      out.info.crash_reason = "load_factor";
    } else if (state_.altitude < lim.min_altitude) {
      out.info.crash_reason = "altitude_floor";
    }
  }
  out.crash = !out.info.crash_reason.empty();

  if (physics_failed) {
    out.info.reward_terms = {-1.0, -1.0, -1.0, -1.0, -1.0};
    out.reward = -1.0;
  } else {
    out.info.reward_terms = reward_components(observation_, a, previous_action_, config_.reward);
    out.reward = total_reward(out.info.reward_terms, config_.reward);
  }
  previous_action_ = a;
  terminated_ = out.crash || step_ >= config_.horizon;

  out.observation = observation_;
  out.terminated = terminated_;
  out.info.step = step_;
  out.info.fault_active = fault_active_;
  out.info.refs = schedule_.active(step_);
  return out;
}

}  // namespace ftfc
