#include "ftfc/fcs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ftfc/error.hpp"
#include "ftfc/stats.hpp"

namespace ftfc {

void PidGains::validate() const {
  if (!(integrator_limit > 0.0) || !(output_limit > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "PID limits must be positive");
  }
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) {
    fail(ErrorKind::kInvalidArgument, "PID gains must be finite");
  }
}

void FcsGains::validate() const {
  for (const PidGains* g : {&altitude, &pitch, &heading, &roll, &airspeed}) g->validate();
  if (!(washout_tau > 0.0) || !(airspeed_filter_tau >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "filter time constants must be positive");
  }
  if (!std::isfinite(yaw_damper) || !std::isfinite(sideslip)) {
    fail(ErrorKind::kInvalidArgument, "rudder gains must be finite");
  }
}

double pid_update(const PidGains& g, PidState& s, double error, double rate, double dt) {
  const double proportional = g.kp * error - g.kd * rate;
  // Conditional integration: freeze while the output is pinned and the error
  // would push it further into the clamp.
  const double unclamped = proportional + s.integral;
  const bool pushing = (unclamped >= g.output_limit && error > 0.0) ||
                       (unclamped <= -g.output_limit && error < 0.0);
  if (!(s.saturated && pushing)) {
    s.integral = std::clamp(s.integral + g.ki * error * dt, -g.integrator_limit, g.integrator_limit);
  }
  const double total = proportional + s.integral;
  const double out = std::clamp(total, -g.output_limit, g.output_limit);
  s.saturated = out != total;
  return out;
}

FlightControlSystem::FlightControlSystem(FcsGains gains) : gains_(gains) { gains_.validate(); }

void FlightControlSystem::reset(const ControlInputs& trim, double trim_theta) {
  state_ = FcsState{};
  state_.trim = trim;
  state_.trim_theta = trim_theta;
}

ControlInputs FlightControlSystem::step(const Observation& obs, double dt, FcsSaturation* sat) {
  if (!(dt > 0.0)) fail(ErrorKind::kInvalidArgument, "FCS dt must be positive");
  using enum ObsChannel;
  const FcsGains& g = gains_;
  FcsState& s = state_;
  ControlInputs cmd = s.trim;
  FcsSaturation flags;

  if (g.longitudinal) {
    const double phi = obs[kPhi];
    const double theta = obs[kTheta];
    const double h_dot = obs[kU] * std::sin(theta) - obs[kV] * std::sin(phi) * std::cos(theta) -
                         obs[kW] * std::cos(phi) * std::cos(theta);
    const double theta_cmd =
        s.trim_theta + pid_update(g.altitude, s.altitude, obs[kErrorAltitude], h_dot, dt);
    flags.pitch_command = s.altitude.saturated;
    // Positive elevator is trailing-edge down (nose down).
    const double nose_up = pid_update(g.pitch, s.pitch, theta_cmd - theta, obs[kQ], dt);
    flags.elevator = s.pitch.saturated;
    cmd.elevator = s.trim.elevator - nose_up;
    const double b = g.airspeed_filter_tau / (g.airspeed_filter_tau + dt);
    s.airspeed_error = s.started ? b * s.airspeed_error + (1.0 - b) * obs[kErrorAirspeed]
                                 : obs[kErrorAirspeed];
    cmd.throttle =
        s.trim.throttle + pid_update(g.airspeed, s.airspeed, s.airspeed_error, 0.0, dt);
    flags.throttle = s.airspeed.saturated;
  }

  if (g.lateral) {
    const double r = obs[kR];
    if (!s.started) s.previous_r = r;
    const double a = g.washout_tau / (g.washout_tau + dt);
    s.washout = a * (s.washout + r - s.previous_r);
    s.previous_r = r;
    const double phi_cmd = pid_update(g.heading, s.heading, obs[kErrorHeading], 0.0, dt);
    flags.bank_command = s.heading.saturated;
    cmd.aileron = s.trim.aileron + pid_update(g.roll, s.roll, phi_cmd - obs[kPhi], obs[kP], dt);
    flags.aileron = s.roll.saturated;
    // Positive rudder yaws the nose left.
    cmd.rudder = s.trim.rudder + g.yaw_damper * s.washout - g.sideslip * obs[kBeta];
  }
  s.started = true;

  const ControlInputs clamped = cmd.clamped();
  flags.elevator = flags.elevator || clamped.elevator != cmd.elevator;
  flags.aileron = flags.aileron || clamped.aileron != cmd.aileron;
  flags.rudder = clamped.rudder != cmd.rudder;
  flags.throttle = flags.throttle || clamped.throttle != cmd.throttle;
  if (sat != nullptr) *sat = flags;
  return clamped;
}

std::vector<TuneRow> tune_report(const FcsGains& gains, const std::vector<std::string>& scenarios,
                                 const std::vector<std::uint64_t>& seeds, const Airframe& airframe,
                                 const EnvironmentConfig& config) {
  std::vector<TuneRow> rows;
  Environment env(airframe, config);
  FlightControlSystem fcs(gains);
  for (const std::string& name : scenarios) {
    TuneRow row;
    row.scenario = name;
    RunningStats returns;
    double heading_err = 0.0, altitude_err = 0.0;
    for (std::uint64_t seed : seeds) {
      EpisodeSpec spec;
      spec.scenario = build_scenario(name, config.scenario_offsets);
      spec.scenario.trigger_step = config.fault_trigger_step;
      spec.seed = seed;
      Observation obs = env.reset(spec);
      fcs.reset(env.trim().controls, env.trim().theta);
      double total = 0.0;
      bool crashed = false;
      while (!env.terminated()) {
        const StepResult r = env.step(fcs.step(obs, config.step.dt));
        obs = r.observation;
        total += r.reward;
        crashed = r.crash;
      }
      returns.push(total);
      row.crashes += crashed ? 1 : 0;
      heading_err += std::abs(obs[ObsChannel::kErrorHeading]);
      altitude_err += std::abs(obs[ObsChannel::kErrorAltitude]);
      ++row.episodes;
    }
    row.mean_return = returns.mean();
    row.std_return = returns.stddev();
    if (row.episodes > 0) {
      row.final_heading_error = heading_err / row.episodes;
      row.final_altitude_error = altitude_err / row.episodes;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_tune_report(const std::vector<TuneRow>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-26s %8s %10s %9s %8s %10s %10s\n", "scenario", "episodes",
                "return", "std", "crashes", "|eps_psi|", "|eps_h|");
  out += line;
  for (const TuneRow& r : rows) {
    std::snprintf(line, sizeof line, "%-26s %8d %10.2f %9.2f %8d %10.4f %10.2f\n",
                  r.scenario.c_str(), r.episodes, r.mean_return, r.std_return, r.crashes,
                  r.final_heading_error, r.final_altitude_error);
    out += line;
  }
  return out;
}

}  // namespace ftfc
