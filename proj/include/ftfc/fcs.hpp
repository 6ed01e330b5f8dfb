#pragma once

#include <string>
#include <vector>

#include "ftfc/controls.hpp"
#include "ftfc/environment.hpp"

namespace ftfc {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integrator_limit = 1.0;  ///< |integral term| bound, output units
  double output_limit = 1.0;      ///< |output| bound, around the loop's trim value

  void validate() const;
  bool operator==(const PidGains&) const = default;
};

/// Loop gains, in SI-free units: feet, radians, seconds, normalized commands.
/// kd of the inner loops multiplies the body rate (rate damping).
struct FcsGains {
  PidGains altitude{0.0025, 0.00004, 0.015, 0.05, 0.25};  ///< ft -> pitch command, rad
  PidGains pitch{2.2, 0.6, 1.2, 0.5, 1.0};                ///< rad -> elevator
  PidGains heading{1.2, 0.01, 0.0, 0.05, 0.45};           ///< rad -> bank command, rad
  PidGains roll{1.6, 0.15, 0.5, 0.3, 1.0};                ///< rad -> aileron
  PidGains airspeed{0.06, 0.008, 0.0, 0.4, 1.0};         ///< ft/s -> throttle
  double yaw_damper = 1.5;       ///< washed-out r -> rudder
  double sideslip = 1.0;         ///< beta -> rudder
  double washout_tau = 1.0;      ///< s
  double airspeed_filter_tau = 1.0;  ///< s, low-pass on the gust-corrupted airspeed error
  bool longitudinal = true;
  bool lateral = true;

  void validate() const;
  bool operator==(const FcsGains&) const = default;
};

struct PidState {
  double integral = 0.0;
  bool saturated = false;
};

struct FcsState {
  PidState altitude, pitch, heading, roll, airspeed;
  double washout = 0.0;
  double airspeed_error = 0.0;  ///< filtered
  double previous_r = 0.0;
  bool started = false;
  ControlInputs trim;
  double trim_theta = 0.0;
};

/// Which loops hit their output clamp on the last step.
struct FcsSaturation {
  bool pitch_command = false;
  bool elevator = false;
  bool bank_command = false;
  bool aileron = false;
  bool rudder = false;
  bool throttle = false;

  bool any() const { return pitch_command || elevator || bank_command || aileron || rudder || throttle; }
};

/// Cascaded PID autopilot:
///   altitude -> pitch command -> elevator (with q damping)
///   heading  -> bank command  -> aileron  (with p damping)
///   washed-out yaw rate and sideslip -> rudder
///   airspeed -> throttle
/// Integrators start at zero around the trim commands captured by reset().
class FlightControlSystem {
 public:
  explicit FlightControlSystem(FcsGains gains = {});

  void reset(const ControlInputs& trim, double trim_theta);
  ControlInputs step(const Observation& obs, double dt, FcsSaturation* saturation = nullptr);

  const FcsGains& gains() const { return gains_; }
  const FcsState& state() const { return state_; }

 private:
  FcsGains gains_;
  FcsState state_;
};

/// Runs one PID update with clamped, conditionally-frozen integration.
/// `rate` is the measured derivative of the controlled variable.
double pid_update(const PidGains& g, PidState& s, double error, double rate, double dt);

struct TuneRow {
  std::string scenario;
  int episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  int crashes = 0;
  double final_heading_error = 0.0;  ///< mean |eps_psi| at episode end, rad
  double final_altitude_error = 0.0;
};

/// Flies the gain set over each scenario and reports per-scenario returns
/// and crash counts. Deterministic in `seeds`.
std::vector<TuneRow> tune_report(const FcsGains& gains, const std::vector<std::string>& scenarios,
                                 const std::vector<std::uint64_t>& seeds,
                                 const Airframe& airframe = default_airframe(),
                                 const EnvironmentConfig& config = {});

std::string format_tune_report(const std::vector<TuneRow>& rows);

}  // namespace ftfc
