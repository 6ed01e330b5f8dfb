#pragma once

#include <array>
#include <optional>
#include <random>

#include "ftfc/airframe.hpp"
#include "ftfc/atmosphere.hpp"
#include "ftfc/controls.hpp"

namespace ftfc {

/// Flat-earth rigid-body state plus actuator and engine states.
struct AircraftState {
  double north = 0.0;     ///< ft
  double east = 0.0;      ///< ft
  double altitude = 0.0;  ///< ft
  double u = 0.0;         ///< body velocity, ft/s
  double v = 0.0;
  double w = 0.0;
  double phi = 0.0;  ///< rad
  double theta = 0.0;
  double psi = 0.0;
  double p = 0.0;  ///< rad/s
  double q = 0.0;
  double r = 0.0;
  double aileron = 0.0;   ///< actual deflections, rad
  double elevator = 0.0;
  double rudder = 0.0;
  double throttle = 0.0;  ///< commanded fraction [0, 1]
  double thrust = 0.0;    ///< engine output, lbf
  // Unsteady-aero inputs, carried from the previous physics substep.
  double alpha_dot = 0.0;
  double p_dot = 0.0;
  double r_dot = 0.0;

  static constexpr std::size_t kRigidBodySize = 12;
  std::array<double, kRigidBodySize> rigid_body() const;
  void set_rigid_body(const std::array<double, kRigidBodySize>& x);

  double airspeed_inertial() const;

  bool operator==(const AircraftState&) const = default;
};

/// Time derivatives of the 12 rigid-body states, in AircraftState order.
using RigidBodyDerivative = std::array<double, AircraftState::kRigidBodySize>;

struct AirData {
  double airspeed = 0.0;  ///< V_T, ft/s
  double alpha = 0.0;
  double beta = 0.0;
  double mach = 0.0;
  double qbar = 0.0;  ///< lbf/ft^2
  double nx = 0.0;    ///< load factors, g: body-axis specific force over weight,
  double ny = 0.0;    ///< with n_z reported positive up (1 g in level flight)
  double nz = 0.0;
};

/// Per-axis Gaussian gust in NED, redrawn once per control step.
class WindGust {
 public:
  explicit WindGust(double sigma_fps = 2.0, std::uint64_t seed = 0);

  /// Draws a fresh i.i.d. N(0, sigma) sample per axis.
  const Vec3& draw();
  const Vec3& current() const { return current_; }
  double sigma() const { return sigma_; }

 private:
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vec3 current_ = Vec3::Zero();
};

struct ActuatorConfig {
  double aileron_max = 0.3490658503988659;   ///< 20 deg
  double elevator_max = 0.3490658503988659;  ///< 20 deg
  double rudder_max = 0.5235987755982988;    ///< 30 deg
  double rate_max = 1.0471975511965976;      ///< 60 deg/s
  double tau = 0.05;                         ///< surface lag, s
  double thrust_tau = 0.5;                   ///< engine lag, s

  bool operator==(const ActuatorConfig&) const = default;
};

/// Fault-induced restrictions on one control surface.
struct SurfaceConstraint {
  std::optional<double> jam_angle;  ///< rad; surface frozen here when set
  double range_scale = 1.0;         ///< fraction of the nominal deflection range
  double effectiveness = 1.0;       ///< multiplier on the deflection seen by the aero model

  bool operator==(const SurfaceConstraint&) const = default;
};

struct ActuatorConstraints {
  SurfaceConstraint aileron;
  SurfaceConstraint elevator;
  SurfaceConstraint rudder;

  bool operator==(const ActuatorConstraints&) const = default;
};

/// Everything the integrator needs to know about the vehicle.
struct Plant {
  AeroDerivatives aero;
  AirframeGeometry geometry;
  ActuatorConfig actuators;
  ActuatorConstraints constraints;
};

struct StepConfig {
  double dt = 0.1;            ///< control period, s
  int substeps = 5;           ///< RK4 substeps per control period
  double theta_margin = 0.0349065850398866;  ///< Euler singularity guard, rad
  double gravity = kGravity;
};

/// Flat-earth 6-DoF equations of motion for a body-axis wrench about the CG.
/// Throws Error(kStateSingularity) when |theta| is within the guard margin of
/// pi/2.
RigidBodyDerivative state_derivative(const AircraftState& state, const Wrench& wrench,
                                     const AirframeGeometry& geom,
                                     double gravity = kGravity,
                                     double theta_margin = StepConfig{}.theta_margin);

/// Rotation taking NED vectors into body axes.
Eigen::Matrix3d ned_to_body(double phi, double theta, double psi);

/// Air data for the current state and NED gust velocity.
AirData air_data(const AircraftState& state, const Vec3& gust_ned);

/// Aerodynamic plus thrust wrench about the CG at the current state.
Wrench total_wrench(const AircraftState& state, const Plant& plant, const Vec3& gust_ned,
                    AirData* air_out = nullptr);

/// Air data with load factors filled in from the wrench.
AirData measure(const AircraftState& state, const Plant& plant, const Vec3& gust_ned);

/// Physical surface deflection commanded by a normalized control input.
SurfaceDeflections commanded_deflections(const ControlInputs& controls, const Plant& plant);

/// Advances one control period with fixed-step RK4. Actuators follow a
/// rate-limited first-order lag held constant within each substep; the gust
/// enters the air-relative velocity only. Throws Error(kNumericalDivergence)
/// on a non-finite result and Error(kStateSingularity) from the guard.
AircraftState step(const AircraftState& state, const ControlInputs& controls, const Plant& plant,
                   const Vec3& gust_ned, const StepConfig& config = {});

double wrap_angle(double angle);

// ---------------------------------------------------------------------------
// Trim

struct FlightEnvelope {
  double altitude_min = 4000.0;
  double altitude_max = 24000.0;
  double airspeed_min = 260.0;
  double airspeed_max = 360.0;

  bool contains(double altitude, double airspeed) const {
    return altitude >= altitude_min && altitude <= altitude_max && airspeed >= airspeed_min &&
           airspeed <= airspeed_max;
  }
  bool operator==(const FlightEnvelope&) const = default;
};

struct TrimTarget {
  double altitude = 10000.0;  ///< ft
  double airspeed = 300.0;    ///< ft/s
  double heading = 0.0;       ///< rad
};

struct TrimResult {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  SurfaceDeflections deflections;
  double throttle = 0.0;
  ControlInputs controls;  ///< normalized trim command
  AircraftState state;     ///< trimmed state with actuators and engine settled
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Wings-level, constant-altitude trim. Solves for (alpha, beta, elevator,
/// aileron, rudder, throttle) with theta = alpha so that the six body
/// accelerations vanish. Throws Error(kEnvelope) for targets outside the
/// envelope and Error(kTrimFailure) when Newton does not converge in 200
/// iterations or the solution exceeds the control limits.
TrimResult find_trim(const TrimTarget& target, const Plant& plant,
                     const FlightEnvelope& envelope = {});

}  // namespace ftfc
