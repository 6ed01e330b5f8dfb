#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ftfc/dynamics.hpp"
#include "ftfc/error.hpp"

namespace ftfc {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kTolerance = 1e-9;

using Vec6 = Eigen::Matrix<double, 6, 1>;

// Unknown vector layout: alpha, beta, elevator, aileron, rudder, throttle.
AircraftState trim_state(const Vec6& x, const TrimTarget& target, const Plant& plant) {
  const double alpha = x[0], beta = x[1];
  AircraftState s;
  s.altitude = target.altitude;
  s.u = target.airspeed * std::cos(alpha) * std::cos(beta);
  s.v = target.airspeed * std::sin(beta);
  s.w = target.airspeed * std::sin(alpha) * std::cos(beta);
  s.theta = alpha;
  s.psi = wrap_angle(target.heading);
  s.elevator = x[2];
  s.aileron = x[3];
  s.rudder = x[4];
  s.throttle = x[5];
  const double sigma = standard_atmosphere(s.altitude).density / kSeaLevelDensity;
  s.thrust = x[5] * plant.geometry.thrust_max * sigma;
  return s;
}

Vec6 residual(const Vec6& x, const TrimTarget& target, const Plant& plant) {
  const AircraftState s = trim_state(x, target, plant);
  const Wrench w = total_wrench(s, plant, Vec3::Zero());
  const RigidBodyDerivative d = state_derivative(s, w, plant.geometry);
  Vec6 r;
  r << d[3], d[4], d[5], d[9], d[10], d[11];
  return r;
}

}  // namespace

TrimResult find_trim(const TrimTarget& target, const Plant& plant, const FlightEnvelope& envelope) {
  if (!envelope.contains(target.altitude, target.airspeed)) {
    std::ostringstream msg;
    msg << "trim target h=" << target.altitude << " ft, V=" << target.airspeed
        << " ft/s is outside the flight envelope";
    fail(ErrorKind::kEnvelope, msg.str());
  }
  validate(plant.aero);
  validate(plant.geometry);

  const AeroDerivatives& aero = plant.aero;
  const ActuatorConstraints& k = plant.constraints;
  const double qbar =
      0.5 * standard_atmosphere(target.altitude).density * target.airspeed * target.airspeed;
  const double cl_required = plant.geometry.weight / (qbar * aero.area);

  Vec6 x = Vec6::Zero();
  x[0] = aero.CL_alpha != 0.0 ? (cl_required - aero.CL0) / aero.CL_alpha : 0.05;
  x[5] = 0.5;
  std::array<bool, 6> free{true, true, true, true, true, true};
  if (k.elevator.jam_angle) { x[2] = *k.elevator.jam_angle; free[2] = false; }
  if (k.aileron.jam_angle) { x[3] = *k.aileron.jam_angle; free[3] = false; }
  if (k.rudder.jam_angle) { x[4] = *k.rudder.jam_angle; free[4] = false; }

  Vec6 r = residual(x, target, plant);
  int iteration = 0;
  for (; iteration < kMaxIterations && r.norm() > kTolerance; ++iteration) {
    Eigen::Matrix<double, 6, 6> jac = Eigen::Matrix<double, 6, 6>::Zero();
    for (int j = 0; j < 6; ++j) {
      if (!free[j]) continue;
      const double step = 1e-7 * std::max(1.0, std::abs(x[j]));
      Vec6 xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      jac.col(j) = (residual(xp, target, plant) - residual(xm, target, plant)) / (2.0 * step);
    }
    const Vec6 delta = jac.colPivHouseholderQr().solve(-r);
    // Backtracking keeps the iteration inside the basin when far from trim.
    double scale = 1.0;
    Vec6 candidate = x + delta;
    Vec6 r_candidate = residual(candidate, target, plant);
    while (r_candidate.norm() > r.norm() && scale > 1e-4) {
      scale *= 0.5;
      candidate = x + scale * delta;
      r_candidate = residual(candidate, target, plant);
    }
    x = candidate;
    r = r_candidate;
  }

  const double norm = r.norm();
  if (!(norm <= 1e-6)) {
    std::ostringstream msg;
    msg << "trim did not converge (residual " << norm << " after " << iteration << " iterations)";
    fail(ErrorKind::kTrimFailure, msg.str());
  }

  const ActuatorConfig& a = plant.actuators;
  const double e_lim = a.elevator_max * k.elevator.range_scale;
  const double a_lim = a.aileron_max * k.aileron.range_scale;
  const double r_lim = a.rudder_max * k.rudder.range_scale;
  const bool within = std::abs(x[2]) <= e_lim && std::abs(x[3]) <= a_lim &&
                      std::abs(x[4]) <= r_lim && x[5] >= 0.0 && x[5] <= 1.0 &&
                      std::abs(x[0]) < 0.4;
  if (!within) {
    std::ostringstream msg;
    msg << "trim solution exceeds control limits (alpha=" << x[0] << ", de=" << x[2]
        << ", da=" << x[3] << ", dr=" << x[4] << ", throttle=" << x[5] << ")";
    fail(ErrorKind::kTrimFailure, msg.str());
  }

  TrimResult out;
  out.alpha = x[0];
  out.beta = x[1];
  out.theta = x[0];
  out.deflections = {x[3], x[2], x[4]};
  out.throttle = x[5];
  auto normalized = [](double value, double limit) { return limit > 0.0 ? value / limit : 0.0; };
  out.controls = {normalized(x[3], a_lim), normalized(x[2], e_lim), normalized(x[4], r_lim), x[5]};
  out.state = trim_state(x, target, plant);
  out.residual_norm = norm;
  out.iterations = iteration;
  return out;
}

}  // namespace ftfc
