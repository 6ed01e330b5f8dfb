#include "ftfc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftfc/error.hpp"

namespace ftfc {

ControlInputs ControlInputs::clamped() const {
  auto sat = [](double x, double lo, double hi) {
    return std::isfinite(x) ? std::clamp(x, lo, hi) : 0.0;
  };
  return {sat(aileron, -1.0, 1.0), sat(elevator, -1.0, 1.0), sat(rudder, -1.0, 1.0),
          sat(throttle, 0.0, 1.0)};
}

std::array<double, AircraftState::kRigidBodySize> AircraftState::rigid_body() const {
  return {north, east, altitude, u, v, w, phi, theta, psi, p, q, r};
}

void AircraftState::set_rigid_body(const std::array<double, kRigidBodySize>& x) {
  north = x[0];
  east = x[1];
  altitude = x[2];
  u = x[3];
  v = x[4];
  w = x[5];
  phi = x[6];
  theta = x[7];
  psi = x[8];
  p = x[9];
  q = x[10];
  r = x[11];
}

double AircraftState::airspeed_inertial() const { return std::sqrt(u * u + v * v + w * w); }

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = angle - kTwoPi * std::floor((angle + std::numbers::pi) / kTwoPi);
  if (wrapped >= std::numbers::pi) wrapped -= kTwoPi;
  return wrapped;
}

WindGust::WindGust(double sigma_fps, std::uint64_t seed) : sigma_(sigma_fps), rng_(seed) {}

const Vec3& WindGust::draw() {
  for (int i = 0; i < 3; ++i) current_[i] = sigma_ > 0.0 ? sigma_ * normal_(rng_) : 0.0;
  return current_;
}

Eigen::Matrix3d ned_to_body(double phi, double theta, double psi) {
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Eigen::Matrix3d m;
  m << ct * cp,                 ct * sp,                 -st,
       sf * st * cp - cf * sp,  sf * st * sp + cf * cp,  sf * ct,
       cf * st * cp + sf * sp,  cf * st * sp - sf * cp,  cf * ct;
  return m;
}

RigidBodyDerivative state_derivative(const AircraftState& s, const Wrench& wrench,
                                     const AirframeGeometry& g, double gravity,
                                     double theta_margin) {
  if (std::abs(s.theta) > std::numbers::pi / 2.0 - theta_margin) {
    fail(ErrorKind::kStateSingularity, "pitch attitude inside the Euler singularity guard");
  }
  const double mass = g.weight / kGravity;
  const Vec3& f = wrench.force;
  const Vec3& m = wrench.moment;

  const double cf = std::cos(s.phi), sf = std::sin(s.phi);
  const double ct = std::cos(s.theta), st = std::sin(s.theta), tt = std::tan(s.theta);
  const double cp = std::cos(s.psi), sp = std::sin(s.psi);

  RigidBodyDerivative d{};
  // Navigation (NED position, altitude positive up).
  d[0] = s.u * ct * cp + s.v * (sf * st * cp - cf * sp) + s.w * (cf * st * cp + sf * sp);
  d[1] = s.u * ct * sp + s.v * (sf * st * sp + cf * cp) + s.w * (cf * st * sp - sf * cp);
  d[2] = s.u * st - s.v * sf * ct - s.w * cf * ct;
  // Force equations.
  d[3] = s.r * s.v - s.q * s.w - gravity * st + f.x() / mass;
  d[4] = s.p * s.w - s.r * s.u + gravity * sf * ct + f.y() / mass;
  d[5] = s.q * s.u - s.p * s.v + gravity * cf * ct + f.z() / mass;
  // Euler kinematics.
  d[6] = s.p + tt * (s.q * sf + s.r * cf);
  d[7] = s.q * cf - s.r * sf;
  d[8] = (s.q * sf + s.r * cf) / ct;
  // Moment equations with the Ixz product of inertia.
  const double gamma = g.Ixx * g.Izz - g.Ixz * g.Ixz;
  const double c1 = ((g.Iyy - g.Izz) * g.Izz - g.Ixz * g.Ixz) / gamma;
  const double c2 = ((g.Ixx - g.Iyy + g.Izz) * g.Ixz) / gamma;
  const double c3 = g.Izz / gamma;
  const double c4 = g.Ixz / gamma;
  const double c5 = (g.Izz - g.Ixx) / g.Iyy;
  const double c6 = g.Ixz / g.Iyy;
  const double c7 = 1.0 / g.Iyy;
  const double c8 = (g.Ixx * (g.Ixx - g.Iyy) + g.Ixz * g.Ixz) / gamma;
  const double c9 = g.Ixx / gamma;
  d[9] = (c1 * s.r + c2 * s.p) * s.q + c3 * m.x() + c4 * m.z();
  d[10] = c5 * s.p * s.r - c6 * (s.p * s.p - s.r * s.r) + c7 * m.y();
  d[11] = (c8 * s.p - c2 * s.r) * s.q + c4 * m.x() + c9 * m.z();
  return d;
}

AirData air_data(const AircraftState& s, const Vec3& gust_ned) {
  Vec3 v_air{s.u, s.v, s.w};
  if (!gust_ned.isZero(0.0)) v_air -= ned_to_body(s.phi, s.theta, s.psi) * gust_ned;
  AirData a;
  a.airspeed = v_air.norm();
  a.alpha = std::atan2(v_air.z(), v_air.x());
  a.beta = a.airspeed > 0.0 ? std::asin(std::clamp(v_air.y() / a.airspeed, -1.0, 1.0)) : 0.0;
  const AtmosphereSample atm = standard_atmosphere(s.altitude);
  a.qbar = 0.5 * atm.density * a.airspeed * a.airspeed;
  a.mach = a.airspeed / atm.speed_of_sound;
  return a;
}

Wrench total_wrench(const AircraftState& s, const Plant& plant, const Vec3& gust_ned,
                    AirData* air_out) {
  const AirData air = air_data(s, gust_ned);
  const ActuatorConstraints& k = plant.constraints;
  const SurfaceDeflections effective{s.aileron * k.aileron.effectiveness,
                                     s.elevator * k.elevator.effectiveness,
                                     s.rudder * k.rudder.effectiveness};
  const AeroAirData aero_in{air.alpha, air.beta, air.airspeed, air.mach, s.alpha_dot};
  const AngularRates rates{s.p, s.q, s.r, s.p_dot, s.r_dot};
  const AeroCoefficients c = compute_coefficients(plant.aero, aero_in, rates, effective);
  if (air_out != nullptr) *air_out = air;
  return forces_and_moments(c, air.qbar, plant.aero, plant.geometry, aero_in, s.thrust);
}

AirData measure(const AircraftState& s, const Plant& plant, const Vec3& gust_ned) {
  AirData air;
  const Wrench w = total_wrench(s, plant, gust_ned, &air);
  const double weight = plant.geometry.weight;
  air.nx = w.force.x() / weight;
  air.ny = w.force.y() / weight;
  air.nz = -w.force.z() / weight;
  return air;
}

SurfaceDeflections commanded_deflections(const ControlInputs& controls, const Plant& plant) {
  const ControlInputs c = controls.clamped();
  const ActuatorConfig& a = plant.actuators;
  const ActuatorConstraints& k = plant.constraints;
  return {c.aileron * a.aileron_max * k.aileron.range_scale,
          c.elevator * a.elevator_max * k.elevator.range_scale,
          c.rudder * a.rudder_max * k.rudder.range_scale};
}

namespace {

double advance_surface(double current, double target, double limit, double h,
                       const ActuatorConfig& a, const SurfaceConstraint& k) {
  if (k.jam_angle) return *k.jam_angle;
  const double lagged = target + (current - target) * std::exp(-h / a.tau);
  const double max_move = a.rate_max * h;
  const double next = current + std::clamp(lagged - current, -max_move, max_move);
  return std::clamp(next, -limit, limit);
}

constexpr std::size_t kOdeSize = AircraftState::kRigidBodySize + 1;
using OdeVector = std::array<double, kOdeSize>;

OdeVector pack(const AircraftState& s) {
  OdeVector x{};
  const auto rb = s.rigid_body();
  std::copy(rb.begin(), rb.end(), x.begin());
  x[kOdeSize - 1] = s.thrust;
  return x;
}

void unpack(const OdeVector& x, AircraftState& s) {
  std::array<double, AircraftState::kRigidBodySize> rb{};
  std::copy(x.begin(), x.begin() + AircraftState::kRigidBodySize, rb.begin());
  s.set_rigid_body(rb);
  s.thrust = x[kOdeSize - 1];
}

OdeVector evaluate(const AircraftState& base, const OdeVector& x, const Plant& plant,
                   const Vec3& gust_ned, const StepConfig& cfg) {
  AircraftState s = base;
  unpack(x, s);
  const Wrench w = total_wrench(s, plant, gust_ned);
  const RigidBodyDerivative rb =
      state_derivative(s, w, plant.geometry, cfg.gravity, cfg.theta_margin);
  OdeVector dx{};
  std::copy(rb.begin(), rb.end(), dx.begin());
  const double sigma = standard_atmosphere(s.altitude).density / kSeaLevelDensity;
  const double thrust_target = s.throttle * plant.geometry.thrust_max * sigma;
  dx[kOdeSize - 1] = (thrust_target - s.thrust) / plant.actuators.thrust_tau;
  return dx;
}

OdeVector axpy(const OdeVector& x, double h, const OdeVector& k) {
  OdeVector out;
  for (std::size_t i = 0; i < kOdeSize; ++i) out[i] = x[i] + h * k[i];
  return out;
}

}  // namespace

AircraftState step(const AircraftState& state, const ControlInputs& controls, const Plant& plant,
                   const Vec3& gust_ned, const StepConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.substeps < 1) {
    fail(ErrorKind::kInvalidArgument, "step requires dt > 0 and at least one substep");
  }
  const double h = cfg.dt / cfg.substeps;
  const ActuatorConfig& act = plant.actuators;
  const ActuatorConstraints& k = plant.constraints;
  const SurfaceDeflections target = commanded_deflections(controls, plant);

  AircraftState s = state;
  s.throttle = controls.clamped().throttle;
  for (int sub = 0; sub < cfg.substeps; ++sub) {
    s.aileron = advance_surface(s.aileron, target.aileron, act.aileron_max * k.aileron.range_scale,
                                h, act, k.aileron);
    s.elevator = advance_surface(s.elevator, target.elevator,
                                 act.elevator_max * k.elevator.range_scale, h, act, k.elevator);
    s.rudder = advance_surface(s.rudder, target.rudder, act.rudder_max * k.rudder.range_scale, h,
                               act, k.rudder);

    const OdeVector x0 = pack(s);
    const OdeVector k1 = evaluate(s, x0, plant, gust_ned, cfg);
    const OdeVector k2 = evaluate(s, axpy(x0, 0.5 * h, k1), plant, gust_ned, cfg);
    const OdeVector k3 = evaluate(s, axpy(x0, 0.5 * h, k2), plant, gust_ned, cfg);
    const OdeVector k4 = evaluate(s, axpy(x0, h, k3), plant, gust_ned, cfg);
    OdeVector x1;
    for (std::size_t i = 0; i < kOdeSize; ++i) {
      x1[i] = x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    // Unsteady terms lag one substep: they come from the start-of-substep rates.
    const double uw = s.u * s.u + s.w * s.w;
    s.alpha_dot = uw > 0.0 ? (s.u * k1[5] - s.w * k1[3]) / uw : 0.0;
    s.p_dot = k1[9];
    s.r_dot = k1[11];
    unpack(x1, s);
  }
  s.phi = wrap_angle(s.phi);
  s.psi = wrap_angle(s.psi);

  const auto rb = s.rigid_body();
  const bool finite = std::all_of(rb.begin(), rb.end(), [](double v) { return std::isfinite(v); }) &&
                      std::isfinite(s.thrust);
  if (!finite) fail(ErrorKind::kNumericalDivergence, "non-finite state after integration");
  return s;
}

}  // namespace ftfc
