#include "ftfc/airframe.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ftfc/error.hpp"

namespace ftfc {

namespace {

bool all_finite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

#define FTFC_AERO(name) ParamInfo{#name, ParamGroup::kAero, &AeroDerivatives::name, nullptr}
#define FTFC_GEOM(name) ParamInfo{#name, ParamGroup::kGeometry, nullptr, &AirframeGeometry::name}

constexpr std::array kSchema = {
    FTFC_AERO(CL0),        FTFC_AERO(CL_alpha),    FTFC_AERO(CL_q),   FTFC_AERO(CL_alphadot),
    FTFC_AERO(CL_de),      FTFC_AERO(CD0),         FTFC_AERO(CD_i),   FTFC_AERO(CD_mach),
    FTFC_AERO(CD_beta),    FTFC_AERO(CD_de),       FTFC_AERO(CD_gear), FTFC_AERO(gear_extension),
    FTFC_AERO(CY_beta),    FTFC_AERO(CY_p),        FTFC_AERO(CY_r),   FTFC_AERO(CY_da),
    FTFC_AERO(CY_dr),      FTFC_AERO(CY_pdot),     FTFC_AERO(CY_rdot), FTFC_AERO(Cl0),
    FTFC_AERO(Cl_beta),    FTFC_AERO(Cl_p),        FTFC_AERO(Cl_r),   FTFC_AERO(Cl_da),
    FTFC_AERO(Cl_dr),      FTFC_AERO(Cm0),         FTFC_AERO(Cm_alpha), FTFC_AERO(Cm_q),
    FTFC_AERO(Cm_alphadot), FTFC_AERO(Cm_de),      FTFC_AERO(Cn0),    FTFC_AERO(Cn_alpha),
    FTFC_AERO(Cn_beta),    FTFC_AERO(Cn_p),        FTFC_AERO(Cn_r),   FTFC_AERO(Cn_da),
    FTFC_AERO(Cn_dr),      FTFC_AERO(Cn_pdot),     FTFC_AERO(chord),  FTFC_AERO(span),
    FTFC_AERO(area),       FTFC_GEOM(weight),      FTFC_GEOM(Ixx),    FTFC_GEOM(Iyy),
    FTFC_GEOM(Izz),        FTFC_GEOM(Ixz),         FTFC_GEOM(x_cg),   FTFC_GEOM(y_cg),
    FTFC_GEOM(z_cg),       FTFC_GEOM(x_ref),       FTFC_GEOM(y_ref),  FTFC_GEOM(z_ref),
    FTFC_GEOM(thrust_max),
};

#undef FTFC_AERO
#undef FTFC_GEOM

}  // namespace

AeroCoefficients compute_coefficients(const AeroDerivatives& d, const AeroAirData& air,
                                      const AngularRates& w, const SurfaceDeflections& u) {
  if (!all_finite({air.alpha, air.beta, air.airspeed, air.mach, air.alpha_dot, w.p, w.q, w.r,
                   w.p_dot, w.r_dot, u.aileron, u.elevator, u.rudder})) {
    fail(ErrorKind::kInvalidAirData, "non-finite aerodynamic input");
  }
  if (!(air.airspeed > 0.0)) {
    fail(ErrorKind::kInvalidAirData, "airspeed must be positive");
  }

  const double c_2v = d.chord / (2.0 * air.airspeed);
  const double b_2v = d.span / (2.0 * air.airspeed);
  const double b_2v_sq = b_2v * b_2v;

  AeroCoefficients c;
  c.CL = d.CL0 + d.CL_alpha * air.alpha + d.CL_q * w.q * c_2v +
         d.CL_alphadot * air.alpha_dot * c_2v + d.CL_de * u.elevator;
  c.CD = d.CD0 + d.CD_i * c.CL * c.CL + d.CD_de * u.elevator + d.CD_mach * air.mach +
         d.CD_beta * std::abs(air.beta) + d.CD_gear * d.gear_extension;
  c.CY = d.CY_beta * air.beta + d.CY_p * w.p * b_2v + d.CY_r * w.r * b_2v +
         d.CY_da * u.aileron + d.CY_dr * u.rudder + d.CY_pdot * w.p_dot * b_2v_sq +
         d.CY_rdot * w.r_dot * b_2v_sq;
  c.Cl = d.Cl0 + d.Cl_beta * air.beta + d.Cl_p * w.p * b_2v + d.Cl_r * w.r * b_2v +
         d.Cl_da * u.aileron + d.Cl_dr * u.rudder;
  c.Cm = d.Cm0 + d.Cm_alpha * air.alpha + d.Cm_q * w.q * c_2v +
         d.Cm_alphadot * air.alpha_dot * c_2v + d.Cm_de * u.elevator;
  c.Cn = d.Cn0 + d.Cn_alpha * air.alpha + d.Cn_beta * air.beta + d.Cn_p * w.p * b_2v +
         d.Cn_r * w.r * b_2v + d.Cn_da * u.aileron + d.Cn_dr * u.rudder +
         d.Cn_pdot * w.p_dot * b_2v_sq;
  return c;
}

Vec3 wind_to_body(const Vec3& wind, double alpha, double beta) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  Eigen::Matrix3d c_bw;
  c_bw << ca * cb, -ca * sb, -sa,
          sb,       cb,      0.0,
          sa * cb, -sa * sb,  ca;
  return c_bw * wind;
}

Vec3 reference_arm(const AirframeGeometry& g) {
  // Structural frame (x aft, z up) to body frame (x forward, z down).
  return {-(g.x_ref - g.x_cg), g.y_ref - g.y_cg, -(g.z_ref - g.z_cg)};
}

Wrench forces_and_moments(const AeroCoefficients& c, double qbar, const AeroDerivatives& d,
                          const AirframeGeometry& g, const AeroAirData& air, double thrust) {
  const double qs = qbar * d.area;
  const Vec3 wind_force{-qs * c.CD, qs * c.CY, -qs * c.CL};

  Wrench w;
  w.force = wind_to_body(wind_force, air.alpha, air.beta);
  w.force.x() += thrust;
  const Vec3 moment_ref{qs * d.span * c.Cl, qs * d.chord * c.Cm, qs * d.span * c.Cn};
  w.moment = moment_ref + reference_arm(g).cross(w.force);
  return w;
}

void validate(const AeroDerivatives& d) {
  if (!(d.chord > 0.0) || !(d.span > 0.0) || !(d.area > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "reference geometry must be positive");
  }
  if (!(d.CD0 >= 0.0)) fail(ErrorKind::kInvalidArgument, "CD0 must be non-negative");
  if (!(d.CD_i >= 0.0)) fail(ErrorKind::kInvalidArgument, "induced-drag factor must be non-negative");
}

void validate(const AirframeGeometry& g) {
  if (!(g.weight > 0.0)) fail(ErrorKind::kInvalidArgument, "weight must be positive");
  const bool inertia_pd = g.Ixx > 0.0 && g.Iyy > 0.0 && g.Izz > 0.0 &&
                          g.Ixx * g.Izz - g.Ixz * g.Ixz > 0.0;
  if (!inertia_pd) fail(ErrorKind::kInvalidArgument, "inertia tensor must be positive definite");
  if (!(g.thrust_max >= 0.0)) fail(ErrorKind::kInvalidArgument, "thrust_max must be non-negative");
}

std::span<const ParamInfo> parameter_schema() { return kSchema; }

const ParamInfo* find_parameter(std::string_view id) {
  auto it = std::find_if(kSchema.begin(), kSchema.end(),
                         [id](const ParamInfo& p) { return p.id == id; });
  return it == kSchema.end() ? nullptr : &*it;
}

namespace {
const ParamInfo& require_parameter(std::string_view id) {
  const ParamInfo* p = find_parameter(id);
  if (p == nullptr) fail(ErrorKind::kUnknownParameter, "unknown airframe parameter '" + std::string(id) + "'");
  return *p;
}
}  // namespace

double get_parameter(const AeroDerivatives& d, const AirframeGeometry& g, std::string_view id) {
  const ParamInfo& p = require_parameter(id);
  return p.group == ParamGroup::kAero ? d.*(p.aero) : g.*(p.geom);
}

void set_parameter(AeroDerivatives& d, AirframeGeometry& g, std::string_view id, double value) {
  const ParamInfo& p = require_parameter(id);
  if (p.group == ParamGroup::kAero) {
    d.*(p.aero) = value;
  } else {
    g.*(p.geom) = value;
  }
}

std::vector<double> parameter_vector(const AeroDerivatives& d, const AirframeGeometry& g) {
  std::vector<double> out;
  out.reserve(kSchema.size());
  for (const ParamInfo& p : kSchema) {
    out.push_back(p.group == ParamGroup::kAero ? d.*(p.aero) : g.*(p.geom));
  }
  return out;
}

}  // namespace ftfc
