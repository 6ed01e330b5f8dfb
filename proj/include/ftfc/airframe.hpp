#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftfc/controls.hpp"

namespace ftfc {

using Vec3 = Eigen::Vector3d;

/// Stability and control derivatives (per radian) plus reference geometry.
struct AeroDerivatives {
  // Lift
  double CL0 = 0.0;
  double CL_alpha = 0.0;
  double CL_q = 0.0;
  double CL_alphadot = 0.0;
  double CL_de = 0.0;
  // Drag. CD_i is the induced-drag factor k of the drag polar.
  double CD0 = 0.0;
  double CD_i = 0.0;
  double CD_mach = 0.0;
  double CD_beta = 0.0;
  double CD_de = 0.0;
  double CD_gear = 0.0;
  /// Landing-gear drag multiplier; 0 with gear retracted.
  double gear_extension = 0.0;
  // Side force
  double CY_beta = 0.0;
  double CY_p = 0.0;
  double CY_r = 0.0;
  double CY_da = 0.0;
  double CY_dr = 0.0;
  double CY_pdot = 0.0;
  double CY_rdot = 0.0;
  // Roll moment
  double Cl0 = 0.0;
  double Cl_beta = 0.0;
  double Cl_p = 0.0;
  double Cl_r = 0.0;
  double Cl_da = 0.0;
  double Cl_dr = 0.0;
  // Pitch moment
  double Cm0 = 0.0;
  double Cm_alpha = 0.0;
  double Cm_q = 0.0;
  double Cm_alphadot = 0.0;
  double Cm_de = 0.0;
  // Yaw moment
  double Cn0 = 0.0;
  double Cn_alpha = 0.0;
  double Cn_beta = 0.0;
  double Cn_p = 0.0;
  double Cn_r = 0.0;
  double Cn_da = 0.0;
  double Cn_dr = 0.0;
  double Cn_pdot = 0.0;
  // Reference geometry
  double chord = 1.0;  ///< mean aerodynamic chord, ft
  double span = 1.0;   ///< wingspan, ft
  double area = 1.0;   ///< reference wing area, ft^2

  bool operator==(const AeroDerivatives&) const = default;
};

/// Mass properties and engine rating. Positions are structural-frame
/// coordinates in feet (x aft, y right, z up) from a fixed airframe datum.
/// The thrust line passes through the aerodynamic reference point along the
/// body x axis.
struct AirframeGeometry {
  double weight = 1.0;  ///< lbf
  double Ixx = 1.0;     ///< slug ft^2
  double Iyy = 1.0;
  double Izz = 1.0;
  double Ixz = 0.0;
  double x_cg = 0.0;
  double y_cg = 0.0;
  double z_cg = 0.0;
  double x_ref = 0.0;  ///< aerodynamic moment reference point
  double y_ref = 0.0;
  double z_ref = 0.0;
  double thrust_max = 0.0;  ///< sea-level static thrust, lbf

  bool operator==(const AirframeGeometry&) const = default;
};

struct AeroCoefficients {
  double CL = 0.0;
  double CD = 0.0;
  double CY = 0.0;
  double Cl = 0.0;
  double Cm = 0.0;
  double Cn = 0.0;

  bool operator==(const AeroCoefficients&) const = default;
};

/// Flow quantities the coefficient model reads. Angles in radians, airspeed
/// in ft/s.
struct AeroAirData {
  double alpha = 0.0;
  double beta = 0.0;
  double airspeed = 0.0;
  double mach = 0.0;
  double alpha_dot = 0.0;  ///< rad/s
};

struct AngularRates {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double p_dot = 0.0;  ///< rad/s^2
  double r_dot = 0.0;
};

struct Wrench {
  Vec3 force = Vec3::Zero();   ///< body axes, lbf
  Vec3 moment = Vec3::Zero();  ///< body axes about the CG, lbf ft
};

/// Evaluates the six aerodynamic coefficients of the linear derivative model.
/// Rate terms are nondimensionalized with c/2V (longitudinal) and b/2V
/// (lateral-directional); angular-acceleration terms with (b/2V)^2.
/// Throws Error(kInvalidAirData) for non-finite inputs or airspeed <= 0.
AeroCoefficients compute_coefficients(const AeroDerivatives& derivs, const AeroAirData& airdata,
                                      const AngularRates& rates,
                                      const SurfaceDeflections& controls);

/// Dimensionalizes the coefficients into body-axis force and moment about the
/// current CG. Thrust (lbf, body x) is optional and acts at the reference point.
Wrench forces_and_moments(const AeroCoefficients& coeffs, double dynamic_pressure,
                          const AeroDerivatives& derivs, const AirframeGeometry& geom,
                          const AeroAirData& airdata, double thrust = 0.0);

/// Rotates a wind-axis vector (drag negative x, side force y, lift negative z)
/// into body axes.
Vec3 wind_to_body(const Vec3& wind, double alpha, double beta);

/// Offset from the CG to the aerodynamic reference point in body axes.
Vec3 reference_arm(const AirframeGeometry& geom);

void validate(const AeroDerivatives& derivs);
void validate(const AirframeGeometry& geom);

/// Named access to every scalar parameter of the airframe, in a stable order.
/// This is the schema used by the JSON airframe file and by parameter edits.
enum class ParamGroup { kAero, kGeometry };

struct ParamInfo {
  std::string_view id;
  ParamGroup group;
  double AeroDerivatives::*aero = nullptr;
  double AirframeGeometry::*geom = nullptr;
};

std::span<const ParamInfo> parameter_schema();
const ParamInfo* find_parameter(std::string_view id);

/// Value of a parameter by id; throws Error(kUnknownParameter).
double get_parameter(const AeroDerivatives& derivs, const AirframeGeometry& geom,
                     std::string_view id);
void set_parameter(AeroDerivatives& derivs, AirframeGeometry& geom, std::string_view id,
                   double value);

/// The full airframe parameter vector in schema order.
std::vector<double> parameter_vector(const AeroDerivatives& derivs, const AirframeGeometry& geom);

}  // namespace ftfc
