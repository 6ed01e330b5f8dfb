#include "ftfc/airframe_config.hpp"

namespace ftfc {

Airframe default_airframe() {
  Airframe a;
  a.name = "ftfc-bizjet";
  AeroDerivatives& d = a.aero;
  d.CL0 = 0.25;
  d.CL_alpha = 5.0;
  d.CL_q = 4.5;
  d.CL_alphadot = 1.5;
  d.CL_de = 0.40;
  d.CD0 = 0.025;
  d.CD_i = 0.06;
  d.CD_mach = 0.01;
  d.CD_beta = 0.10;
  d.CD_de = 0.01;
  d.CD_gear = 0.02;
  d.gear_extension = 0.0;
  d.CY_beta = -0.60;
  d.CY_p = -0.05;
  d.CY_r = 0.30;
  d.CY_da = 0.01;
  d.CY_dr = 0.15;
  d.CY_pdot = 0.01;
  d.CY_rdot = 0.01;
  d.Cl0 = 0.0;
  d.Cl_beta = -0.10;
  d.Cl_p = -0.45;
  d.Cl_r = 0.15;
  d.Cl_da = 0.15;
  d.Cl_dr = 0.015;
  d.Cm0 = 0.045;
  d.Cm_alpha = -0.90;
  d.Cm_q = -14.0;
  d.Cm_alphadot = -5.0;
  d.Cm_de = -1.20;
  d.Cn0 = 0.0;
  // Zero for the symmetric airframe; damage and randomization act on it
  // multiplicatively.
  d.Cn_alpha = 0.0;
  d.Cn_beta = 0.12;
  d.Cn_p = -0.03;
  d.Cn_r = -0.20;
  d.Cn_da = -0.01;
  d.Cn_dr = -0.08;
  d.Cn_pdot = 0.01;
  d.chord = 5.8;
  d.span = 36.0;
  d.area = 200.0;

  AirframeGeometry& g = a.geometry;
  g.weight = 6000.0;
  g.Ixx = 8000.0;
  g.Iyy = 10000.0;
  g.Izz = 16500.0;
  g.Ixz = 450.0;
  // Datum at the wing-root leading edge; derivatives are referenced to the
  // nominal CG.
  g.x_cg = 1.2;
  g.y_cg = 0.0;
  g.z_cg = -0.5;
  g.x_ref = 1.2;
  g.y_ref = 0.0;
  g.z_ref = -0.5;
  g.thrust_max = 4000.0;
  return a;
}

}  // namespace ftfc
