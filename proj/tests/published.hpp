#pragma once

#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ftfc/airframe_config.hpp"
#include "ftfc/perturbation.hpp"

// Independent transcription of the published randomization table and fault
// list, shared by the unit suite and the acceptance run.
namespace published {

using namespace ftfc;

struct TableRow {
  std::vector<std::string> members;
  EditMode mode;
  double low, high;
};

// The published training randomization table, row by row. The pitch-rate
// lift derivative is listed there as C_L_qdot; the model's only pitch-rate
// lift term is CL_q.
inline const std::vector<TableRow>& table() {
  using enum EditMode;
  static const std::vector<TableRow> rows = {
      {{"CL_alpha", "CL_q", "CL_alphadot"}, kScale, 0.6, 1.0},
      {{"CD0", "CD_i"}, kScale, 1.0, 3.0},
      {{"CD_mach"}, kScale, 1.0, 2.0},
      {{"CD_beta"}, kScale, 1.0, 3.0},
      {{"CY_beta"}, kScale, 0.5, 3.0},
      {{"CY_pdot", "Cl_beta", "Cl_p", "Cl_r", "Cn_alpha", "Cn_beta", "Cn_pdot"}, kScale, 0.5, 3.0},
      {{"CY_rdot"}, kScale, 0.5, 2.0},
      {{"Cm0"}, kAdd, -0.02, 0.001},
      {{"Cm_alpha"}, kScale, 0.5, 1.5},
      {{"Cm_q"}, kScale, 1.0, 3.0},
      {{"Cm_alphadot"}, kScale, 1.0, 1.5},
      {{"Cl0", "Cn0"}, kAdd, -0.02, 0.009},
      {{"Cn_r"}, kScale, 0.5, 1.0},
      {{"CL_de", "CD_de", "Cm_de", "Cl_da", "Cn_da"}, kScale, 0.5, 1.0},
      {{"Cl_dr", "Cn_dr", "CY_dr"}, kScale, 0.0, 1.0},
      {{"x_cg", "y_cg", "z_cg"}, kScale, 0.70, 1.30},
      {{"weight"}, kScale, 0.70, 1.05},
  };
  return rows;
}

// Parameter -> factor (scale) or offset (add) that the scenario must apply.
struct Expected {
  std::map<std::string, double> scale;
  std::map<std::string, double> add;
  ActuatorConstraints actuators;
};

inline Expected expected_scenario(std::string_view name, const ScenarioOffsets& off) {
  Expected e;
  if (name == "jammed_rudder") {
    e.actuators.rudder.jam_angle = 15.0 * std::numbers::pi / 180.0;
  } else if (name == "broken_aileron") {
    e.scale = {{"Cl_da", 0.5}, {"CY_da", 0.5}, {"Cn_da", 0.5}};
    e.add = {{"Cl0", off.aileron_Cl0}};
  } else if (name == "saturated_elevator") {
    e.actuators.elevator.range_scale = 0.05;
  } else if (name == "deployed_landing_gear") {
    e.add = {{"gear_extension", 3.0}};
  } else if (name == "shifted_cg") {
    e.scale = {{"x_cg", 1.2}, {"y_cg", 1.4}, {"z_cg", 0.7}};
  } else if (name == "damaged_horizontal_tail") {
    e.scale = {{"CL_de", 0.5}, {"CD_de", 1.2},      {"CD0", 1.2},        {"Cm_de", 0.5},
               {"Cm_q", 0.5},  {"Cm_alpha", 0.5}, {"Cm_alphadot", 0.5}};
    e.add = {{"Cm0", off.tail_Cm0}};
  } else if (name == "damaged_semi_wing") {
    e.scale = {{"CL_alpha", 0.7}, {"CL_q", 0.7},  {"CL_alphadot", 0.7}, {"CD0", 1.2},  {"CD_i", 1.2},
               {"CY_beta", 1.5},  {"CY_p", 1.5},  {"CY_r", 1.5},        {"Cl_beta", -1.0}, {"Cl_r", -1.0},
               {"Cl_da", 0.5},    {"Cn_r", 0.8},  {"Cn_beta", 1.5},     {"Cn_da", 1.5}, {"Cn_alpha", 1.2}};
    e.add = {{"Cl0", off.wing_Cl0}, {"Cn0", off.wing_Cn0}};
  }
  return e;
}

// An airframe where every parameter is distinct and nonzero, so every
// multiplier and offset is visible in the diff.
inline Airframe probe_airframe() {
  Airframe a = default_airframe();
  double v = 0.37;
  for (const ParamInfo& p : parameter_schema()) {
    set_parameter(a.aero, a.geometry, p.id, v);
    v += 0.11;
  }
  return a;
}

}  // namespace published
