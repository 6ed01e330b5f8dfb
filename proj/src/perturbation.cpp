#include "ftfc/perturbation.hpp"

#include <algorithm>
#include <array>

#include "ftfc/error.hpp"

namespace ftfc {

RandomizationSpec RandomizationSpec::training_ranges() {
  using enum EditMode;
  RandomizationSpec spec;
  spec.rows = {
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
  return spec;
}

RandomizationSpec RandomizationSpec::shrunk(double fraction) const {
  RandomizationSpec out = *this;
  for (RandomizationRow& row : out.rows) {
    const double identity = row.mode == EditMode::kScale ? 1.0 : 0.0;
    row.low = identity + fraction * (row.low - identity);
    row.high = identity + fraction * (row.high - identity);
  }
  return out;
}

void RandomizationSpec::validate() const {
  for (const RandomizationRow& row : rows) {
    if (!(row.low <= row.high)) fail(ErrorKind::kInvalidArgument, "randomization row has low > high");
    if (row.members.empty()) fail(ErrorKind::kInvalidArgument, "randomization row has no members");
    for (const std::string& id : row.members) {
      if (find_parameter(id) == nullptr) {
        fail(ErrorKind::kUnknownParameter, "randomization targets unknown parameter '" + id + "'");
      }
    }
  }
}

RandomizationMode parse_randomization_mode(std::string_view text) {
  if (text == "none") return RandomizationMode::kNone;
  if (text == "mild") return RandomizationMode::kMild;
  if (text == "full") return RandomizationMode::kFull;
  fail(ErrorKind::kInvalidArgument, "unknown randomization mode '" + std::string(text) + "'");
}

std::string_view to_string(RandomizationMode mode) {
  switch (mode) {
    case RandomizationMode::kNone: return "none";
    case RandomizationMode::kMild: return "mild";
    case RandomizationMode::kFull: return "full";
  }
  return "none";
}

std::vector<ParamEdit> sample_randomization(const RandomizationSpec& spec, std::mt19937_64& rng) {
  std::vector<ParamEdit> edits;
  for (const RandomizationRow& row : spec.rows) {
    for (const std::string& id : row.members) {
      double value = row.low;
      if (row.high > row.low) value = std::uniform_real_distribution<double>(row.low, row.high)(rng);
      edits.push_back({id, row.mode, value});
    }
  }
  return edits;
}

namespace {
constexpr std::array<std::string_view, 8> kScenarioNames = {
    "nominal",      "jammed_rudder",           "broken_aileron",   "saturated_elevator",
    "deployed_landing_gear", "shifted_cg", "damaged_horizontal_tail", "damaged_semi_wing",
};
}  // namespace

std::span<const std::string_view> scenario_names() { return kScenarioNames; }

FaultScenario build_scenario(std::string_view name, const ScenarioOffsets& off) {
  using enum EditMode;
  FaultScenario s;
  s.name = std::string(name);
  if (name == "nominal") {
  } else if (name == "jammed_rudder") {
    s.actuators.rudder.jam_angle = off.rudder_jam;
  } else if (name == "broken_aileron") {
    s.edits = {{"Cl_da", kScale, 0.5}, {"CY_da", kScale, 0.5}, {"Cn_da", kScale, 0.5},
               {"Cl0", kAdd, off.aileron_Cl0}};
  } else if (name == "saturated_elevator") {
    s.actuators.elevator.range_scale = 0.05;
  } else if (name == "deployed_landing_gear") {
    s.edits = {{"gear_extension", kAdd, 3.0}};
  } else if (name == "shifted_cg") {
    s.edits = {{"x_cg", kScale, 1.20}, {"y_cg", kScale, 1.40}, {"z_cg", kScale, 0.70}};
  } else if (name == "damaged_horizontal_tail") {
    s.edits = {{"CL_de", kScale, 0.5},  {"CD_de", kScale, 1.2},    {"CD0", kScale, 1.2},
               {"Cm_de", kScale, 0.5},  {"Cm0", kAdd, off.tail_Cm0}, {"Cm_q", kScale, 0.5},
               {"Cm_alpha", kScale, 0.5}, {"Cm_alphadot", kScale, 0.5}};
  } else if (name == "damaged_semi_wing") {
    s.edits = {{"CL_alpha", kScale, 0.7}, {"CL_q", kScale, 0.7},    {"CL_alphadot", kScale, 0.7},
               {"CD0", kScale, 1.2},      {"CD_i", kScale, 1.2},     {"CY_beta", kScale, 1.5},
               {"CY_p", kScale, 1.5},     {"CY_r", kScale, 1.5},     {"Cl0", kAdd, off.wing_Cl0},
               {"Cl_beta", kScale, -1.0}, {"Cl_r", kScale, -1.0},    {"Cl_da", kScale, 0.5},
               {"Cn0", kAdd, off.wing_Cn0}, {"Cn_r", kScale, 0.8},   {"Cn_beta", kScale, 1.5},
               {"Cn_da", kScale, 1.5},    {"Cn_alpha", kScale, 1.2}};
  } else {
    fail(ErrorKind::kScenarioNotFound, "unknown scenario '" + std::string(name) + "'");
  }
  return s;
}

EditedAirframe apply_edits(const AeroDerivatives& aero, const AirframeGeometry& geometry,
                           const ActuatorConstraints& actuators, std::span<const ParamEdit> edits) {
  EditedAirframe out{aero, geometry, actuators};
  for (const ParamEdit& e : edits) {
    const double current = get_parameter(out.aero, out.geometry, e.target);
    const double next = e.mode == EditMode::kScale ? current * e.value : current + e.value;
    set_parameter(out.aero, out.geometry, e.target, next);
  }
  return out;
}

ActuatorConstraints merge_constraints(const ActuatorConstraints& base,
                                      const ActuatorConstraints& fault) {
  auto merge = [](const SurfaceConstraint& b, const SurfaceConstraint& f) {
    SurfaceConstraint m = b;
    if (f.jam_angle) m.jam_angle = f.jam_angle;
    m.range_scale = b.range_scale * f.range_scale;
    m.effectiveness = b.effectiveness * f.effectiveness;
    return m;
  };
  return {merge(base.aileron, fault.aileron), merge(base.elevator, fault.elevator),
          merge(base.rudder, fault.rudder)};
}

Plant apply_scenario(const Plant& plant, const FaultScenario& scenario) {
  const EditedAirframe e =
      apply_edits(plant.aero, plant.geometry, plant.constraints, scenario.edits);
  return Plant{e.aero, e.geometry, plant.actuators,
               merge_constraints(e.actuators, scenario.actuators)};
}

}  // namespace ftfc
