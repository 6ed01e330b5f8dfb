#pragma once

#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftfc/airframe.hpp"
#include "ftfc/dynamics.hpp"

namespace ftfc {

enum class EditMode { kScale, kAdd };

/// One edit of a named airframe parameter (see parameter_schema()).
struct ParamEdit {
  std::string target;
  EditMode mode = EditMode::kScale;
  double value = 1.0;

  bool operator==(const ParamEdit&) const = default;
};

/// A schedulable fault: parameter edits plus actuator constraints, applied
/// together when the episode reaches trigger_step.
struct FaultScenario {
  std::string name = "nominal";
  std::vector<ParamEdit> edits;
  ActuatorConstraints actuators;
  int trigger_step = 100;

  bool operator==(const FaultScenario&) const = default;
};

/// One row of the domain-randomization table. Every member parameter gets an
/// independent uniform draw in [low, high].
struct RandomizationRow {
  std::vector<std::string> members;
  EditMode mode = EditMode::kScale;
  double low = 1.0;
  double high = 1.0;

  bool operator==(const RandomizationRow&) const = default;
};

struct RandomizationSpec {
  std::vector<RandomizationRow> rows;

  /// The full training-time randomization ranges.
  static RandomizationSpec training_ranges();

  /// Shrinks every range toward the identity edit (scale 1, offset 0) by
  /// `fraction`; 1 keeps the ranges, 0 collapses them.
  RandomizationSpec shrunk(double fraction) const;

  void validate() const;
  bool operator==(const RandomizationSpec&) const = default;
};

enum class RandomizationMode { kNone, kMild, kFull };

RandomizationMode parse_randomization_mode(std::string_view text);
std::string_view to_string(RandomizationMode mode);

/// Fraction used for RandomizationMode::kMild.
inline constexpr double kMildRandomizationFraction = 0.25;

/// One independent draw per row member, in row order.
std::vector<ParamEdit> sample_randomization(const RandomizationSpec& spec, std::mt19937_64& rng);

/// Magnitudes for the scenario offsets the fault list names without a value.
struct ScenarioOffsets {
  double tail_Cm0 = -0.0095;
  double wing_Cl0 = -0.0055;
  double wing_Cn0 = -0.0055;
  double aileron_Cl0 = -0.0055;
  double rudder_jam = 0.2617993877991494;  ///< 15 deg

  bool operator==(const ScenarioOffsets&) const = default;
};

std::span<const std::string_view> scenario_names();

/// Builds one of the named fault scenarios ("nominal" plus seven faults).
/// Throws Error(kScenarioNotFound) for unknown names.
FaultScenario build_scenario(std::string_view name, const ScenarioOffsets& offsets = {});

struct EditedAirframe {
  AeroDerivatives aero;
  AirframeGeometry geometry;
  ActuatorConstraints actuators;
};

/// Applies edits in order on copies of the inputs: scale edits multiply,
/// additive edits add. Throws Error(kUnknownParameter) for unknown targets;
/// in that case nothing is modified.
EditedAirframe apply_edits(const AeroDerivatives& aero, const AirframeGeometry& geometry,
                           const ActuatorConstraints& actuators,
                           std::span<const ParamEdit> edits);

/// Merges fault constraints onto existing ones: jams are set, range and
/// effectiveness factors multiply.
ActuatorConstraints merge_constraints(const ActuatorConstraints& base,
                                      const ActuatorConstraints& fault);

/// Plant with the scenario's edits and constraints applied.
Plant apply_scenario(const Plant& plant, const FaultScenario& scenario);

}  // namespace ftfc
