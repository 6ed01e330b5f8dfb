#pragma once

#include <string>

#include "ftfc/airframe.hpp"
#include "ftfc/dynamics.hpp"

namespace ftfc {

/// A complete vehicle definition as stored in an airframe file.
struct Airframe {
  std::string name = "default";
  AeroDerivatives aero;
  AirframeGeometry geometry;
  ActuatorConfig actuators;

  Plant plant() const { return Plant{aero, geometry, actuators, {}}; }
  bool operator==(const Airframe&) const = default;
};

/// Built-in business-jet-class airframe sized for the 4,000-24,000 ft,
/// 260-360 ft/s envelope. config/default_airframe.json carries the same
/// values.
Airframe default_airframe();

}  // namespace ftfc
