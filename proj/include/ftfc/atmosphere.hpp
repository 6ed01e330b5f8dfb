#pragma once

namespace ftfc {

struct AtmosphereSample {
  double temperature = 0.0;     ///< deg R
  double pressure = 0.0;        ///< lbf/ft^2
  double density = 0.0;         ///< slug/ft^3
  double speed_of_sound = 0.0;  ///< ft/s
};

inline constexpr double kGravity = 32.174;            ///< ft/s^2
inline constexpr double kSeaLevelDensity = 0.0023769;  ///< slug/ft^3

/// 1976 U.S. Standard Atmosphere, troposphere and the isothermal layer above
/// it (valid to 65,617 ft geopotential). Altitudes below sea level are
/// clamped to sea level.
AtmosphereSample standard_atmosphere(double altitude_ft);

}  // namespace ftfc
