#pragma once

#include <array>

namespace ftfc {

/// Agent-facing command vector. Surfaces are normalized to [-1, 1] against
/// the actuator deflection limits, throttle to [0, 1].
struct ControlInputs {
  double aileron = 0.0;
  double elevator = 0.0;
  double rudder = 0.0;
  double throttle = 0.0;

  static constexpr std::size_t kSize = 4;

  /// Clamps every channel into its legal range.
  ControlInputs clamped() const;

  std::array<double, kSize> to_array() const { return {aileron, elevator, rudder, throttle}; }
  static ControlInputs from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3]};
  }

  bool operator==(const ControlInputs&) const = default;
};

/// Physical control-surface deflections in radians.
struct SurfaceDeflections {
  double aileron = 0.0;
  double elevator = 0.0;
  double rudder = 0.0;
};

}  // namespace ftfc
