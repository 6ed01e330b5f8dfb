#include "ftfc/atmosphere.hpp"

#include <algorithm>
#include <cmath>

namespace ftfc {

namespace {
constexpr double kT0 = 518.67;          // deg R
constexpr double kP0 = 2116.22;         // lbf/ft^2
constexpr double kLapse = 0.00356616;   // deg R / ft
constexpr double kGasConstant = 1716.49;  // ft lbf / (slug deg R)
constexpr double kGamma = 1.4;
constexpr double kTropopause = 36089.24;  // ft
constexpr double kStratosphereTop = 65616.8;
}  // namespace

AtmosphereSample standard_atmosphere(double altitude_ft) {
  const double h = std::clamp(altitude_ft, 0.0, kStratosphereTop);
  AtmosphereSample s;
  if (h <= kTropopause) {
    s.temperature = kT0 - kLapse * h;
    s.pressure = kP0 * std::pow(s.temperature / kT0, kGravity / (kLapse * kGasConstant));
  } else {
    const double t11 = kT0 - kLapse * kTropopause;
    const double p11 = kP0 * std::pow(t11 / kT0, kGravity / (kLapse * kGasConstant));
    s.temperature = t11;
    s.pressure = p11 * std::exp(-kGravity * (h - kTropopause) / (kGasConstant * t11));
  }
  s.density = s.pressure / (kGasConstant * s.temperature);
  s.speed_of_sound = std::sqrt(kGamma * kGasConstant * s.temperature);
  return s;
}

}  // namespace ftfc
