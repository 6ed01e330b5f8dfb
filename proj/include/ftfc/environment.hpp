#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ftfc/airframe_config.hpp"
#include "ftfc/controls.hpp"
#include "ftfc/dynamics.hpp"
#include "ftfc/perturbation.hpp"

namespace ftfc {

/// Raw observation channels, in the order they are fed to policies.
enum class ObsChannel : std::size_t {
  kErrorAltitude,
  kErrorHeading,
  kErrorAirspeed,
  kAltitude,
  kAlpha,
  kBeta,
  kPhi,
  kTheta,
  kP,
  kQ,
  kR,
  kU,
  kV,
  kW,
  kNx,
  kNy,
  kNz,
};

inline constexpr std::size_t kObservationSize = 17;

/// Tracking errors are reference minus measured value (ft, rad, ft/s); the
/// heading error is wrapped to [-pi, pi).
struct Observation {
  std::array<double, kObservationSize> raw{};

  double operator[](ObsChannel c) const { return raw[static_cast<std::size_t>(c)]; }
  double& operator[](ObsChannel c) { return raw[static_cast<std::size_t>(c)]; }

  /// Per-channel affine map onto [-1, 1] over the documented ranges
  /// (see observation_scaling()).
  std::array<double, kObservationSize> normalized() const;
  static Observation denormalize(const std::array<double, kObservationSize>& normalized);

  bool operator==(const Observation&) const = default;
};

struct ChannelScaling {
  const char* name;
  double center;
  double half_range;
};

std::span<const ChannelScaling, kObservationSize> observation_scaling();

// ---------------------------------------------------------------------------
// Reward

struct TrackingShape {
  double k = 1.0;
  double scale = 1.0;  ///< lambda_s, in the channel's units

  bool operator==(const TrackingShape&) const = default;
};

struct RewardConfig {
  std::array<double, 5> weights{0.24, 0.2, 0.16, 0.2, 0.2};
  TrackingShape altitude{1.0, 60.0};
  TrackingShape heading{1.0, 0.35};
  TrackingShape airspeed{1.0, 16.0};
  double rate_scale_p = 0.5;  ///< rad/s
  double rate_scale_q = 0.5;
  double rate_scale_r = 0.5;
  double roll_scale = 0.5;    ///< rad
  std::array<double, 4> control_delta_scale{0.1, 0.1, 0.1, 0.1};
  double gamma = 0.99;  ///< diagnostics only; returns-to-go are undiscounted

  void validate() const;
  bool operator==(const RewardConfig&) const = default;
};

struct RewardComponents {
  double altitude = 0.0;
  double heading = 0.0;
  double airspeed = 0.0;
  double attitude = 0.0;
  double control = 0.0;
};

/// -1 + exp(-k |error / scale|).
double tracking_reward(double error, double k, double scale);
/// exp(-(x / scale)^2).
double gaussian_kernel(double x, double scale);
/// -1 + geometric mean of the p, q, r and roll-angle kernels.
double attitude_reward(double p, double q, double r, double phi, const RewardConfig& config);
/// -1 + geometric mean of the four command-change kernels.
double control_reward(const std::array<double, 4>& deltas, const RewardConfig& config);
double total_reward(const RewardComponents& components, const RewardConfig& config);

RewardComponents reward_components(const Observation& obs, const ControlInputs& action,
                                   const ControlInputs& previous_action,
                                   const RewardConfig& config);

// ---------------------------------------------------------------------------
// Episode configuration

struct Setpoint {
  double altitude = 0.0;
  double heading = 0.0;
  double airspeed = 0.0;
  bool operator==(const Setpoint&) const = default;
};

struct SetpointChange {
  int step = 0;
  Setpoint refs;
  bool operator==(const SetpointChange&) const = default;
};

/// Reference changes; the entry with the largest step <= t is active at t.
struct SetpointSchedule {
  std::vector<SetpointChange> changes;

  Setpoint active(int step) const;
  void validate(const FlightEnvelope& envelope) const;
  bool operator==(const SetpointSchedule&) const = default;
};

struct CrashLimits {
  double max_rate = 6.0;     ///< |p|, |q|, |r|, rad/s
  double max_nz = 8.0;       ///< g
  double min_nz = -4.0;      ///< g
  double min_altitude = 1000.0;  ///< ft

  bool operator==(const CrashLimits&) const = default;
};

struct SetpointChangeRanges {
  int step = 200;
  double altitude = 1000.0;  ///< max |delta h|, ft
  double heading = 0.5235987755982988;  ///< max |delta psi|, rad
  double airspeed = 20.0;    ///< max |delta V_T|, ft/s

  bool operator==(const SetpointChangeRanges&) const = default;
};

struct EnvironmentConfig {
  FlightEnvelope envelope;
  int horizon = 1000;
  StepConfig step;
  bool gusts = true;
  double gust_sigma = 2.0;  ///< ft/s per NED axis
  CrashLimits crash;
  RewardConfig reward;
  SetpointChangeRanges setpoint_change;
  int fault_trigger_step = 100;
  int randomization_interval = 500;  ///< mid-episode redraw period, 0 disables
  RandomizationSpec randomization = RandomizationSpec::training_ranges();
  ScenarioOffsets scenario_offsets;
  int trim_attempts = 8;

  void validate() const;
};

/// Inputs for one episode. Unset optionals are drawn from the seed.
struct EpisodeSpec {
  FaultScenario scenario;
  RandomizationMode randomization = RandomizationMode::kNone;
  std::optional<std::vector<ParamEdit>> randomization_edits;
  std::optional<SetpointSchedule> schedule;
  std::optional<TrimTarget> initial;
  std::uint64_t seed = 0;
  /// Seeds the randomization draws instead of `seed` when set.
  std::optional<std::uint64_t> randomization_seed;
};

struct StepInfo {
  int step = 0;  ///< steps completed
  bool fault_active = false;
  bool randomization_redrawn = false;
  std::string crash_reason;
  Setpoint refs;
  RewardComponents reward_terms;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool crash = false;
  StepInfo info;
};

/// Derives an independent sub-seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// The tracking POMDP. Instances are single-threaded and own all their
/// randomness; two instances reset with the same EpisodeSpec evolve
/// identically under identical actions.
class Environment {
 public:
  explicit Environment(Airframe airframe = default_airframe(), EnvironmentConfig config = {});

  Observation reset(const EpisodeSpec& spec);
  /// Throws Error(kUsage) after termination or before reset.
  StepResult step(const ControlInputs& action);

  const AircraftState& state() const { return state_; }
  const AirData& air() const { return air_; }
  const Plant& plant() const { return plant_; }
  const Observation& observation() const { return observation_; }
  Setpoint refs() const { return schedule_.active(step_); }
  const SetpointSchedule& schedule() const { return schedule_; }
  const TrimResult& trim() const { return trim_; }
  const ControlInputs& previous_action() const { return previous_action_; }
  const std::vector<ParamEdit>& randomization_edits() const { return dr_edits_; }
  const FaultScenario& scenario() const { return spec_.scenario; }
  const EnvironmentConfig& config() const { return config_; }
  const Airframe& airframe() const { return airframe_; }
  int steps() const { return step_; }
  bool terminated() const { return terminated_; }
  bool fault_active() const { return fault_active_; }

 private:
  void rebuild_plant();
  Observation observe() const;

  Airframe airframe_;
  EnvironmentConfig config_;
  EpisodeSpec spec_;
  Plant plant_;
  AircraftState state_;
  AirData air_;
  Observation observation_;
  SetpointSchedule schedule_;
  TrimResult trim_;
  ControlInputs previous_action_;
  std::vector<ParamEdit> dr_edits_;
  std::mt19937_64 dr_rng_;
  WindGust gust_;
  int step_ = 0;
  bool fault_active_ = false;
  bool terminated_ = true;
  bool has_reset_ = false;
};

}  // namespace ftfc
