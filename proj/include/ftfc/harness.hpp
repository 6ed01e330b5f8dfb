#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftfc/dt/checkpoint.hpp"
#include "ftfc/dt/trainer.hpp"
#include "ftfc/environment.hpp"
#include "ftfc/fcs.hpp"
#include "ftfc/json_io.hpp"

namespace ftfc {

// ---------------------------------------------------------------------------
// Controllers and episode execution

enum class ControllerKind { kFcs, kDt };

ControllerKind parse_controller(std::string_view text);
std::string_view to_string(ControllerKind kind);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::kFcs;
  FcsGains gains;
  std::shared_ptr<const dt::Checkpoint> checkpoint;  ///< required for kDt
  std::optional<double> rtg_target;                  ///< overrides the checkpoint default

  double effective_rtg_target() const;
  /// Content hash identifying the controller (gains, or parameters plus target).
  std::string hash() const;
};

struct RunOptions {
  int workers = 0;   ///< 0: one per hardware thread
  int dt_batch = 8;  ///< episodes stepped in lockstep per batched forward pass
  bool record = false;
  /// Standard deviation of Gaussian noise added to the flown aileron,
  /// elevator and rudder commands. Records keep the controller's own command,
  /// so noisy expert rollouts label off-nominal states with corrections.
  double action_noise = 0.0;
};

struct TrajectoryRecord {
  int timestep = 0;
  std::array<double, kObservationSize> observation{};  ///< o_t, raw channels
  std::array<double, ControlInputs::kSize> action{};   ///< a_t as commanded
  double reward = 0.0;                                 ///< r_t
  double rtg = 0.0;                                    ///< sum of r_t' for t' >= t
  bool done = false;
  bool crash = false;
  bool fault_active = false;
  Setpoint refs;  ///< references o_t was measured against
  std::string scenario;
  std::uint64_t seed = 0;
  int episode = 0;

  bool operator==(const TrajectoryRecord&) const = default;
};

struct EpisodeSummary {
  int index = 0;
  std::string scenario;
  std::uint64_t seed = 0;
  double episode_return = 0.0;
  int steps = 0;
  bool crash = false;
  std::string crash_reason;
  /// Hash of everything the seed realizes before the first step: trim,
  /// schedule and randomization draws. Equal across controllers on paired seeds.
  std::string setup_hash;
};

struct EpisodeResult {
  EpisodeSummary summary;
  std::vector<TrajectoryRecord> records;
};

/// Runs every episode to termination on a worker pool. Results are in spec
/// order regardless of completion order. Failures to set up an episode are
/// reported as crashes with a -1 return.
std::vector<EpisodeResult> run_episodes(const ControllerSpec& controller, const Airframe& airframe,
                                        const EnvironmentConfig& config,
                                        std::span<const EpisodeSpec> specs, const RunOptions& options = {});

/// Sets rtg to the suffix sums of the rewards, accumulated from the end.
void fill_returns_to_go(std::span<TrajectoryRecord> episode);

// ---------------------------------------------------------------------------
// Datasets

inline constexpr std::string_view kTrajectoryFormat = "ftfc-trajectories";
inline constexpr int kTrajectoryVersion = 1;

struct Dataset {
  Json header;
  std::vector<std::vector<TrajectoryRecord>> episodes;
};

struct CollectOptions {
  int episodes = 1;
  std::vector<std::string> scenarios{"nominal"};  ///< assigned round-robin
  RandomizationMode randomization = RandomizationMode::kMild;
  std::uint64_t seed = 0;
  /// Independent base seed for the randomization draws of episode i,
  /// derive_seed(dr_seed, i); unset draws them from the episode seed.
  std::optional<std::uint64_t> dr_seed;
  bool exclude_crashed = true;
  RunOptions run;
};

/// Episode i uses seed derive_seed(seed, i). Throws Error(kEmptyDataset)
/// when every episode crashed and crashed episodes are excluded.
Dataset collect(const ControllerSpec& controller, const Airframe& airframe, const EnvironmentConfig& config,
                const CollectOptions& options);

/// One header line, then one record per line.
std::string serialize_dataset(const Dataset& dataset);
/// Checks format and version, per-episode timestep continuity, reward
/// bounds and that every RTG equals the recomputed suffix sum exactly.
Dataset parse_dataset(std::string_view text);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

Json to_json(const TrajectoryRecord& record);
TrajectoryRecord trajectory_record_from_json(const Json& j);

std::vector<double> episode_returns(const Dataset& dataset);
std::vector<dt::TrainingSequence> to_training_sequences(const Dataset& dataset);

/// Trains on the dataset; the checkpoint's return target is the 90th
/// percentile of the dataset returns. On divergence the last good parameters
/// are written to `last_good` (when given) before the error propagates.
dt::Checkpoint train_policy(const Dataset& dataset, const dt::DtConfig& model, const dt::TrainConfig& train,
                            const dt::ProgressFn& progress = {},
                            const std::optional<std::filesystem::path>& last_good = std::nullopt);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalOptions {
  std::vector<std::string> scenarios;  ///< empty: every named scenario
  int episodes = 100;                  ///< per scenario
  std::uint64_t seed = 0;
  RandomizationMode randomization = RandomizationMode::kNone;
  std::optional<std::uint64_t> dr_seed;  ///< as in CollectOptions
  RunOptions run;
};

struct ScenarioResult {
  std::string scenario;
  int episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;  ///< population
  int crashes = 0;
  double crash_percent = 0.0;
  std::string pairing_hash;  ///< hash of the episode setup hashes
  std::vector<EpisodeSummary> runs;
};

struct EvalReport {
  std::string controller;
  std::string controller_hash;
  std::string env_config_hash;
  std::string airframe_hash;
  std::string randomization;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> dr_seed;
  int episodes_per_scenario = 0;
  std::vector<ScenarioResult> scenarios;
  std::string created;  ///< UTC timestamp, the only non-deterministic field
};

/// Episode i of every scenario uses seed derive_seed(seed, i), so two
/// controllers evaluated with the same options fly identical conditions.
EvalReport evaluate(const ControllerSpec& controller, const Airframe& airframe, const EnvironmentConfig& config,
                    const EvalOptions& options);

Json to_json(const EvalReport& report);
/// Scenario rows with "mean ± std" returns and crash percentages.
std::string format_report_table(const EvalReport& report);

// ---------------------------------------------------------------------------
// Trajectory export

struct SeriesRow {
  int episode = 0;
  std::string scenario;
  std::uint64_t seed = 0;
  int timestep = 0;
  double time = 0.0;  ///< s
  double altitude = 0.0, altitude_ref = 0.0;
  double heading = 0.0, heading_ref = 0.0;
  double airspeed = 0.0, airspeed_ref = 0.0;
  double p = 0.0, q = 0.0, r = 0.0;
  bool fault_active = false;
  int fault_trigger_step = -1;  ///< first faulted timestep of the episode, -1 if none

  bool operator==(const SeriesRow&) const = default;
};

std::vector<SeriesRow> series_rows(const Dataset& dataset, double dt);
std::string format_series_csv(std::span<const SeriesRow> rows);
std::vector<SeriesRow> parse_series_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Run configuration shared by the CLI subcommands

struct RunConfig {
  Airframe airframe = default_airframe();
  EnvironmentConfig environment;
  FcsGains gains;
  dt::DtConfig model;
  dt::TrainConfig train;
  std::vector<std::string> scenarios;
  RandomizationMode randomization = RandomizationMode::kMild;
  bool exclude_crashed = true;
  double action_noise = 0.0;  ///< RunOptions::action_noise for collection
  int workers = 0;
};

/// Every section is optional. "airframe", "environment", "fcs_gains",
/// "model" and "train" may be objects or paths relative to `base_dir`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const RunConfig& config);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace ftfc
