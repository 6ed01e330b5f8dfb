#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ftfc/dt/model.hpp"
#include "ftfc/dt/trainer.hpp"
#include "ftfc/json_io.hpp"

namespace ftfc::dt {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::string_view kCheckpointFormat = "ftfc-dt-checkpoint";

struct Checkpoint {
  DtConfig model;
  TrainConfig train;
  std::vector<float> params;
  double rtg_target = 0.0;  ///< default closed-loop return target
  std::vector<double> loss_curve;
  std::string dataset_hash;  ///< content hash of the training data header
};

Json to_json(const DtConfig& config);
DtConfig dt_config_from_json(const Json& j);
Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);

/// JSON document; parameters are written in shortest round-trip form, so
/// every float reloads bit-exactly.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Validates format, version and parameter count (Error(kSchema) or
/// Error(kDimensionMismatch)).
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ftfc::dt
