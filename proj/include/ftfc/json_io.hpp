#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ftfc/airframe_config.hpp"
#include "ftfc/environment.hpp"
#include "ftfc/error.hpp"
#include "ftfc/fcs.hpp"
#include "ftfc/perturbation.hpp"

namespace ftfc {

using Json = nlohmann::json;

// Readers start from the built-in defaults and override the keys present;
// unknown keys raise Error(kUnknownParameter) so typos are not ignored.

void require_object(const Json& j, std::string_view what);
void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view what);

template <class T>
void read(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it != j.end()) out = it->get<T>();
}

/// Runs f, converting nlohmann type errors into Error(kSchema).
template <class F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kSchema, std::string(what) + ": " + e.what());
  }
}

Json to_json(const Airframe& airframe);
Airframe airframe_from_json(const Json& j);

Json to_json(const EnvironmentConfig& config);
EnvironmentConfig environment_config_from_json(const Json& j);

Json to_json(const FcsGains& gains);
FcsGains fcs_gains_from_json(const Json& j);

Json to_json(const ParamEdit& edit);
ParamEdit param_edit_from_json(const Json& j);

Json to_json(const FaultScenario& scenario);
FaultScenario fault_scenario_from_json(const Json& j);

Json to_json(const RandomizationSpec& spec);
RandomizationSpec randomization_spec_from_json(const Json& j);

Json to_json(const SetpointSchedule& schedule);
SetpointSchedule setpoint_schedule_from_json(const Json& j);

Json to_json(const RewardConfig& config);
RewardConfig reward_config_from_json(const Json& j);

Json to_json(const TrimResult& trim);

/// {"error": kind, "message": text}
Json error_json(ErrorKind kind, std::string_view message);

/// 64-bit FNV-1a of the canonical (sorted-key, compact) serialization, hex.
std::string content_hash(const Json& j);
std::string hash_bytes(std::string_view bytes);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// Doubles are written with round-trip precision, so dumps reload bit-exactly.
std::string dump(const Json& j, int indent = 2);

}  // namespace ftfc
