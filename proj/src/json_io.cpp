#include "ftfc/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace ftfc {

void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) fail(ErrorKind::kSchema, std::string(what) + " must be a JSON object");
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(ErrorKind::kUnknownParameter, "unknown key '" + it.key() + "' in " + std::string(what));
  }
}

namespace {

Json to_json(const PidGains& g) {
  return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"integrator_limit", g.integrator_limit},
          {"output_limit", g.output_limit}};
}

PidGains pid_from_json(const Json& j, PidGains g) {
  require_object(j, "pid gains");
  check_keys(j, {"kp", "ki", "kd", "integrator_limit", "output_limit"}, "pid gains");
  read(j, "kp", g.kp);
  read(j, "ki", g.ki);
  read(j, "kd", g.kd);
  read(j, "integrator_limit", g.integrator_limit);
  read(j, "output_limit", g.output_limit);
  return g;
}

std::string_view to_string(EditMode m) { return m == EditMode::kScale ? "scale" : "add"; }

EditMode edit_mode_from(const Json& j) {
  const std::string s = j.get<std::string>();
  if (s == "scale") return EditMode::kScale;
  if (s == "add") return EditMode::kAdd;
  fail(ErrorKind::kSchema, "edit mode must be 'scale' or 'add', got '" + s + "'");
}

Json to_json(const SurfaceConstraint& c) {
  Json j = {{"range_scale", c.range_scale}, {"effectiveness", c.effectiveness}};
  j["jam_angle"] = c.jam_angle ? Json(*c.jam_angle) : Json(nullptr);
  return j;
}

SurfaceConstraint surface_from_json(const Json& j) {
  require_object(j, "surface constraint");
  check_keys(j, {"jam_angle", "range_scale", "effectiveness"}, "surface constraint");
  SurfaceConstraint c;
  if (auto it = j.find("jam_angle"); it != j.end() && !it->is_null()) c.jam_angle = it->get<double>();
  read(j, "range_scale", c.range_scale);
  read(j, "effectiveness", c.effectiveness);
  return c;
}

Json to_json(const Setpoint& s) {
  return {{"altitude", s.altitude}, {"heading", s.heading}, {"airspeed", s.airspeed}};
}

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const Airframe& a) {
  Json j;
  j["name"] = a.name;
  for (const ParamInfo& p : parameter_schema()) {
    j[std::string(p.id)] = get_parameter(a.aero, a.geometry, p.id);
  }
  j["actuators"] = {{"aileron_max", a.actuators.aileron_max},
                    {"elevator_max", a.actuators.elevator_max},
                    {"rudder_max", a.actuators.rudder_max},
                    {"rate_max", a.actuators.rate_max},
                    {"tau", a.actuators.tau},
                    {"thrust_tau", a.actuators.thrust_tau}};
  return j;
}

Airframe airframe_from_json(const Json& j) {
  return guarded("airframe", [&] {
    require_object(j, "airframe");
    Airframe a = default_airframe();
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "name") {
        a.name = it->get<std::string>();
      } else if (key == "actuators") {
        const Json& act = *it;
        require_object(act, "actuators");
        check_keys(act, {"aileron_max", "elevator_max", "rudder_max", "rate_max", "tau", "thrust_tau"},
                   "actuators");
        read(act, "aileron_max", a.actuators.aileron_max);
        read(act, "elevator_max", a.actuators.elevator_max);
        read(act, "rudder_max", a.actuators.rudder_max);
        read(act, "rate_max", a.actuators.rate_max);
        read(act, "tau", a.actuators.tau);
        read(act, "thrust_tau", a.actuators.thrust_tau);
      } else {
        set_parameter(a.aero, a.geometry, key, it->get<double>());
      }
    }
    validate(a.aero);
    validate(a.geometry);
    return a;
  });
}

Json to_json(const RewardConfig& c) {
  auto shape = [](const TrackingShape& s) { return Json{{"k", s.k}, {"scale", s.scale}}; };
  return {{"weights", c.weights},
          {"altitude", shape(c.altitude)},
          {"heading", shape(c.heading)},
          {"airspeed", shape(c.airspeed)},
          {"rate_scale_p", c.rate_scale_p},
          {"rate_scale_q", c.rate_scale_q},
          {"rate_scale_r", c.rate_scale_r},
          {"roll_scale", c.roll_scale},
          {"control_delta_scale", c.control_delta_scale},
          {"gamma", c.gamma}};
}

RewardConfig reward_config_from_json(const Json& j) {
  return guarded("reward config", [&] {
    require_object(j, "reward config");
    check_keys(j, {"weights", "altitude", "heading", "airspeed", "rate_scale_p", "rate_scale_q",
                   "rate_scale_r", "roll_scale", "control_delta_scale", "gamma"},
               "reward config");
    RewardConfig c;
    read(j, "weights", c.weights);
    auto shape = [&](const char* key, TrackingShape& s) {
      auto it = j.find(key);
      if (it == j.end()) return;
      require_object(*it, key);
      check_keys(*it, {"k", "scale"}, key);
      read(*it, "k", s.k);
      read(*it, "scale", s.scale);
    };
    shape("altitude", c.altitude);
    shape("heading", c.heading);
    shape("airspeed", c.airspeed);
    read(j, "rate_scale_p", c.rate_scale_p);
    read(j, "rate_scale_q", c.rate_scale_q);
    read(j, "rate_scale_r", c.rate_scale_r);
    read(j, "roll_scale", c.roll_scale);
    read(j, "control_delta_scale", c.control_delta_scale);
    read(j, "gamma", c.gamma);
    c.validate();
    return c;
  });
}

Json to_json(const ParamEdit& e) {
  return {{"target", e.target}, {"mode", to_string(e.mode)}, {"value", e.value}};
}

ParamEdit param_edit_from_json(const Json& j) {
  return guarded("parameter edit", [&] {
    require_object(j, "parameter edit");
    check_keys(j, {"target", "mode", "value"}, "parameter edit");
    ParamEdit e;
    e.target = j.at("target").get<std::string>();
    if (find_parameter(e.target) == nullptr) {
      fail(ErrorKind::kUnknownParameter, "edit targets unknown parameter '" + e.target + "'");
    }
    e.mode = edit_mode_from(j.at("mode"));
    e.value = j.at("value").get<double>();
    return e;
  });
}

Json to_json(const FaultScenario& s) {
  Json edits = Json::array();
  for (const ParamEdit& e : s.edits) edits.push_back(to_json(e));
  return {{"name", s.name},
          {"edits", edits},
          {"actuators",
           {{"aileron", to_json(s.actuators.aileron)},
            {"elevator", to_json(s.actuators.elevator)},
            {"rudder", to_json(s.actuators.rudder)}}},
          {"trigger_step", s.trigger_step}};
}

FaultScenario fault_scenario_from_json(const Json& j) {
  return guarded("scenario", [&] {
    require_object(j, "scenario");
    check_keys(j, {"name", "edits", "actuators", "trigger_step"}, "scenario");
    FaultScenario s;
    read(j, "name", s.name);
    if (auto it = j.find("edits"); it != j.end()) {
      for (const Json& e : *it) s.edits.push_back(param_edit_from_json(e));
    }
    if (auto it = j.find("actuators"); it != j.end()) {
      require_object(*it, "actuators");
      check_keys(*it, {"aileron", "elevator", "rudder"}, "scenario actuators");
      if (it->contains("aileron")) s.actuators.aileron = surface_from_json(it->at("aileron"));
      if (it->contains("elevator")) s.actuators.elevator = surface_from_json(it->at("elevator"));
      if (it->contains("rudder")) s.actuators.rudder = surface_from_json(it->at("rudder"));
    }
    read(j, "trigger_step", s.trigger_step);
    return s;
  });
}

Json to_json(const RandomizationSpec& spec) {
  Json rows = Json::array();
  for (const RandomizationRow& r : spec.rows) {
    rows.push_back({{"members", r.members}, {"mode", to_string(r.mode)}, {"low", r.low}, {"high", r.high}});
  }
  return {{"rows", rows}};
}

RandomizationSpec randomization_spec_from_json(const Json& j) {
  return guarded("randomization", [&] {
    require_object(j, "randomization");
    check_keys(j, {"rows"}, "randomization");
    RandomizationSpec spec;
    for (const Json& r : j.at("rows")) {
      require_object(r, "randomization row");
      check_keys(r, {"members", "mode", "low", "high"}, "randomization row");
      RandomizationRow row;
      row.members = r.at("members").get<std::vector<std::string>>();
      row.mode = edit_mode_from(r.at("mode"));
      row.low = r.at("low").get<double>();
      row.high = r.at("high").get<double>();
      spec.rows.push_back(std::move(row));
    }
    spec.validate();
    return spec;
  });
}

Json to_json(const SetpointSchedule& s) {
  Json changes = Json::array();
  for (const SetpointChange& c : s.changes) {
    Json e = to_json(c.refs);
    e["step"] = c.step;
    changes.push_back(e);
  }
  return {{"changes", changes}};
}

SetpointSchedule setpoint_schedule_from_json(const Json& j) {
  return guarded("setpoint schedule", [&] {
    require_object(j, "setpoint schedule");
    check_keys(j, {"changes"}, "setpoint schedule");
    SetpointSchedule s;
    for (const Json& c : j.at("changes")) {
      require_object(c, "setpoint change");
      check_keys(c, {"step", "altitude", "heading", "airspeed"}, "setpoint change");
      SetpointChange change;
      change.step = c.at("step").get<int>();
      change.refs.altitude = c.at("altitude").get<double>();
      change.refs.heading = c.at("heading").get<double>();
      change.refs.airspeed = c.at("airspeed").get<double>();
      s.changes.push_back(change);
    }
    return s;
  });
}

Json to_json(const EnvironmentConfig& c) {
  return {
      {"envelope",
       {{"altitude_min", c.envelope.altitude_min},
        {"altitude_max", c.envelope.altitude_max},
        {"airspeed_min", c.envelope.airspeed_min},
        {"airspeed_max", c.envelope.airspeed_max}}},
      {"horizon", c.horizon},
      {"step",
       {{"dt", c.step.dt},
        {"substeps", c.step.substeps},
        {"theta_margin", c.step.theta_margin},
        {"gravity", c.step.gravity}}},
      {"gusts", c.gusts},
      {"gust_sigma", c.gust_sigma},
      {"crash",
       {{"max_rate", c.crash.max_rate},
        {"max_nz", c.crash.max_nz},
        {"min_nz", c.crash.min_nz},
        {"min_altitude", c.crash.min_altitude}}},
      {"reward", to_json(c.reward)},
      {"setpoint_change",
       {{"step", c.setpoint_change.step},
        {"altitude", c.setpoint_change.altitude},
        {"heading", c.setpoint_change.heading},
        {"airspeed", c.setpoint_change.airspeed}}},
      {"fault_trigger_step", c.fault_trigger_step},
      {"randomization_interval", c.randomization_interval},
      {"randomization", to_json(c.randomization)},
      {"scenario_offsets",
       {{"tail_Cm0", c.scenario_offsets.tail_Cm0},
        {"wing_Cl0", c.scenario_offsets.wing_Cl0},
        {"wing_Cn0", c.scenario_offsets.wing_Cn0},
        {"aileron_Cl0", c.scenario_offsets.aileron_Cl0},
        {"rudder_jam", c.scenario_offsets.rudder_jam}}},
      {"trim_attempts", c.trim_attempts},
  };
}

EnvironmentConfig environment_config_from_json(const Json& j) {
  return guarded("environment config", [&] {
    require_object(j, "environment config");
    check_keys(j, {"envelope", "horizon", "step", "gusts", "gust_sigma", "crash", "reward",
                   "setpoint_change", "fault_trigger_step", "randomization_interval",
                   "randomization", "scenario_offsets", "trim_attempts"},
               "environment config");
    EnvironmentConfig c;
    if (auto it = j.find("envelope"); it != j.end()) {
      check_keys(*it, {"altitude_min", "altitude_max", "airspeed_min", "airspeed_max"}, "envelope");
      read(*it, "altitude_min", c.envelope.altitude_min);
      read(*it, "altitude_max", c.envelope.altitude_max);
      read(*it, "airspeed_min", c.envelope.airspeed_min);
      read(*it, "airspeed_max", c.envelope.airspeed_max);
    }
    read(j, "horizon", c.horizon);
    if (auto it = j.find("step"); it != j.end()) {
      check_keys(*it, {"dt", "substeps", "theta_margin", "gravity"}, "step");
      read(*it, "dt", c.step.dt);
      read(*it, "substeps", c.step.substeps);
      read(*it, "theta_margin", c.step.theta_margin);
      read(*it, "gravity", c.step.gravity);
    }
    read(j, "gusts", c.gusts);
    read(j, "gust_sigma", c.gust_sigma);
    if (auto it = j.find("crash"); it != j.end()) {
      check_keys(*it, {"max_rate", "max_nz", "min_nz", "min_altitude"}, "crash");
      read(*it, "max_rate", c.crash.max_rate);
      read(*it, "max_nz", c.crash.max_nz);
      read(*it, "min_nz", c.crash.min_nz);
      read(*it, "min_altitude", c.crash.min_altitude);
    }
    if (auto it = j.find("reward"); it != j.end()) c.reward = reward_config_from_json(*it);
    if (auto it = j.find("setpoint_change"); it != j.end()) {
      check_keys(*it, {"step", "altitude", "heading", "airspeed"}, "setpoint_change");
      read(*it, "step", c.setpoint_change.step);
      read(*it, "altitude", c.setpoint_change.altitude);
      read(*it, "heading", c.setpoint_change.heading);
      read(*it, "airspeed", c.setpoint_change.airspeed);
    }
    read(j, "fault_trigger_step", c.fault_trigger_step);
    read(j, "randomization_interval", c.randomization_interval);
    if (auto it = j.find("randomization"); it != j.end()) {
      c.randomization = randomization_spec_from_json(*it);
    }
    if (auto it = j.find("scenario_offsets"); it != j.end()) {
      check_keys(*it, {"tail_Cm0", "wing_Cl0", "wing_Cn0", "aileron_Cl0", "rudder_jam"},
                 "scenario_offsets");
      read(*it, "tail_Cm0", c.scenario_offsets.tail_Cm0);
      read(*it, "wing_Cl0", c.scenario_offsets.wing_Cl0);
      read(*it, "wing_Cn0", c.scenario_offsets.wing_Cn0);
      read(*it, "aileron_Cl0", c.scenario_offsets.aileron_Cl0);
      read(*it, "rudder_jam", c.scenario_offsets.rudder_jam);
    }
    read(j, "trim_attempts", c.trim_attempts);
    c.validate();
    return c;
  });
}

Json to_json(const FcsGains& g) {
  return {{"altitude", to_json(g.altitude)},
          {"pitch", to_json(g.pitch)},
          {"heading", to_json(g.heading)},
          {"roll", to_json(g.roll)},
          {"airspeed", to_json(g.airspeed)},
          {"yaw_damper", g.yaw_damper},
          {"sideslip", g.sideslip},
          {"washout_tau", g.washout_tau},
          {"airspeed_filter_tau", g.airspeed_filter_tau},
          {"longitudinal", g.longitudinal},
          {"lateral", g.lateral}};
}

FcsGains fcs_gains_from_json(const Json& j) {
  return guarded("fcs gains", [&] {
    require_object(j, "fcs gains");
    check_keys(j, {"altitude", "pitch", "heading", "roll", "airspeed", "yaw_damper", "sideslip",
                   "washout_tau", "airspeed_filter_tau", "longitudinal", "lateral"},
               "fcs gains");
    FcsGains g;
    if (j.contains("altitude")) g.altitude = pid_from_json(j.at("altitude"), g.altitude);
    if (j.contains("pitch")) g.pitch = pid_from_json(j.at("pitch"), g.pitch);
    if (j.contains("heading")) g.heading = pid_from_json(j.at("heading"), g.heading);
    if (j.contains("roll")) g.roll = pid_from_json(j.at("roll"), g.roll);
    if (j.contains("airspeed")) g.airspeed = pid_from_json(j.at("airspeed"), g.airspeed);
    read(j, "yaw_damper", g.yaw_damper);
    read(j, "sideslip", g.sideslip);
    read(j, "washout_tau", g.washout_tau);
    read(j, "airspeed_filter_tau", g.airspeed_filter_tau);
    read(j, "longitudinal", g.longitudinal);
    read(j, "lateral", g.lateral);
    g.validate();
    return g;
  });
}

Json to_json(const TrimResult& t) {
  return {{"alpha", t.alpha},
          {"beta", t.beta},
          {"theta", t.theta},
          {"deflections",
           {{"aileron", t.deflections.aileron},
            {"elevator", t.deflections.elevator},
            {"rudder", t.deflections.rudder}}},
          {"throttle", t.throttle},
          {"controls", t.controls.to_array()},
          {"thrust", t.state.thrust},
          {"residual_norm", t.residual_norm},
          {"iterations", t.iterations}};
}

Json error_json(ErrorKind kind, std::string_view message) {
  return {{"error", to_string(kind)}, {"message", message}};
}

std::string hash_bytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string content_hash(const Json& j) { return hash_bytes(j.dump()); }

std::string dump(const Json& j, int indent) { return j.dump(indent); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kSchema, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

}  // namespace ftfc
