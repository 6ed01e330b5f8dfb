#include "ftfc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <ctime>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "ftfc/dt/policy.hpp"
#include "ftfc/stats.hpp"

namespace ftfc {

ControllerKind parse_controller(std::string_view text) {
  if (text == "fcs") return ControllerKind::kFcs;
  if (text == "dt") return ControllerKind::kDt;
  fail(ErrorKind::kInvalidArgument, "controller must be 'fcs' or 'dt', got '" + std::string(text) + "'");
}

std::string_view to_string(ControllerKind kind) { return kind == ControllerKind::kFcs ? "fcs" : "dt"; }

double ControllerSpec::effective_rtg_target() const {
  if (rtg_target) return *rtg_target;
  return checkpoint ? checkpoint->rtg_target : 0.0;
}

std::string ControllerSpec::hash() const {
  if (kind == ControllerKind::kFcs) return content_hash(Json{{"kind", "fcs"}, {"gains", to_json(gains)}});
  if (!checkpoint) fail(ErrorKind::kUsage, "the dt controller needs a checkpoint");
  return content_hash(Json{{"kind", "dt"},
                           {"checkpoint", hash_bytes(dt::serialize_checkpoint(*checkpoint))},
                           {"rtg_target", effective_rtg_target()}});
}

void fill_returns_to_go(std::span<TrajectoryRecord> episode) {
  double acc = 0.0;
  for (auto it = episode.rbegin(); it != episode.rend(); ++it) {
    acc += it->reward;
    it->rtg = acc;
  }
}

// ---------------------------------------------------------------------------
// Episode execution

namespace {

constexpr std::uint64_t kActionNoiseStream = 0x6e6f697365;

EpisodeSpec make_spec(const std::string& scenario, std::uint64_t index, std::uint64_t base_seed,
                      std::optional<std::uint64_t> dr_seed, RandomizationMode mode, const EnvironmentConfig& config) {
  EpisodeSpec spec;
  spec.scenario = build_scenario(scenario, config.scenario_offsets);
  spec.scenario.trigger_step = config.fault_trigger_step;
  spec.randomization = mode;
  spec.seed = derive_seed(base_seed, index);
  if (dr_seed) spec.randomization_seed = derive_seed(*dr_seed, index);
  return spec;
}

std::string setup_hash(const Environment& env, const EpisodeSpec& spec) {
  Json edits = Json::array();
  for (const auto& e : env.randomization_edits()) edits.push_back(to_json(e));
  return content_hash(Json{{"seed", spec.seed},
                           {"randomization_seed", spec.randomization_seed ? Json(*spec.randomization_seed) : Json()},
                           {"scenario", to_json(spec.scenario)},
                           {"trim", to_json(env.trim())},
                           {"schedule", to_json(env.schedule())},
                           {"randomization", edits}});
}

struct Slot {
  Environment env;
  FlightControlSystem fcs;
  dt::DtContext ctx;
  Observation obs;
  EpisodeResult result;
  std::mt19937_64 noise;
  bool active = false;

  Slot(const Airframe& airframe, const EnvironmentConfig& config, const FcsGains& gains)
      : env(airframe, config), fcs(gains) {}
};

class GroupRunner {
 public:
  GroupRunner(const ControllerSpec& controller, const Airframe& airframe, const EnvironmentConfig& config,
              const RunOptions& options, std::shared_ptr<const std::vector<float>> params)
      : controller_(controller), airframe_(airframe), config_(config), options_(options) {
    if (controller.kind == ControllerKind::kDt) {
      policy_.emplace(controller.checkpoint->model, std::move(params), controller.effective_rtg_target());
    }
  }

  void run(std::span<const EpisodeSpec> specs, std::size_t first, std::span<EpisodeResult> out) {
    std::vector<std::unique_ptr<Slot>> slots;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      auto slot = std::make_unique<Slot>(airframe_, config_, controller_.gains);
      auto& s = slot->result.summary;
      s.index = static_cast<int>(first + i);
      s.scenario = specs[i].scenario.name;
      s.seed = specs[i].seed;
      try {
        slot->obs = slot->env.reset(specs[i]);
        s.setup_hash = setup_hash(slot->env, specs[i]);
        slot->fcs.reset(slot->env.trim().controls, slot->env.trim().theta);
        if (policy_) slot->ctx = policy_->new_context();
        slot->noise.seed(derive_seed(specs[i].seed, kActionNoiseStream));
        slot->active = true;
      } catch (const Error& e) {
        s.crash = true;
        s.crash_reason = std::string(to_string(e.kind()));
        s.episode_return = -1.0;
      }
      slots.push_back(std::move(slot));
    }

    std::vector<Slot*> live;
    std::vector<dt::DtContext*> contexts;
    std::vector<Observation> observations;
    std::vector<ControlInputs> actions;
    for (;;) {
      live.clear();
      for (auto& s : slots) {
        if (s->active) live.push_back(s.get());
      }
      if (live.empty()) break;
      if (policy_) {
        contexts.clear();
        observations.clear();
        for (Slot* s : live) {
          contexts.push_back(&s->ctx);
          observations.push_back(s->obs);
        }
        actions = policy_->act(contexts, observations);
      } else {
        actions.clear();
        for (Slot* s : live) actions.push_back(s->fcs.step(s->obs, config_.step.dt));
      }
      for (std::size_t k = 0; k < live.size(); ++k) advance(*live[k], actions[k]);
    }
    for (std::size_t i = 0; i < slots.size(); ++i) out[i] = std::move(slots[i]->result);
  }

 private:
  void advance(Slot& slot, const ControlInputs& action) {
    const Setpoint refs = slot.env.refs();
    ControlInputs flown = action;
    if (options_.action_noise > 0.0) {
      std::normal_distribution<double> n(0.0, options_.action_noise);
      flown.aileron = std::clamp(action.aileron + n(slot.noise), -1.0, 1.0);
      flown.elevator = std::clamp(action.elevator + n(slot.noise), -1.0, 1.0);
      flown.rudder = std::clamp(action.rudder + n(slot.noise), -1.0, 1.0);
    }
    const StepResult r = slot.env.step(flown);
    auto& summary = slot.result.summary;
    if (options_.record) {
      TrajectoryRecord rec;
      rec.timestep = r.info.step - 1;
      rec.observation = slot.obs.raw;
      rec.action = action.to_array();
      rec.reward = r.reward;
      rec.done = r.terminated;
      rec.crash = r.crash;
      rec.fault_active = r.info.fault_active;
      rec.refs = refs;
      rec.scenario = summary.scenario;
      rec.seed = summary.seed;
      rec.episode = summary.index;
      slot.result.records.push_back(std::move(rec));
    }
    if (policy_) dt::DtPolicy::observe_reward(slot.ctx, r.reward);
    summary.episode_return += r.reward;
    summary.steps = r.info.step;
    slot.obs = r.observation;
    if (r.terminated) {
      summary.crash = r.crash;
      summary.crash_reason = r.info.crash_reason;
      slot.active = false;
      fill_returns_to_go(slot.result.records);
    }
  }

  const ControllerSpec& controller_;
  const Airframe& airframe_;
  const EnvironmentConfig& config_;
  const RunOptions& options_;
  std::optional<dt::DtPolicy> policy_;
};

}  // namespace

std::vector<EpisodeResult> run_episodes(const ControllerSpec& controller, const Airframe& airframe,
                                        const EnvironmentConfig& config, std::span<const EpisodeSpec> specs,
                                        const RunOptions& options) {
  config.validate();
  std::shared_ptr<const std::vector<float>> params;
  if (controller.kind == ControllerKind::kDt) {
    if (!controller.checkpoint) fail(ErrorKind::kUsage, "the dt controller needs a checkpoint");
    params = std::make_shared<const std::vector<float>>(controller.checkpoint->params);
  } else {
    controller.gains.validate();
  }
  if (!(options.action_noise >= 0.0)) fail(ErrorKind::kInvalidArgument, "action_noise must be >= 0");

  const std::size_t group = controller.kind == ControllerKind::kDt
                                ? static_cast<std::size_t>(std::max(1, options.dt_batch))
                                : 1;
  const std::size_t groups = (specs.size() + group - 1) / group;
  int workers = options.workers > 0 ? options.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(1, groups)));

  std::vector<EpisodeResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      GroupRunner runner(controller, airframe, config, options, params);
      for (std::size_t g; (g = next.fetch_add(1)) < groups;) {
        const std::size_t first = g * group;
        const std::size_t n = std::min(group, specs.size() - first);
        runner.run(specs.subspan(first, n), first, std::span(results).subspan(first, n));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(groups);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

Json refs_json(const Setpoint& s) { return Json::array({s.altitude, s.heading, s.airspeed}); }

Json record_schema() {
  return Json::array({"timestep", "observation", "action", "reward", "rtg", "done", "crash", "fault_active",
                      "refs", "scenario", "seed", "episode"});
}

Json observation_channels() {
  Json names = Json::array();
  for (const auto& c : observation_scaling()) names.push_back(c.name);
  return names;
}

Json header_without_timestamp(Json header) {
  header.erase("created");
  return header;
}

}  // namespace

Json to_json(const TrajectoryRecord& r) {
  return {{"timestep", r.timestep}, {"observation", r.observation}, {"action", r.action},
          {"reward", r.reward},     {"rtg", r.rtg},                 {"done", r.done},
          {"crash", r.crash},       {"fault_active", r.fault_active}, {"refs", refs_json(r.refs)},
          {"scenario", r.scenario}, {"seed", r.seed},               {"episode", r.episode}};
}

TrajectoryRecord trajectory_record_from_json(const Json& j) {
  return guarded("trajectory record", [&] {
    require_object(j, "trajectory record");
    for (const auto& key : record_schema()) {
      if (!j.contains(key.get<std::string>())) {
        fail(ErrorKind::kSchema, "trajectory record is missing '" + key.get<std::string>() + "'");
      }
    }
    check_keys(j, {"timestep", "observation", "action", "reward", "rtg", "done", "crash", "fault_active", "refs",
                   "scenario", "seed", "episode"},
               "trajectory record");
    TrajectoryRecord r;
    r.timestep = j.at("timestep").get<int>();
    r.observation = j.at("observation").get<std::array<double, kObservationSize>>();
    r.action = j.at("action").get<std::array<double, ControlInputs::kSize>>();
    r.reward = j.at("reward").get<double>();
    r.rtg = j.at("rtg").get<double>();
    r.done = j.at("done").get<bool>();
    r.crash = j.at("crash").get<bool>();
    r.fault_active = j.at("fault_active").get<bool>();
    const auto refs = j.at("refs").get<std::array<double, 3>>();
    r.refs = {refs[0], refs[1], refs[2]};
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.episode = j.at("episode").get<int>();
    return r;
  });
}

Dataset collect(const ControllerSpec& controller, const Airframe& airframe, const EnvironmentConfig& config,
                const CollectOptions& options) {
  if (options.episodes < 1) fail(ErrorKind::kInvalidArgument, "collect needs at least one episode");
  if (options.scenarios.empty()) fail(ErrorKind::kInvalidArgument, "collect needs at least one scenario");
  std::vector<EpisodeSpec> specs;
  for (int i = 0; i < options.episodes; ++i) {
    const auto& name = options.scenarios[static_cast<std::size_t>(i) % options.scenarios.size()];
    specs.push_back(make_spec(name, static_cast<std::uint64_t>(i), options.seed, options.dr_seed,
                              options.randomization, config));
  }
  RunOptions run = options.run;
  run.record = true;
  auto results = run_episodes(controller, airframe, config, specs, run);

  Dataset out;
  int crashed = 0;
  for (auto& r : results) {
    if (r.summary.crash) ++crashed;
    if (r.records.empty() || (r.summary.crash && options.exclude_crashed)) continue;
    out.episodes.push_back(std::move(r.records));
  }
  if (out.episodes.empty()) {
    fail(ErrorKind::kEmptyDataset, "all " + std::to_string(options.episodes) + " collected episodes crashed");
  }
  out.header = {{"format", kTrajectoryFormat},
                {"version", kTrajectoryVersion},
                {"schema_hash", content_hash(record_schema())},
                {"observation_channels", observation_channels()},
                {"env_config_hash", content_hash(to_json(config))},
                {"airframe_hash", content_hash(to_json(airframe))},
                {"controller", to_string(controller.kind)},
                {"controller_hash", controller.hash()},
                {"randomization", to_string(options.randomization)},
                {"scenarios", options.scenarios},
                {"seed", options.seed},
                {"dr_seed", options.dr_seed ? Json(*options.dr_seed) : Json()},
                {"dt", config.step.dt},
                {"fault_trigger_step", config.fault_trigger_step},
                {"episodes_requested", options.episodes},
                {"episodes_written", out.episodes.size()},
                {"episodes_crashed", crashed},
                {"exclude_crashed", options.exclude_crashed},
                {"action_noise", options.run.action_noise},
                {"created", utc_timestamp()}};
  return out;
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out = dump(dataset.header, -1);
  out += '\n';
  for (const auto& episode : dataset.episodes) {
    for (const auto& r : episode) {
      out += dump(to_json(r), -1);
      out += '\n';
    }
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  Dataset out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto where = [&] { return "line " + std::to_string(line_no); };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const Json j = guarded(where(), [&] { return Json::parse(line); });
    if (line_no == 1) {
      if (!j.is_object() || j.value("format", std::string()) != kTrajectoryFormat) {
        fail(ErrorKind::kSchema, "not a trajectory file (bad header)");
      }
      if (j.value("version", -1) != kTrajectoryVersion) {
        fail(ErrorKind::kSchema, "unsupported trajectory file version");
      }
      if (j.value("schema_hash", std::string()) != content_hash(record_schema())) {
        fail(ErrorKind::kSchema, "trajectory record schema hash mismatch");
      }
      out.header = j;
      continue;
    }
    TrajectoryRecord r = trajectory_record_from_json(j);
    if (!(r.reward >= -1.0 && r.reward <= 0.0)) fail(ErrorKind::kSchema, where() + ": reward outside [-1, 0]");
    const bool fresh = out.episodes.empty() || out.episodes.back().back().done;
    if (fresh) {
      if (r.timestep != 0) fail(ErrorKind::kSchema, where() + ": episode does not start at timestep 0");
      out.episodes.emplace_back();
    } else {
      const auto& prev = out.episodes.back().back();
      if (r.episode != prev.episode || r.timestep != prev.timestep + 1) {
        fail(ErrorKind::kSchema, where() + ": timesteps are not consecutive within the episode");
      }
    }
    out.episodes.back().push_back(std::move(r));
  }
  if (out.header.is_null()) fail(ErrorKind::kSchema, "empty trajectory file");
  if (!out.episodes.empty() && !out.episodes.back().back().done) {
    fail(ErrorKind::kSchema, "last episode is truncated (no done record)");
  }
  for (const auto& episode : out.episodes) {
    std::vector<TrajectoryRecord> check = episode;
    fill_returns_to_go(check);
    for (std::size_t t = 0; t < episode.size(); ++t) {
      if (check[t].rtg != episode[t].rtg) {
        fail(ErrorKind::kSchema, "episode " + std::to_string(episode[t].episode) + " timestep " +
                                     std::to_string(t) + ": rtg is not the suffix sum of rewards");
      }
    }
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_text_file(path, serialize_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_text_file(path)); }

std::vector<double> episode_returns(const Dataset& dataset) {
  std::vector<double> out;
  for (const auto& episode : dataset.episodes) out.push_back(episode.empty() ? 0.0 : episode.front().rtg);
  return out;
}

std::vector<dt::TrainingSequence> to_training_sequences(const Dataset& dataset) {
  std::vector<dt::TrainingSequence> out;
  for (const auto& episode : dataset.episodes) {
    dt::TrainingSequence s;
    for (const auto& r : episode) {
      Observation o;
      o.raw = r.observation;
      for (double x : o.normalized()) s.obs.push_back(static_cast<float>(x));
      const auto a = dt::encode_action(r.action);
      s.act.insert(s.act.end(), a.begin(), a.end());
      s.rtg.push_back(static_cast<float>(r.rtg / dt::kRtgScale));
      s.timestep.push_back(r.timestep);
    }
    out.push_back(std::move(s));
  }
  return out;
}

dt::Checkpoint train_policy(const Dataset& dataset, const dt::DtConfig& model, const dt::TrainConfig& train,
                            const dt::ProgressFn& progress, const std::optional<std::filesystem::path>& last_good) {
  const auto sequences = to_training_sequences(dataset);
  const auto returns = episode_returns(dataset);
  if (returns.empty()) fail(ErrorKind::kEmptyDataset, "dataset holds no episodes");
  dt::Checkpoint ck;
  ck.model = model;
  ck.train = train;
  ck.rtg_target = percentile(returns, 0.9);
  ck.dataset_hash = content_hash(header_without_timestamp(dataset.header));

  dt::Trainer trainer(model, train, sequences);
  const int total = trainer.total_updates();
  try {
    for (int i = 0; i < total; ++i) {
      const double loss = trainer.step();
      if (progress) progress(i + 1, total, loss);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kTrainingDivergence && last_good) {
      ck.params = trainer.params();
      ck.loss_curve = trainer.loss_curve();
      dt::save_checkpoint(*last_good, ck);
    }
    throw;
  }
  ck.params = trainer.params();
  ck.loss_curve = trainer.loss_curve();
  return ck;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate(const ControllerSpec& controller, const Airframe& airframe, const EnvironmentConfig& config,
                    const EvalOptions& options) {
  if (options.episodes < 1) fail(ErrorKind::kInvalidArgument, "evaluate needs at least one episode per scenario");
  std::vector<std::string> scenarios = options.scenarios;
  if (scenarios.empty()) {
    for (auto name : scenario_names()) scenarios.emplace_back(name);
  }
  std::vector<EpisodeSpec> specs;
  for (const auto& name : scenarios) {
    for (int i = 0; i < options.episodes; ++i) {
      specs.push_back(make_spec(name, static_cast<std::uint64_t>(i), options.seed, options.dr_seed,
                                options.randomization, config));
    }
  }
  RunOptions run = options.run;
  run.record = false;
  const auto results = run_episodes(controller, airframe, config, specs, run);

  EvalReport report;
  report.controller = std::string(to_string(controller.kind));
  report.controller_hash = controller.hash();
  report.env_config_hash = content_hash(to_json(config));
  report.airframe_hash = content_hash(to_json(airframe));
  report.randomization = std::string(to_string(options.randomization));
  report.seed = options.seed;
  report.dr_seed = options.dr_seed;
  report.episodes_per_scenario = options.episodes;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    ScenarioResult row;
    row.scenario = scenarios[s];
    RunningStats stats;
    Json setups = Json::array();
    for (int i = 0; i < options.episodes; ++i) {
      const auto& e = results[s * options.episodes + i].summary;
      stats.push(e.episode_return);
      row.crashes += e.crash ? 1 : 0;
      setups.push_back(e.setup_hash);
      row.runs.push_back(e);
    }
    row.episodes = static_cast<int>(stats.count());
    row.mean_return = stats.mean();
    row.std_return = stats.stddev();
    row.crash_percent = 100.0 * row.crashes / row.episodes;
    row.pairing_hash = content_hash(setups);
    report.scenarios.push_back(std::move(row));
  }
  report.created = utc_timestamp();
  return report;
}

Json to_json(const EvalReport& r) {
  Json scenarios = Json::array();
  for (const auto& s : r.scenarios) {
    Json runs = Json::array();
    for (const auto& e : s.runs) {
      runs.push_back({{"index", e.index},
                      {"seed", e.seed},
                      {"return", e.episode_return},
                      {"steps", e.steps},
                      {"crash", e.crash},
                      {"crash_reason", e.crash_reason},
                      {"setup_hash", e.setup_hash}});
    }
    scenarios.push_back({{"scenario", s.scenario},
                         {"episodes", s.episodes},
                         {"mean_return", s.mean_return},
                         {"std_return", s.std_return},
                         {"crashes", s.crashes},
                         {"crash_percent", s.crash_percent},
                         {"pairing_hash", s.pairing_hash},
                         {"runs", runs}});
  }
  return {{"format", "ftfc-eval-report"},
          {"version", 1},
          {"controller", r.controller},
          {"controller_hash", r.controller_hash},
          {"env_config_hash", r.env_config_hash},
          {"airframe_hash", r.airframe_hash},
          {"randomization", r.randomization},
          {"seed", r.seed},
          {"dr_seed", r.dr_seed ? Json(*r.dr_seed) : Json()},
          {"episodes_per_scenario", r.episodes_per_scenario},
          {"scenarios", scenarios},
          {"created", r.created}};
}

std::string format_report_table(const EvalReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "controller %s  seed %llu  episodes/scenario %d  randomization %s\n",
                r.controller.c_str(), static_cast<unsigned long long>(r.seed), r.episodes_per_scenario,
                r.randomization.c_str());
  out += line;
  std::snprintf(line, sizeof line, "%-26s %24s %9s\n", "scenario", "return (mean ± std)", "crash %");
  out += line;
  for (const auto& s : r.scenarios) {
    char ret[64];
    std::snprintf(ret, sizeof ret, "%.2f ± %.2f", s.mean_return, s.std_return);
    // "±" is two bytes but one column wide.
    std::snprintf(line, sizeof line, "%-26s %23s %8.2f%%\n", s.scenario.c_str(), ret, s.crash_percent);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory export

std::vector<SeriesRow> series_rows(const Dataset& dataset, double dt) {
  std::vector<SeriesRow> out;
  for (const auto& episode : dataset.episodes) {
    int trigger = -1;
    for (const auto& r : episode) {
      if (r.fault_active) {
        trigger = r.timestep;
        break;
      }
    }
    for (const auto& r : episode) {
      Observation o;
      o.raw = r.observation;
      SeriesRow row;
      row.episode = r.episode;
      row.scenario = r.scenario;
      row.seed = r.seed;
      row.timestep = r.timestep;
      row.time = r.timestep * dt;
      row.altitude = o[ObsChannel::kAltitude];
      row.altitude_ref = r.refs.altitude;
      row.heading = wrap_angle(r.refs.heading - o[ObsChannel::kErrorHeading]);
      row.heading_ref = r.refs.heading;
      row.airspeed = r.refs.airspeed - o[ObsChannel::kErrorAirspeed];
      row.airspeed_ref = r.refs.airspeed;
      row.p = o[ObsChannel::kP];
      row.q = o[ObsChannel::kQ];
      row.r = o[ObsChannel::kR];
      row.fault_active = r.fault_active;
      row.fault_trigger_step = trigger;
      out.push_back(std::move(row));
    }
  }
  return out;
}

namespace {

constexpr std::string_view kCsvHeader =
    "episode,scenario,seed,timestep,time,h,h_ref,psi,psi_ref,vt,vt_ref,p,q,r,fault_active,fault_trigger_step";

void append_number(std::string& out, double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, r.ptr);
}

template <class T>
T parse_field(std::string_view s, std::size_t line) {
  T value{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), value);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    fail(ErrorKind::kSchema, "csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

std::string format_series_csv(std::span<const SeriesRow> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.episode) + ',' + r.scenario + ',' + std::to_string(r.seed) + ',' +
           std::to_string(r.timestep);
    for (double x : {r.time, r.altitude, r.altitude_ref, r.heading, r.heading_ref, r.airspeed, r.airspeed_ref, r.p,
                     r.q, r.r}) {
      out += ',';
      append_number(out, x);
    }
    out += r.fault_active ? ",1," : ",0,";
    out += std::to_string(r.fault_trigger_step);
    out += '\n';
  }
  return out;
}

std::vector<SeriesRow> parse_series_csv(std::string_view text) {
  std::vector<SeriesRow> out;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view l = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (line == 1) {
      if (l != kCsvHeader) fail(ErrorKind::kSchema, "unexpected csv header");
      continue;
    }
    if (l.empty()) continue;
    std::vector<std::string_view> f;
    for (std::size_t a = 0;;) {
      const std::size_t b = l.find(',', a);
      f.push_back(l.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
      if (b == std::string_view::npos) break;
      a = b + 1;
    }
    if (f.size() != 16) fail(ErrorKind::kSchema, "csv line " + std::to_string(line) + ": expected 16 fields");
    SeriesRow r;
    r.episode = parse_field<int>(f[0], line);
    r.scenario = std::string(f[1]);
    r.seed = parse_field<std::uint64_t>(f[2], line);
    r.timestep = parse_field<int>(f[3], line);
    double* dst[] = {&r.time, &r.altitude, &r.altitude_ref, &r.heading, &r.heading_ref,
                     &r.airspeed, &r.airspeed_ref, &r.p, &r.q, &r.r};
    for (std::size_t k = 0; k < 10; ++k) *dst[k] = parse_field<double>(f[4 + k], line);
    r.fault_active = parse_field<int>(f[14], line) != 0;
    r.fault_trigger_step = parse_field<int>(f[15], line);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

Json section(const Json& j, const char* key, const std::filesystem::path& base) {
  const Json& v = j.at(key);
  if (v.is_string()) {
    const std::filesystem::path p(v.get<std::string>());
    return read_json_file(p.is_absolute() ? p : base / p);
  }
  return v;
}

}  // namespace

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  return guarded("run config", [&] {
    require_object(j, "run config");
    check_keys(j,
               {"airframe", "environment", "fcs_gains", "model", "train", "scenarios", "randomization",
                "exclude_crashed", "action_noise", "workers"},
               "run config");
    RunConfig c;
    if (j.contains("airframe")) c.airframe = airframe_from_json(section(j, "airframe", base_dir));
    if (j.contains("environment")) c.environment = environment_config_from_json(section(j, "environment", base_dir));
    if (j.contains("fcs_gains")) c.gains = fcs_gains_from_json(section(j, "fcs_gains", base_dir));
    if (j.contains("model")) c.model = dt::dt_config_from_json(section(j, "model", base_dir));
    if (j.contains("train")) c.train = dt::train_config_from_json(section(j, "train", base_dir));
    read(j, "scenarios", c.scenarios);
    if (j.contains("randomization")) c.randomization = parse_randomization_mode(j.at("randomization").get<std::string>());
    read(j, "exclude_crashed", c.exclude_crashed);
    read(j, "action_noise", c.action_noise);
    if (!(c.action_noise >= 0.0)) fail(ErrorKind::kInvalidArgument, "action_noise must be >= 0");
    read(j, "workers", c.workers);
    for (const auto& s : c.scenarios) build_scenario(s);
    return c;
  });
}

Json to_json(const RunConfig& c) {
  return {{"airframe", to_json(c.airframe)},
          {"environment", to_json(c.environment)},
          {"fcs_gains", to_json(c.gains)},
          {"model", dt::to_json(c.model)},
          {"train", dt::to_json(c.train)},
          {"scenarios", c.scenarios},
          {"randomization", to_string(c.randomization)},
          {"exclude_crashed", c.exclude_crashed},
          {"action_noise", c.action_noise},
          {"workers", c.workers}};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace ftfc
