#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ftfc/harness.hpp"
#include "ftfc/stats.hpp"

using namespace ftfc;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> scenarios;
  std::string controller = "fcs";
  std::string checkpoint;
  std::optional<double> rtg_target;
  int episodes = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> dr_seed;
  std::string randomization;
  std::string out;
  std::string data;
  int workers = 0;
  bool keep_crashed = false;
  double altitude = 10000.0;
  double airspeed = 300.0;
  double heading = 0.0;
  int log_every = 50;
};

RunConfig load_config(const Options& o) {
  if (o.config.empty()) return {};
  const std::filesystem::path path(o.config);
  return run_config_from_json(read_json_file(path), path.parent_path());
}

ControllerSpec controller_spec(const Options& o, const RunConfig& cfg) {
  ControllerSpec spec;
  spec.kind = parse_controller(o.controller);
  spec.gains = cfg.gains;
  spec.rtg_target = o.rtg_target;
  if (spec.kind == ControllerKind::kDt) {
    if (o.checkpoint.empty()) fail(ErrorKind::kUsage, "--controller dt requires --checkpoint");
    spec.checkpoint = std::make_shared<const dt::Checkpoint>(dt::load_checkpoint(o.checkpoint));
  }
  return spec;
}

RandomizationMode randomization(const Options& o, RandomizationMode fallback) {
  return o.randomization.empty() ? fallback : parse_randomization_mode(o.randomization);
}

void emit(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << dump(j) << '\n';
  } else {
    write_text_file(path, dump(j) + "\n");
  }
}

Json dataset_summary(const Dataset& d) {
  const auto returns = episode_returns(d);
  RunningStats s;
  for (double r : returns) s.push(r);
  return {{"episodes_written", d.episodes.size()},
          {"episodes_requested", d.header.at("episodes_requested")},
          {"episodes_crashed", d.header.at("episodes_crashed")},
          {"mean_return", s.mean()},
          {"std_return", s.stddev()},
          {"return_p90", returns.empty() ? 0.0 : percentile(returns, 0.9)}};
}

void run_trim(const Options& o) {
  const RunConfig cfg = load_config(o);
  Plant plant = cfg.airframe.plant();
  if (!o.scenarios.empty()) {
    plant = apply_scenario(plant, build_scenario(o.scenarios.front(), cfg.environment.scenario_offsets));
  }
  const TrimResult t = find_trim({o.altitude, o.airspeed, o.heading}, plant, cfg.environment.envelope);
  emit(to_json(t), o.out);
}

Dataset run_collection(const Options& o, const RunConfig& cfg, int default_episodes,
                       RandomizationMode default_mode, bool exclude_crashed, double action_noise = 0.0) {
  CollectOptions c;
  c.episodes = o.episodes > 0 ? o.episodes : default_episodes;
  if (!o.scenarios.empty()) {
    c.scenarios = o.scenarios;
  } else if (!cfg.scenarios.empty()) {
    c.scenarios = cfg.scenarios;
  }
  c.randomization = randomization(o, default_mode);
  c.seed = o.seed.value_or(0);
  c.dr_seed = o.dr_seed;
  c.exclude_crashed = exclude_crashed;
  c.run.workers = o.workers > 0 ? o.workers : cfg.workers;
  c.run.action_noise = action_noise;
  return collect(controller_spec(o, cfg), cfg.airframe, cfg.environment, c);
}

void run_simulate(const Options& o) {
  const RunConfig cfg = load_config(o);
  const Dataset d = run_collection(o, cfg, 1, RandomizationMode::kNone, false);
  if (o.out.empty()) {
    std::cout << serialize_dataset(d);
    return;
  }
  save_dataset(o.out, d);
  std::cout << dump(dataset_summary(d)) << '\n';
}

void run_collect(const Options& o) {
  const RunConfig cfg = load_config(o);
  const Dataset d = run_collection(o, cfg, 200, cfg.randomization, cfg.exclude_crashed && !o.keep_crashed, cfg.action_noise);
  save_dataset(o.out, d);
  std::cout << dump(dataset_summary(d)) << '\n';
}

void run_train(const Options& o) {
  RunConfig cfg = load_config(o);
  if (o.seed) cfg.train.seed = *o.seed;
  const Dataset d = load_dataset(o.data);
  const std::filesystem::path last_good = o.out + ".last_good";
  const int every = std::max(1, o.log_every);
  auto progress = [every](int update, int total, double loss) {
    if (update % every == 0 || update == total) {
      std::cerr << dump(Json{{"update", update}, {"total", total}, {"loss", loss}}, -1) << '\n';
    }
  };
  const dt::Checkpoint ck = train_policy(d, cfg.model, cfg.train, progress, last_good);
  dt::save_checkpoint(o.out, ck);
  std::cout << dump(Json{{"checkpoint", o.out},
                         {"parameters", ck.params.size()},
                         {"updates", ck.loss_curve.size()},
                         {"final_loss", ck.loss_curve.empty() ? 0.0 : ck.loss_curve.back()},
                         {"rtg_target", ck.rtg_target},
                         {"dataset_hash", ck.dataset_hash}})
            << '\n';
}

void run_evaluate(const Options& o) {
  const RunConfig cfg = load_config(o);
  EvalOptions e;
  e.scenarios = !o.scenarios.empty() ? o.scenarios : cfg.scenarios;
  e.episodes = o.episodes > 0 ? o.episodes : 100;
  e.seed = o.seed.value_or(0);
  e.dr_seed = o.dr_seed;
  e.randomization = randomization(o, RandomizationMode::kNone);
  e.run.workers = o.workers > 0 ? o.workers : cfg.workers;
  const EvalReport report = evaluate(controller_spec(o, cfg), cfg.airframe, cfg.environment, e);
  if (!o.out.empty()) write_text_file(o.out, dump(to_json(report)) + "\n");
  std::cout << format_report_table(report);
}

void run_export(const Options& o) {
  const Dataset d = load_dataset(o.data);
  const double dt = d.header.value("dt", StepConfig{}.dt);
  const std::string csv = format_series_csv(series_rows(d, dt));
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(o.out, csv);
  }
}

int report_error(std::string_view kind, const std::string& message, int code) {
  std::cerr << dump(Json{{"error", kind}, {"message", message}}, -1) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault-tolerant flight control: simulation, expert collection, decision-transformer training "
               "and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "run config JSON");
    cmd->add_option("--seed", o.seed, "base seed");
  };
  auto episodes = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", o.scenarios, "scenario name (repeatable)");
    cmd->add_option("--controller", o.controller, "fcs or dt")->check(CLI::IsMember({"fcs", "dt"}));
    cmd->add_option("--checkpoint", o.checkpoint, "decision-transformer checkpoint");
    cmd->add_option("--rtg-target", o.rtg_target, "return-to-go target for the dt controller");
    cmd->add_option("--episodes", o.episodes, "episode count")->check(CLI::PositiveNumber);
    cmd->add_option("--dr-seed", o.dr_seed, "independent base seed for randomization draws");
    cmd->add_option("--randomization", o.randomization, "none, mild or full")
        ->check(CLI::IsMember({"none", "mild", "full"}));
    cmd->add_option("--workers", o.workers, "worker threads (0: hardware threads)");
  };

  auto* trim = app.add_subcommand("trim", "solve wings-level trim and print it as JSON");
  trim->add_option("--config", o.config, "run config JSON");
  trim->add_option("--scenario", o.scenarios, "apply this scenario's plant changes first");
  trim->add_option("--altitude", o.altitude, "ft");
  trim->add_option("--airspeed", o.airspeed, "ft/s");
  trim->add_option("--heading", o.heading, "rad");
  trim->add_option("--out", o.out, "output JSON (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "fly episodes and write the full trajectory file");
  common(simulate);
  episodes(simulate);
  simulate->add_option("--out", o.out, "trajectory JSONL (default stdout)");

  auto* collect_cmd = app.add_subcommand("collect", "collect an expert dataset");
  common(collect_cmd);
  episodes(collect_cmd);
  collect_cmd->add_option("--out", o.out, "trajectory JSONL")->required();
  collect_cmd->add_flag("--keep-crashed", o.keep_crashed, "keep crashed episodes");

  auto* train = app.add_subcommand("train", "train a decision transformer on a dataset");
  common(train);
  train->add_option("--data", o.data, "trajectory JSONL")->required();
  train->add_option("--out", o.out, "checkpoint path")->required();
  train->add_option("--log-every", o.log_every, "progress line period, updates");

  auto* eval = app.add_subcommand("evaluate", "evaluate a controller across scenarios");
  common(eval);
  episodes(eval);
  eval->add_option("--out", o.out, "EvalReport JSON");

  auto* exp = app.add_subcommand("export", "export h, psi, V_T, p, q, r against references as CSV");
  exp->add_option("--data", o.data, "trajectory JSONL")->required();
  exp->add_option("--out", o.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    if (*trim) run_trim(o);
    if (*simulate) run_simulate(o);
    if (*collect_cmd) run_collect(o);
    if (*train) run_train(o);
    if (*eval) run_evaluate(o);
    if (*exp) run_export(o);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), e.kind() == ErrorKind::kUsage ? 2 : 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
