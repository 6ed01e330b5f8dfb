// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "ftfc/airframe_config.hpp"
#include "ftfc/dt/checkpoint.hpp"
#include "ftfc/dt/model.hpp"
#include "ftfc/dt/trainer.hpp"
#include "ftfc/dynamics.hpp"
#include "ftfc/environment.hpp"
#include "ftfc/error.hpp"
#include "ftfc/harness.hpp"
#include "ftfc/kernels.hpp"
#include "ftfc/perturbation.hpp"
#include "oracles.hpp"
#include "published.hpp"

using namespace ftfc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Accumulates sub-checks; the first failure is reported.
struct Checks {
  bool ok = true;
  std::string first_failure;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
  Outcome outcome(const std::string& detail) const { return {ok, ok ? detail : first_failure + "; " + detail}; }
};

// ---------------------------------------------------------------------------

Outcome coefficient_oracle() {
  std::mt19937_64 rng(1);
  constexpr int kCases = 100000;
  std::vector<oracle::CoefficientCase> cases;
  cases.reserve(kCases);
  for (int i = 0; i < kCases; ++i) cases.push_back(oracle::random_case(rng));
  std::vector<AeroCoefficients> got(kCases);
  const auto t0 = Clock::now();
  for (int i = 0; i < kCases; ++i) {
    got[i] = compute_coefficients(cases[i].derivs, cases[i].air, cases[i].rates, cases[i].controls);
  }
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (int i = 0; i < kCases; ++i) {
    const auto ref = oracle::coefficients(cases[i].derivs, cases[i].air, cases[i].rates, cases[i].controls);
    const auto lib = oracle::as_array(got[i]);
    for (int c = 0; c < 6; ++c) {
      const long double scale = std::max(ref[c].magnitude, std::numeric_limits<long double>::min());
      worst = std::max(worst, static_cast<double>(std::fabs(lib[c] - ref[c].sum) / scale));
    }
  }
  return {worst <= 1e-12 && elapsed < 5.0,
          fmt("%d cases, worst relative error %.3g (limit 1e-12), %.3f s (limit 5 s)", kCases, worst, elapsed)};
}

Outcome reward_exactness() {
  Checks c;
  const RewardConfig cfg;
  const std::array<double, 5> published{0.24, 0.2, 0.16, 0.2, 0.2};
  c.expect(cfg.weights == published, "default weights differ from the published weights");
  c.expect(tracking_reward(0.0, 1.0, 60.0) == 0.0, "tracking reward at zero error is not 0");
  c.expect(attitude_reward(0.0, 0.0, 0.0, 0.0, cfg) == 0.0, "attitude reward at the origin is not 0");
  c.expect(control_reward({0.0, 0.0, 0.0, 0.0}, cfg) == 0.0, "control reward at the origin is not 0");

  std::mt19937_64 rng(2);
  std::cauchy_distribution<double> heavy(0.0, 1.0);  // reaches deep into the tails
  double lo = 0.0, hi = -1.0, worst = 0.0;
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) {
    Observation o;
    o[ObsChannel::kErrorAltitude] = 100.0 * heavy(rng);
    o[ObsChannel::kErrorHeading] = std::remainder(heavy(rng), 2 * std::numbers::pi);
    o[ObsChannel::kErrorAirspeed] = 20.0 * heavy(rng);
    o[ObsChannel::kP] = heavy(rng);
    o[ObsChannel::kQ] = heavy(rng);
    o[ObsChannel::kR] = heavy(rng);
    o[ObsChannel::kPhi] = std::remainder(heavy(rng), 2 * std::numbers::pi);
    ControlInputs a, b;
    std::array<double, 4> av, bv;
    for (int k = 0; k < 4; ++k) {
      av[k] = std::tanh(heavy(rng));
      bv[k] = std::tanh(heavy(rng));
    }
    a = ControlInputs::from_array(av);
    b = ControlInputs::from_array(bv);
    const RewardComponents r = reward_components(o, a, b, cfg);
    const double total = total_reward(r, cfg);
    lo = std::min(lo, total);
    hi = std::max(hi, total);
    const double ref =
        published[0] * oracle::tracking(o[ObsChannel::kErrorAltitude], 1.0, 60.0) +
        published[1] * oracle::tracking(o[ObsChannel::kErrorHeading], 1.0, 0.35) +
        published[2] * oracle::tracking(o[ObsChannel::kErrorAirspeed], 1.0, 16.0) +
        published[3] * oracle::geometric_penalty({oracle::kernel(o[ObsChannel::kP], 0.5),
                                                  oracle::kernel(o[ObsChannel::kQ], 0.5),
                                                  oracle::kernel(o[ObsChannel::kR], 0.5),
                                                  oracle::kernel(o[ObsChannel::kPhi], 0.5)}) +
        published[4] * oracle::geometric_penalty({oracle::kernel(av[0] - bv[0], 0.1), oracle::kernel(av[1] - bv[1], 0.1),
                                                  oracle::kernel(av[2] - bv[2], 0.1),
                                                  oracle::kernel(av[3] - bv[3], 0.1)});
    worst = std::max(worst, std::abs(total - ref));
  }
  c.expect(lo >= -1.0 && hi <= 0.0, "total reward left [-1, 0]");
  c.expect(worst <= 1e-12, "weighted sum differs from the oracle");
  return c.outcome(fmt("%d draws, total in [%.6f, %.6f], worst |total - oracle| %.3g", kDraws, lo, hi, worst));
}

Outcome physics_suite() {
  Checks c;
  const auto t0 = Clock::now();
  const Plant plant = default_airframe().plant();

  double drift = 0.0;
  const TrimResult trim = find_trim({10000.0, 300.0, 0.0}, plant);
  AircraftState s = trim.state;
  for (int i = 0; i < 100; ++i) s = step(s, trim.controls, plant, Vec3::Zero());
  drift = std::abs(s.altitude - 10000.0);
  c.expect(drift < 5.0, "trim altitude drift over 10 s >= 5 ft");

  // Symmetric flight under longitudinal excitation.
  const TrimResult sym = find_trim({12000.0, 310.0, 0.0}, plant);
  AircraftState x = sym.state;
  bool lateral_zero = sym.beta == 0.0 && sym.deflections.aileron == 0.0 && sym.deflections.rudder == 0.0;
  ControlInputs cmd = sym.controls;
  for (int i = 0; i < 200; ++i) {
    cmd.elevator = sym.controls.elevator + 0.05 * std::sin(0.1 * i);
    x = step(x, cmd, plant, Vec3::Zero());
    lateral_zero = lateral_zero && x.v == 0.0 && x.p == 0.0 && x.r == 0.0 && x.phi == 0.0 && x.psi == 0.0 &&
                   x.east == 0.0 && x.aileron == 0.0 && x.rudder == 0.0;
  }
  c.expect(lateral_zero, "lateral states left exactly zero");

  // Step halving with the rate-derivative terms removed (they lag one substep).
  Plant qs = plant;
  qs.aero.CL_alphadot = qs.aero.Cm_alphadot = qs.aero.CY_pdot = qs.aero.CY_rdot = qs.aero.Cn_pdot = 0.0;
  const TrimResult qt = find_trim({10000.0, 300.0, 0.4}, qs);
  AircraftState s0 = qt.state;
  s0.p = 0.3;
  s0.q = 0.1;
  s0.r = -0.2;
  s0.phi = 0.4;
  s0.v = 15.0;
  auto fly = [&](int substeps) {
    StepConfig cfg;
    cfg.dt = 0.8;
    cfg.substeps = substeps;
    return step(s0, qt.controls, qs, Vec3::Zero(), cfg).rigid_body();
  };
  const auto ref = fly(512);
  auto err = [&](int n) {
    const auto y = fly(n);
    double e = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double d = y[i] - ref[i];
      if (i >= 6 && i <= 8) d = std::remainder(d, 2 * std::numbers::pi);
      e = std::max(e, std::abs(d));
    }
    return e;
  };
  const double e4 = err(4), e8 = err(8), e16 = err(16);
  const double r1 = e4 / e8, r2 = e8 / e16;
  c.expect(r1 > 12.0 && r1 < 20.0 && r2 > 12.0 && r2 < 20.0, "RK4 halving ratios outside 16 +- 25%");

  // Ballistic flight.
  Plant b;
  b.geometry = plant.geometry;
  b.geometry.thrust_max = 0.0;
  b.aero = AeroDerivatives{};
  b.aero.chord = 5.0;
  b.aero.span = 30.0;
  b.aero.area = 200.0;
  AircraftState bs;
  bs.altitude = 15000.0;
  bs.theta = 0.3;
  bs.psi = 0.7;
  bs.u = 320.0;
  bs.v = 10.0;
  bs.w = -25.0;
  const Vec3 v0 = ned_to_body(bs.phi, bs.theta, bs.psi).transpose() * Vec3(bs.u, bs.v, bs.w);
  AircraftState bx = bs;
  for (int i = 0; i < 100; ++i) bx = step(bx, {}, b, Vec3::Zero());
  const double t = 10.0;
  const double ballistic = std::max({std::abs(bx.north - v0.x() * t), std::abs(bx.east - v0.y() * t),
                                     std::abs(bx.altitude - (bs.altitude - v0.z() * t - 0.5 * kGravity * t * t))});
  c.expect(ballistic < 1e-4, "ballistic position error >= 1e-4 ft");

  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 60.0, "physics suite took >= 60 s");
  return c.outcome(fmt("trim drift %.3g ft (<5), lateral exact %s, halving ratios %.2f %.2f (16 +- 25%%), "
                       "ballistic %.3g ft (<1e-4), %.2f s (<60)",
                       drift, lateral_zero ? "yes" : "no", r1, r2, ballistic, elapsed));
}

Outcome table_completeness() {
  Checks c;
  const RandomizationSpec spec = RandomizationSpec::training_ranges();
  const auto& table = published::table();
  c.expect(spec.rows.size() == table.size(), "row count differs from the published table");
  for (std::size_t i = 0; i < std::min(spec.rows.size(), table.size()); ++i) {
    const bool same = spec.rows[i].members == table[i].members && spec.rows[i].mode == table[i].mode &&
                      spec.rows[i].low == table[i].low && spec.rows[i].high == table[i].high;
    c.expect(same, fmt("row %zu differs from the published table", i));
  }
  std::mt19937_64 rng(3);
  constexpr int kSamples = 10000;
  std::size_t out_of_bounds = 0;
  for (int n = 0; n < kSamples; ++n) {
    const auto edits = sample_randomization(spec, rng);
    std::size_t k = 0;
    for (const auto& row : spec.rows) {
      for (const auto& id : row.members) {
        const ParamEdit& e = edits[k++];
        if (e.target != id || e.mode != row.mode || e.value < row.low || e.value > row.high) ++out_of_bounds;
      }
    }
  }
  c.expect(out_of_bounds == 0, "samples outside their row bounds");
  return c.outcome(fmt("%zu rows checked, %d samples per row, %zu out of bounds", table.size(), kSamples,
                       out_of_bounds));
}

Outcome scenario_fidelity() {
  Checks c;
  const Airframe base = published::probe_airframe();
  const Plant nominal = base.plant();
  const ScenarioOffsets off;
  int scenarios = 0, mismatches = 0;
  for (std::string_view name : scenario_names()) {
    if (name == "nominal") continue;
    ++scenarios;
    const Plant faulted = apply_scenario(nominal, build_scenario(name, off));
    const auto want = published::expected_scenario(name, off);
    for (const ParamInfo& p : parameter_schema()) {
      const double before = get_parameter(nominal.aero, nominal.geometry, p.id);
      const double after = get_parameter(faulted.aero, faulted.geometry, p.id);
      double expected = before;
      if (auto it = want.scale.find(std::string(p.id)); it != want.scale.end()) expected = before * it->second;
      if (auto it = want.add.find(std::string(p.id)); it != want.add.end()) expected = before + it->second;
      if (after != expected) {
        ++mismatches;
        c.expect(false, fmt("%.*s: %.*s", int(name.size()), name.data(), int(p.id.size()), p.id.data()));
      }
    }
    if (!(faulted.constraints == want.actuators)) {
      ++mismatches;
      c.expect(false, fmt("%.*s: actuator constraints", int(name.size()), name.data()));
    }
  }
  const Plant wing = apply_scenario(nominal, build_scenario("damaged_semi_wing", off));
  const bool flips = wing.aero.Cl_beta == -nominal.aero.Cl_beta && wing.aero.Cl_r == -nominal.aero.Cl_r;
  c.expect(flips, "semi-wing sign flips of Cl_beta and Cl_r");
  c.expect(scenarios == 7, "expected seven fault scenarios");
  return c.outcome(fmt("%d scenarios diffed against nominal, %d mismatches, sign flips %s", scenarios, mismatches,
                       flips ? "exact" : "wrong"));
}

Outcome transformer_suite(const std::filesystem::path&) {
  Checks c;
  using namespace ftfc::dt;
  // Parameter count.
  const DecisionTransformer<float> model{DtConfig{}};
  const std::size_t count = model.parameter_count();
  c.expect(count >= 700000 && count <= 900000, "default parameter count outside [0.7M, 0.9M]");

  // Causality on random parameters.
  std::mt19937_64 rng(4);
  std::normal_distribution<float> n(0.0f, 0.05f);
  std::vector<float> params = model.init_params(5);
  for (float& p : params) p += n(rng);
  const int K = model.config().context;
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> rtg(K), obs(K * 17), act(K * 4);
  std::vector<int> ts(K);
  for (int t = 0; t < K; ++t) {
    rtg[t] = u(rng);
    ts[t] = 200 + t;
  }
  for (float& x : obs) x = u(rng);
  for (float& x : act) x = u(rng);
  Workspace<float> ws;
  const Window w{K, 0, rtg.data(), obs.data(), act.data(), ts.data()};
  model.forward(params, std::span(&w, 1), ws);
  const std::vector<float> base = ws.pred;
  bool causal = true;
  for (int t : {0, 29, K - 2}) {
    auto r2 = rtg;
    auto o2 = obs;
    auto a2 = act;
    for (int s = t + 1; s < K; ++s) {
      r2[s] = u(rng);
      for (int k = 0; k < 17; ++k) o2[s * 17 + k] = u(rng);
    }
    for (int s = t; s < K; ++s) {
      for (int k = 0; k < 4; ++k) a2[s * 4 + k] = u(rng);
    }
    const Window w2{K, 0, r2.data(), o2.data(), a2.data(), ts.data()};
    model.forward(params, std::span(&w2, 1), ws);
    for (int i = 0; i < (t + 1) * 4; ++i) causal = causal && ws.pred[i] == base[i];
  }
  c.expect(causal, "future tokens changed earlier predictions");

  // Finite-difference gradients in double precision on a reduced config.
  DtConfig small;
  small.layers = 2;
  small.heads = 2;
  small.embed = 4;
  small.ffn = 8;
  small.context = 4;
  small.max_timestep = 8;
  const DecisionTransformer<double> dm{small};
  std::vector<double> dp = dm.init_params(6);
  std::normal_distribution<double> nd(0.0, 0.4);
  for (double& p : dp) p += nd(rng);
  std::vector<float> sr(4), so(4 * 17), sa(4 * 4);
  std::vector<int> sts{0, 1, 2, 3};
  for (float& x : sr) x = u(rng);
  for (float& x : so) x = u(rng);
  for (float& x : sa) x = u(rng);
  const std::vector<Window> sw{{4, 0, sr.data(), so.data(), sa.data(), sts.data()},
                               {3, 1, sr.data(), so.data(), sa.data(), sts.data()}};
  Workspace<double> dws;
  dm.forward(dp, sw, dws);
  std::vector<double> weight(dws.pred.size());
  for (double& x : weight) x = nd(rng);
  auto loss = [&](const std::vector<double>& p) {
    dm.forward(p, sw, dws);
    double s = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) s += weight[i] * dws.pred[i];
    return s;
  };
  loss(dp);
  std::vector<double> grad(dp.size(), 0.0);
  dm.backward(dp, sw, dws, weight, grad);
  double worst_grad = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    auto p = dp;
    p[i] += 1e-6;
    const double up = loss(p);
    p[i] = dp[i] - 1e-6;
    const double down = loss(p);
    const double fd = (up - down) / 2e-6;
    worst_grad = std::max(worst_grad, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
  }
  c.expect(dp.size() <= 1000 && worst_grad <= 1e-4, "finite-difference gradient check");

  // Toy overfit: ten short expert trajectories, 2k full-batch updates.
  const auto toy = fixture::toy_sequences(10, 60);
  TrainConfig t;
  t.full_batch = true;
  t.updates = 2000;
  t.learning_rate = 1e-3;
  t.weight_decay = 0.0;
  t.warmup = 50;
  t.seed = 1;
  const auto t0 = Clock::now();
  const TrainResult r = train(toy, DtConfig{}, t);
  const double train_s = seconds_since(t0);
  const double mse = action_mse(model, r.params, toy);
  c.expect(mse < 1e-3, "toy action MSE >= 1e-3");
  c.expect(train_s < 600.0, "toy overfit took >= 10 min");
  return c.outcome(fmt("kernels %s, %zu parameters, causal %s, worst gradient error %.3g over %zu parameters, "
                       "toy MSE %.3g after %d updates in %.0f s",
                       std::string(kernels::to_string(kernels::active_isa())).c_str(), count,
                       causal ? "bit-exact" : "violated", worst_grad, dp.size(), mse, r.updates, train_s));
}

// ---------------------------------------------------------------------------
// Distillation pipeline shared by the last three criteria.

struct Pipeline {
  RunConfig config;
  dt::Checkpoint checkpoint;
  EvalReport fcs, dt;
  double seconds = 0.0;
  int expert_episodes = 0;
};

constexpr int kExpertEpisodes = 200;
constexpr int kPairedEpisodes = 25;
constexpr std::uint64_t kExpertSeed = 1;
constexpr std::uint64_t kEvalSeed = 50000;  // disjoint from the expert seeds

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions o;
  o.scenarios = {"nominal", "jammed_rudder", "shifted_cg"};
  o.episodes = kPairedEpisodes;
  o.seed = kEvalSeed;
  o.randomization = RandomizationMode::kNone;
  o.run.workers = cfg.workers;
  return o;
}

Pipeline run_pipeline(const std::filesystem::path& workdir, const std::filesystem::path& recipe) {
  Pipeline p;
  const auto t0 = Clock::now();
  p.config = run_config_from_json(read_json_file(recipe), recipe.parent_path());

  CollectOptions co;
  co.episodes = kExpertEpisodes;
  co.scenarios = p.config.scenarios.empty() ? std::vector<std::string>{"nominal"} : p.config.scenarios;
  co.randomization = p.config.randomization;
  co.seed = kExpertSeed;
  co.exclude_crashed = p.config.exclude_crashed;
  co.run.workers = p.config.workers;
  co.run.action_noise = p.config.action_noise;
  ControllerSpec fcs;
  fcs.gains = p.config.gains;
  const Dataset data = collect(fcs, p.config.airframe, p.config.environment, co);
  p.expert_episodes = static_cast<int>(data.episodes.size());
  save_dataset(workdir / "expert.jsonl", data);
  std::printf("  collected %d expert episodes (%.0f s)\n", p.expert_episodes, seconds_since(t0));
  std::fflush(stdout);

  const auto progress = [&](int i, int total, double loss) {
    if (i % 250 == 0 || i == total) {
      std::printf("  update %d/%d loss %.6f (%.0f s)\n", i, total, loss, seconds_since(t0));
      std::fflush(stdout);
    }
  };
  p.checkpoint = train_policy(data, p.config.model, p.config.train, progress, workdir / "last_good.json");
  dt::save_checkpoint(workdir / "policy.json", p.checkpoint);

  const EvalOptions eo = eval_options(p.config);
  p.fcs = evaluate(fcs, p.config.airframe, p.config.environment, eo);
  ControllerSpec dt_spec;
  dt_spec.kind = ControllerKind::kDt;
  dt_spec.checkpoint = std::make_shared<const dt::Checkpoint>(p.checkpoint);
  p.dt = evaluate(dt_spec, p.config.airframe, p.config.environment, eo);
  write_text_file(workdir / "eval_fcs.json", dump(to_json(p.fcs)) + "\n");
  write_text_file(workdir / "eval_dt.json", dump(to_json(p.dt)) + "\n");
  p.seconds = seconds_since(t0);
  std::printf("%s%s", format_report_table(p.fcs).c_str(), format_report_table(p.dt).c_str());
  std::fflush(stdout);
  return p;
}

const ScenarioResult& row(const EvalReport& r, const std::string& name) {
  for (const auto& s : r.scenarios) {
    if (s.scenario == name) return s;
  }
  fail(ErrorKind::kScenarioNotFound, name);
}

Outcome distillation(const Pipeline& p) {
  const auto& f = row(p.fcs, "nominal");
  const auto& d = row(p.dt, "nominal");
  const double gap = std::abs(d.mean_return - f.mean_return) / std::abs(f.mean_return);
  const bool paired = f.pairing_hash == d.pairing_hash;
  const bool pass = p.expert_episodes >= kExpertEpisodes && paired && gap <= 0.15 && d.crashes == 0 &&
                    p.seconds < 7200.0;
  return {pass, fmt("%d expert episodes, nominal mean return dt %.2f vs fcs %.2f (gap %.1f%%, limit 15%%), "
                    "dt crashes %d/%d, seeds paired %s, pipeline %.0f s (limit 7200)",
                    p.expert_episodes, d.mean_return, f.mean_return, 100.0 * gap, d.crashes, d.episodes,
                    paired ? "yes" : "no", p.seconds)};
}

Outcome fault_response(const Pipeline& p) {
  Checks c;
  std::string detail;
  for (const std::string name : {"jammed_rudder", "shifted_cg"}) {
    const auto& f = row(p.fcs, name);
    const auto& d = row(p.dt, name);
    c.expect(f.pairing_hash == d.pairing_hash, name + ": seeds not paired");
    c.expect(d.episodes == kPairedEpisodes, name + ": episode count");
    c.expect(d.crash_percent <= f.crash_percent, name + ": dt crash% above fcs");
    detail += fmt("%s crash%% dt %.0f vs fcs %.0f (returns %.2f vs %.2f); ", name.c_str(), d.crash_percent,
                  f.crash_percent, d.mean_return, f.mean_return);
  }
  return c.outcome(detail + fmt("%d paired episodes each", kPairedEpisodes));
}

Outcome determinism(const Pipeline& p, const std::filesystem::path& workdir) {
  auto stable = [](const EvalReport& r) {
    Json j = to_json(r);
    j.erase("created");
    return dump(j);
  };
  // Every scenario with the expert controller, then the trained policy again.
  EvalOptions all;
  all.episodes = 10;
  all.seed = 777;
  all.randomization = RandomizationMode::kMild;
  all.dr_seed = 4242;
  ControllerSpec fcs;
  fcs.gains = p.config.gains;
  all.run.workers = 1;
  const EvalReport a = evaluate(fcs, p.config.airframe, p.config.environment, all);
  all.run.workers = 4;
  const EvalReport b = evaluate(fcs, p.config.airframe, p.config.environment, all);
  write_text_file(workdir / "determinism_a.json", stable(a));
  write_text_file(workdir / "determinism_b.json", stable(b));

  ControllerSpec dt_spec;
  dt_spec.kind = ControllerKind::kDt;
  dt_spec.checkpoint = std::make_shared<const dt::Checkpoint>(dt::load_checkpoint(workdir / "policy.json"));
  EvalOptions again = eval_options(p.config);
  again.scenarios = {"nominal"};
  again.run.dt_batch = 5;
  const EvalReport d = evaluate(dt_spec, p.config.airframe, p.config.environment, again);
  Json first = to_json(p.dt);
  first.erase("created");
  first["scenarios"] = Json::array({first["scenarios"][0]});
  Json second = to_json(d);
  second.erase("created");

  const bool fcs_same = stable(a) == stable(b);
  const bool dt_same = dump(first) == dump(second);
  return {fcs_same && dt_same,
          fmt("full %zu-scenario fcs evaluate byte-identical across worker counts: %s; "
              "dt evaluate from the reloaded checkpoint with a different batch size: %s",
              a.scenarios.size(), fcs_same ? "yes" : "no", dt_same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::filesystem::path workdir = "acceptance";
  std::filesystem::path recipe = std::filesystem::path(FTFC_CONFIG_DIR) / "distill.json";
  app.add_option("--workdir", workdir, "directory for datasets, checkpoints and reports");
  app.add_option("--recipe", recipe, "run config for the distillation pipeline");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(workdir);

  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& f) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  report("coefficient-oracle", coefficient_oracle);
  report("reward-exactness", reward_exactness);
  report("physics-suite", physics_suite);
  report("randomization-table", table_completeness);
  report("scenario-fidelity", scenario_fidelity);
  report("transformer-suite", [&] { return transformer_suite(workdir); });

  std::optional<Pipeline> pipeline;
  std::string pipeline_error;
  try {
    pipeline = run_pipeline(workdir, recipe);
  } catch (const std::exception& e) {
    pipeline_error = e.what();
  }
  auto needs_pipeline = [&](auto&& f) {
    return [&, f]() -> Outcome {
      if (!pipeline) return {false, "pipeline failed: " + pipeline_error};
      return f(*pipeline);
    };
  };
  report("distillation-fidelity", needs_pipeline([](const Pipeline& p) { return distillation(p); }));
  report("fault-response", needs_pipeline([](const Pipeline& p) { return fault_response(p); }));
  report("determinism", needs_pipeline([&](const Pipeline& p) { return determinism(p, workdir); }));

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
