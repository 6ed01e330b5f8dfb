#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "ftfc/airframe_config.hpp"
#include "ftfc/error.hpp"
#include "ftfc/perturbation.hpp"
#include "published.hpp"

using namespace ftfc;

using namespace published;

TEST_SUITE("perturbation") {

TEST_CASE("randomization ranges match the published table row for row") {
  const RandomizationSpec spec = RandomizationSpec::training_ranges();
  const auto& table = published::table();
  REQUIRE(spec.rows.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CAPTURE(i);
    CHECK(spec.rows[i].members == table[i].members);
    CHECK(spec.rows[i].mode == table[i].mode);
    CHECK(spec.rows[i].low == table[i].low);
    CHECK(spec.rows[i].high == table[i].high);
  }
  // No parameter is randomized twice.
  std::set<std::string> seen;
  for (const auto& row : spec.rows) {
    for (const auto& id : row.members) CHECK(seen.insert(id).second);
  }
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("every row samples inside its bounds") {
  const RandomizationSpec spec = RandomizationSpec::training_ranges();
  std::mt19937_64 rng(11);
  std::size_t members = 0;
  for (const auto& row : spec.rows) members += row.members.size();
  std::vector<double> lo(members, 1e9), hi(members, -1e9);
  for (int n = 0; n < 10000; ++n) {
    const std::vector<ParamEdit> edits = sample_randomization(spec, rng);
    REQUIRE(edits.size() == members);
    std::size_t k = 0;
    for (const auto& row : spec.rows) {
      for (const auto& id : row.members) {
        const ParamEdit& e = edits[k];
        CHECK(e.target == id);
        CHECK(e.mode == row.mode);
        if (e.value < row.low || e.value > row.high) FAIL_CHECK(id << " drew " << e.value);
        lo[k] = std::min(lo[k], e.value);
        hi[k] = std::max(hi[k], e.value);
        ++k;
      }
    }
  }
  // The draws fill the range rather than sitting at one point.
  std::size_t k = 0;
  for (const auto& row : spec.rows) {
    for (std::size_t m = 0; m < row.members.size(); ++m, ++k) {
      const double width = row.high - row.low;
      CHECK(lo[k] < row.low + 0.01 * width);
      CHECK(hi[k] > row.high - 0.01 * width);
    }
  }
}

TEST_CASE("members of a row are drawn independently") {
  std::mt19937_64 rng(5);
  const RandomizationSpec spec = RandomizationSpec::training_ranges();
  const auto edits = sample_randomization(spec, rng);
  CHECK(edits[0].value != edits[1].value);
}

TEST_CASE("shrunk ranges contract toward the identity edit") {
  const RandomizationSpec full = RandomizationSpec::training_ranges();
  const RandomizationSpec mild = full.shrunk(kMildRandomizationFraction);
  const RandomizationSpec none = full.shrunk(0.0);
  for (std::size_t i = 0; i < full.rows.size(); ++i) {
    const double id = full.rows[i].mode == EditMode::kScale ? 1.0 : 0.0;
    CHECK(mild.rows[i].low == doctest::Approx(id + 0.25 * (full.rows[i].low - id)));
    CHECK(mild.rows[i].high == doctest::Approx(id + 0.25 * (full.rows[i].high - id)));
    CHECK(none.rows[i].low == id);
    CHECK(none.rows[i].high == id);
  }
  CHECK(full.shrunk(1.0) == full);
}

TEST_CASE("each fault scenario changes exactly the listed parameters") {
  const Airframe base = probe_airframe();
  const Plant nominal = base.plant();
  const ScenarioOffsets off;
  CHECK(off.rudder_jam == doctest::Approx(15.0 * std::numbers::pi / 180.0));
  // Unquantified offsets sit at the midpoint of the matching additive row.
  CHECK(off.tail_Cm0 == doctest::Approx((-0.02 + 0.001) / 2));
  CHECK(off.wing_Cl0 == doctest::Approx((-0.02 + 0.009) / 2));
  CHECK(off.wing_Cn0 == doctest::Approx((-0.02 + 0.009) / 2));
  CHECK(off.aileron_Cl0 == doctest::Approx((-0.02 + 0.009) / 2));
  const auto names = scenario_names();
  REQUIRE(names.size() == 8);
  CHECK(names[0] == "nominal");
  for (std::string_view name : names) {
    CAPTURE(name);
    const FaultScenario s = build_scenario(name, off);
    CHECK(s.name == name);
    const Plant faulted = apply_scenario(nominal, s);
    const Expected want = expected_scenario(name, off);
    for (const ParamInfo& p : parameter_schema()) {
      const double before = get_parameter(nominal.aero, nominal.geometry, p.id);
      const double after = get_parameter(faulted.aero, faulted.geometry, p.id);
      double expected = before;
      if (auto it = want.scale.find(std::string(p.id)); it != want.scale.end()) expected = before * it->second;
      if (auto it = want.add.find(std::string(p.id)); it != want.add.end()) expected = before + it->second;
      if (after != expected) FAIL_CHECK(p.id << ": " << after << " expected " << expected);
    }
    CHECK(faulted.constraints == want.actuators);
    CHECK(faulted.actuators == nominal.actuators);
  }
}

TEST_CASE("the damaged semi-wing flips the roll damping cross terms") {
  const Plant nominal = default_airframe().plant();
  const Plant wing = apply_scenario(nominal, build_scenario("damaged_semi_wing"));
  CHECK(wing.aero.Cl_beta == -nominal.aero.Cl_beta);
  CHECK(wing.aero.Cl_r == -nominal.aero.Cl_r);
  CHECK(wing.aero.Cl_p == nominal.aero.Cl_p);
}

TEST_CASE("unknown names and targets are rejected without side effects") {
  try {
    build_scenario("frozen_flaps");
    FAIL("expected scenario_not_found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kScenarioNotFound);
  }
  const Airframe a = default_airframe();
  const std::vector<ParamEdit> edits = {{"CL_alpha", EditMode::kScale, 2.0}, {"CL_banana", EditMode::kAdd, 1.0}};
  try {
    apply_edits(a.aero, a.geometry, {}, edits);
    FAIL("expected unknown_parameter");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnknownParameter);
  }
  CHECK(a == default_airframe());

  RandomizationSpec bad;
  bad.rows = {{{"nope"}, EditMode::kScale, 0.5, 1.0}};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.rows = {{{"CD0"}, EditMode::kScale, 2.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("edits apply in order and constraints merge") {
  const Airframe a = default_airframe();
  const std::vector<ParamEdit> edits = {{"Cm0", EditMode::kAdd, 0.01}, {"Cm0", EditMode::kScale, 2.0}};
  const EditedAirframe e = apply_edits(a.aero, a.geometry, {}, edits);
  CHECK(e.aero.Cm0 == (a.aero.Cm0 + 0.01) * 2.0);

  ActuatorConstraints base, fault;
  base.aileron.effectiveness = 0.5;
  base.elevator.range_scale = 0.5;
  fault.elevator.range_scale = 0.1;
  fault.rudder.jam_angle = 0.2;
  const ActuatorConstraints m = merge_constraints(base, fault);
  CHECK(m.aileron.effectiveness == 0.5);
  CHECK(m.elevator.range_scale == doctest::Approx(0.05));
  CHECK(m.rudder.jam_angle == 0.2);
}

TEST_CASE("randomization mode names") {
  for (auto m : {RandomizationMode::kNone, RandomizationMode::kMild, RandomizationMode::kFull}) {
    CHECK(parse_randomization_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_randomization_mode("extreme"), Error);
}

}  // TEST_SUITE
