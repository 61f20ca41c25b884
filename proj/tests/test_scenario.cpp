#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "qcorr/errors.hpp"
#include "qcorr/runner.hpp"
#include "qcorr/scenario.hpp"

using namespace qcorr;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(QCORR_SCENARIO_DIR) + "/" + name;
}

std::string category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.category;
  }
  return "";
}

}  // namespace

TEST_CASE("bundled coupled-cavity scenario carries the documented parameters") {
  const Scenario s = parse_scenario(scenario_path("fig1.scenario"));
  CHECK(s.name == "fig1");
  REQUIRE(s.modes.size() == 2);
  CHECK(s.modes[0].cutoff == 12);
  CHECK(s.modes[1].cutoff == 12);
  bool tau_ok = false, kerr0 = false, kerr1 = false;
  for (const auto& t : s.terms) {
    if (t.type == TermDecl::Type::Hopping) tau_ok = t.rate == 1.5;
    if (t.type == TermDecl::Type::Kerr && t.mode_a == 0) kerr0 = t.rate == 0.25;
    if (t.type == TermDecl::Type::Kerr && t.mode_a == 1) kerr1 = t.rate == 0.25;
    if (t.type == TermDecl::Type::Detuning) CHECK(t.rate == 0.0);
  }
  CHECK(tau_ok);
  CHECK(kerr0);
  CHECK(kerr1);
  CHECK(s.initial[0].n == 1.7);
  CHECK(s.initial[1].n == 0.22);
  for (const auto& c : s.channels) {
    CHECK(c.kind == ChannelKind::Loss);
    CHECK(c.p == 1);
    CHECK(c.rate == 1.0);
  }
}

TEST_CASE("bundled cavity-atom scenario carries the documented parameters") {
  const Scenario s = parse_scenario(scenario_path("fig2.scenario"));
  REQUIRE(s.modes.size() == 2);
  CHECK(s.modes[0].kind == ModeKind::Boson);
  CHECK(s.modes[0].cutoff == 8);
  CHECK(s.modes[1].kind == ModeKind::TwoLevel);
  bool eta_ok = false;
  for (const auto& t : s.terms)
    if (t.type == TermDecl::Type::JC) eta_ok = t.rate == 0.25;
  CHECK(eta_ok);
  CHECK(s.initial[0].n == 0.18);
  CHECK(s.initial[1].type == InitDecl::Type::Excited);
}

TEST_CASE("parse error categories") {
  CHECK(category_of([] { parse_scenario_text("{ not json", "x"); }) == "syntax");
  // the syntax message carries line:column
  try {
    parse_scenario_text("{\n  \"name\": oops\n}", "x");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("x:2:") != std::string::npos);
    CHECK(e.category == "syntax");
  }

  const char* base = R"({
    "name": "t", "modes": [ { "kind": "boson", "cutoff": 2, "label": "m" } ],
    "initial_state": [ { "type": "fock", "n": 1 } ],
    "time": { "t_end": 1.0, "n_points": 10 },
    "engine": { "type": "exact" }
  })";
  CHECK(parse_scenario_text(base, "x").modes.size() == 1);

  CHECK(category_of([] {
          parse_scenario_text(R"({ "name": "t", "typo_key": 1, "modes": [],
            "initial_state": [], "time": {"t_end": 1, "n_points": 2},
            "engine": {"type": "exact"} })",
                              "x");
        }) == "unknown-key");

  CHECK(category_of([] {
          parse_scenario_text(R"({ "modes": [ {"kind":"boson","cutoff":2,"label":"m"} ],
            "hamiltonian": [ {"type":"hopping","modes":[0,5],"tau":1.0} ],
            "initial_state": [ {"type":"fock","n":1} ],
            "time": {"t_end":1,"n_points":10}, "engine": {"type":"exact"} })",
                              "x");
        }) == "cross-ref");

  CHECK(category_of([] {
          parse_scenario_text(R"({ "modes": [ {"kind":"boson","cutoff":2,"label":"a"},
            {"kind":"boson","cutoff":2,"label":"b"} ],
            "hamiltonian": [ {"type":"jc","boson":0,"two_level":1,"eta":1.0} ],
            "initial_state": [ {"type":"fock","n":1}, {"type":"fock","n":0} ],
            "time": {"t_end":1,"n_points":10}, "engine": {"type":"exact"} })",
                              "x");
        }) == "kind-mismatch");

  // empty modes list
  CHECK(category_of([] {
          parse_scenario_text(R"({ "modes": [], "initial_state": [],
            "time": {"t_end":1,"n_points":10}, "engine": {"type":"exact"} })",
                              "x");
        }) == "cross-ref");

  // wrong value types are validation failures, not crashes
  CHECK(category_of([] {
          parse_scenario_text(R"({ "modes": [ {"kind":"boson","cutoff":2,"label":"a"},
            {"kind":"boson","cutoff":2,"label":"b"} ],
            "hamiltonian": [ {"type":"hopping","modes":["a","b"],"tau":1.0} ],
            "initial_state": [ {"type":"fock","n":1}, {"type":"fock","n":0} ],
            "time": {"t_end":1,"n_points":10}, "engine": {"type":"exact"} })",
                              "x");
        }) == "kind-mismatch");
  CHECK(category_of([] {
          parse_scenario_text(R"({ "modes": [ {"kind":"boson","cutoff":2,"label":"a"} ],
            "initial_state": [ {"type":"fock","n":1} ],
            "correlators": { "orders": ["two"] },
            "time": {"t_end":1,"n_points":10}, "engine": {"type":"exact"} })",
                              "x");
        }) == "kind-mismatch");

  CHECK_THROWS_AS(parse_scenario("/nonexistent/path.scenario"), ValidationError);
}

TEST_CASE("round trip through the file format") {
  for (const char* name : {"fig1.scenario", "fig2.scenario", "driven_mode.scenario",
                           "two_photon_absorber.scenario", "unequal_rates.scenario",
                           "jc_driven.scenario"}) {
    const Scenario s = parse_scenario(scenario_path(name));
    const Scenario back = parse_scenario_text(render_scenario(s), name);
    CHECK(back == s);
  }

  // a positive-P engine scenario with every optional field set
  Scenario s = parse_scenario(scenario_path("fig1.scenario"));
  s.engine.type = EngineDecl::Type::PositiveP;
  s.engine.n_traj = 777;
  s.engine.seed = 123456789012345ull;
  s.engine.dt = 2.5e-3;
  s.engine.threads = 3;
  s.engine.escape_radius = 1e5;
  s.engine.convergence_check = true;
  s.output_dir = "out";
  s.orders = {2, 3};
  s.terms.push_back({TermDecl::Type::Drive, 0, 0, 0.4,
                     {EnvelopeSpec::Type::Cos, 2.5}});
  CHECK(parse_scenario_text(render_scenario(s), "pp") == s);
}

TEST_CASE("time grid construction") {
  const Scenario s = parse_scenario(scenario_path("fig1.scenario"));
  const auto times = s.time_grid();
  REQUIRE(times.size() == 400);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(3.0).epsilon(1e-15));
  for (size_t k = 1; k < times.size(); ++k) CHECK(times[k] > times[k - 1]);
}

TEST_CASE("reference-rate scaling reaches the model") {
  Scenario s = parse_scenario(scenario_path("fig1.scenario"));
  s.gamma = 2.0;
  const ModelSpec model = s.to_model();
  bool tau_scaled = false;
  for (const auto& term : model.terms)
    if (const auto* h = std::get_if<Hopping>(&term)) tau_scaled = h->tau == 3.0;
  CHECK(tau_scaled);
  CHECK(model.channels.front().rate == 2.0);
  CHECK(s.time_grid().back() == doctest::Approx(1.5));
}

TEST_CASE("csv header schema is stable") {
  const Scenario fig1 = parse_scenario(scenario_path("fig1.scenario"));
  std::ifstream golden(std::string(QCORR_GOLDEN_DIR) + "/fig1_header.txt");
  REQUIRE(golden.good());
  std::string expected;
  std::getline(golden, expected);
  std::string actual;
  for (size_t i = 0; i < csv_header(fig1).size(); ++i) {
    if (i) actual += ',';
    actual += csv_header(fig1)[i];
  }
  CHECK(actual == expected);
}

TEST_CASE("sweep parameter paths") {
  const Scenario s = parse_scenario(scenario_path("fig1.scenario"));
  const Scenario changed = with_parameter(s, "hamiltonian.2.tau", 0.5);
  CHECK(changed.terms[2].rate == 0.5);
  const Scenario rate = with_parameter(s, "channels.1.rate", 2.0);
  CHECK(rate.channels[1].rate == 2.0);
  CHECK_THROWS_AS(with_parameter(s, "hamiltonian.9.tau", 1.0), ValidationError);
  CHECK_THROWS_AS(with_parameter(s, "no.such.path", 1.0), ValidationError);
  CHECK_THROWS_AS(with_parameter(s, "name", 1.0), ValidationError);  // not numeric
}

TEST_CASE("number-conserving bundled models commute with their correlator") {
  for (const char* name :
       {"fig1.scenario", "fig2.scenario", "unequal_rates.scenario",
        "two_photon_absorber.scenario"}) {
    const Scenario s = parse_scenario(scenario_path(name));
    const ModelSpec model = s.to_model();
    const Matrix h = build_hamiltonian(model, 0.0);
    const Matrix n = total_number_operator(model.space);
    if (h.norm() == 0.0) continue;
    REQUIRE((h * n - n * h).norm() <= 1e-12 * h.norm() * n.norm());
    const auto cs = build_correlator_set(model.space, 2);
    CHECK((h * cs.J_op - cs.J_op * h).norm() <= 1e-12 * h.norm() * cs.J_op.norm());
  }
}

TEST_CASE("empty sweep writes only the summary header") {
  const Scenario s = parse_scenario(scenario_path("unequal_rates.scenario"));
  const auto out_dir = std::string("/tmp/qcorr_test_sweep_empty");
  const auto rows = run_sweep(s, "channels.1.rate", {}, out_dir);
  CHECK(rows.empty());
  std::ifstream summary(out_dir + "/summary.csv");
  REQUIRE(summary.good());
  std::string header, rest;
  std::getline(summary, header);
  CHECK(header == "value,dev_g_tot_2,final_N");
  CHECK(!std::getline(summary, rest));
}
