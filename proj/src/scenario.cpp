#include "qcorr/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg, const std::string& category) {
  throw ValidationError(msg, category);
}

void expect_keys(const ordered_json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      fail("unknown key '" + it.key() + "' in " + where, "unknown-key");
}

template <typename T>
T get_number(const ordered_json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail("missing key '" + key + "' in " + where, "kind-mismatch");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("'" + key + "' in " + where + " must be a number", "kind-mismatch");
  return v.get<T>();
}

template <typename T>
T get_number_or(const ordered_json& obj, const std::string& where, const std::string& key,
                T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("'" + key + "' in " + where + " must be a number", "kind-mismatch");
  return v.get<T>();
}

std::string get_string(const ordered_json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail("missing key '" + key + "' in " + where, "kind-mismatch");
  const auto& v = obj.at(key);
  if (!v.is_string()) fail("'" + key + "' in " + where + " must be a string", "kind-mismatch");
  return v.get<std::string>();
}

EnvelopeSpec parse_envelope(const ordered_json& obj, const std::string& where) {
  EnvelopeSpec env;
  if (!obj.is_object()) fail("envelope in " + where + " must be an object", "kind-mismatch");
  expect_keys(obj, where + ".envelope", {"type", "freq"});
  const std::string type = get_string(obj, where + ".envelope", "type");
  if (type == "cw") {
    env.type = EnvelopeSpec::Type::CW;
  } else if (type == "cos") {
    env.type = EnvelopeSpec::Type::Cos;
    env.freq = get_number<double>(obj, where + ".envelope", "freq");
  } else if (type == "sin") {
    env.type = EnvelopeSpec::Type::Sin;
    env.freq = get_number<double>(obj, where + ".envelope", "freq");
  } else {
    fail("unknown envelope type '" + type + "' in " + where, "kind-mismatch");
  }
  return env;
}

ordered_json render_envelope(const EnvelopeSpec& env) {
  ordered_json j;
  switch (env.type) {
    case EnvelopeSpec::Type::CW: j["type"] = "cw"; break;
    case EnvelopeSpec::Type::Cos: j["type"] = "cos"; j["freq"] = env.freq; break;
    case EnvelopeSpec::Type::Sin: j["type"] = "sin"; j["freq"] = env.freq; break;
  }
  return j;
}

void validate_scenario(const Scenario& s) {
  if (s.gamma <= 0.0) fail("gamma must be > 0", "kind-mismatch");
  if (s.modes.empty()) fail("scenario needs at least one mode", "cross-ref");
  std::set<std::string> labels;
  for (const auto& m : s.modes) {
    if (m.kind == ModeKind::Boson && m.cutoff < 0) fail("cutoff must be >= 0", "kind-mismatch");
    if (!labels.insert(m.label).second) fail("duplicate mode label '" + m.label + "'", "cross-ref");
  }
  const int n = static_cast<int>(s.modes.size());
  auto check_index = [&](int i, const std::string& where) {
    if (i < 0 || i >= n) fail("mode index " + std::to_string(i) + " out of range in " + where,
                              "cross-ref");
  };
  for (const auto& t : s.terms) {
    switch (t.type) {
      case TermDecl::Type::Detuning: check_index(t.mode_a, "detuning"); break;
      case TermDecl::Type::Kerr:
        check_index(t.mode_a, "kerr");
        if (s.modes[static_cast<size_t>(t.mode_a)].kind != ModeKind::Boson)
          fail("kerr requires a bosonic mode", "kind-mismatch");
        break;
      case TermDecl::Type::Hopping:
        check_index(t.mode_a, "hopping");
        check_index(t.mode_b, "hopping");
        if (t.mode_a == t.mode_b) fail("hopping needs two distinct modes", "cross-ref");
        break;
      case TermDecl::Type::JC:
        check_index(t.mode_a, "jc");
        check_index(t.mode_b, "jc");
        if (t.mode_a == t.mode_b) fail("jc needs two distinct modes", "cross-ref");
        if (s.modes[static_cast<size_t>(t.mode_a)].kind != ModeKind::Boson ||
            s.modes[static_cast<size_t>(t.mode_b)].kind != ModeKind::TwoLevel)
          fail("jc needs a bosonic mode and a two-level mode", "kind-mismatch");
        break;
      case TermDecl::Type::Drive: check_index(t.mode_a, "drive"); break;
    }
  }
  for (const auto& c : s.channels) {
    check_index(c.mode, "channel");
    if (c.rate < 0.0) fail("channel rate must be >= 0", "kind-mismatch");
    if (c.p < 1) fail("channel p must be >= 1", "kind-mismatch");
    const bool boson = s.modes[static_cast<size_t>(c.mode)].kind == ModeKind::Boson;
    if (c.kind == ChannelKind::Gain && !boson) fail("gain needs a bosonic mode", "kind-mismatch");
    if (c.kind == ChannelKind::Gain && c.p != 1) fail("gain must have p = 1", "kind-mismatch");
    if (c.kind == ChannelKind::Loss && !boson && c.p != 1)
      fail("two-level loss must have p = 1", "kind-mismatch");
  }
  if (s.initial.size() != s.modes.size())
    fail("initial_state needs exactly one entry per mode", "cross-ref");
  for (size_t i = 0; i < s.initial.size(); ++i) {
    const auto& init = s.initial[i];
    const auto& mode = s.modes[i];
    const std::string where = "initial_state[" + std::to_string(i) + "]";
    switch (init.type) {
      case InitDecl::Type::Coherent:
        if (mode.kind != ModeKind::Boson) fail(where + ": coherent needs a boson", "kind-mismatch");
        if (init.n < 0.0) fail(where + ": mean occupation must be >= 0", "kind-mismatch");
        break;
      case InitDecl::Type::Fock:
        if (mode.kind != ModeKind::Boson) fail(where + ": fock needs a boson", "kind-mismatch");
        if (init.fock_n < 0 || init.fock_n > mode.cutoff)
          fail(where + ": fock occupation exceeds the cutoff", "kind-mismatch");
        break;
      case InitDecl::Type::Ground:
      case InitDecl::Type::Excited:
        if (mode.kind != ModeKind::TwoLevel)
          fail(where + ": ground/excited needs a two-level mode", "kind-mismatch");
        break;
    }
  }
  if (s.time.t_end <= 0.0) fail("t_end must be > 0", "kind-mismatch");
  if (s.time.n_points < 2) fail("n_points must be >= 2", "kind-mismatch");
  if (s.orders.empty()) fail("correlators.orders must not be empty", "kind-mismatch");
  for (int m : s.orders)
    if (m < 2) fail("correlator order must be >= 2", "kind-mismatch");
  if (s.engine.type == EngineDecl::Type::Exact) {
    if (s.engine.tol <= 0.0) fail("engine.tol must be > 0", "kind-mismatch");
  } else {
    if (s.engine.n_traj < 1) fail("engine.n_traj must be >= 1", "kind-mismatch");
    if (s.engine.dt <= 0.0) fail("engine.dt must be > 0", "kind-mismatch");
  }
}

}  // namespace

HilbertSpace Scenario::space() const {
  std::vector<ModeSpec> modes;
  modes.reserve(this->modes.size());
  for (const auto& m : this->modes) modes.push_back({m.kind, m.cutoff, m.label});
  return HilbertSpace(std::move(modes));
}

ModelSpec Scenario::to_model() const {
  ModelSpec spec;
  spec.space = space();
  const double g = gamma;
  for (const auto& t : terms) {
    switch (t.type) {
      case TermDecl::Type::Detuning:
        spec.terms.push_back(Detuning{t.mode_a, t.rate * g});
        break;
      case TermDecl::Type::Hopping:
        spec.terms.push_back(Hopping{t.mode_a, t.mode_b, t.rate * g});
        break;
      case TermDecl::Type::Kerr:
        spec.terms.push_back(Kerr{t.mode_a, t.rate * g});
        break;
      case TermDecl::Type::JC:
        spec.terms.push_back(JCCoupling{t.mode_a, t.mode_b, t.rate * g});
        break;
      case TermDecl::Type::Drive: {
        Drive d;
        d.mode = t.mode_a;
        d.amplitude = t.rate * g;
        if (t.envelope.type == EnvelopeSpec::Type::Cos) {
          const double w = t.envelope.freq * g;
          d.envelope = [w](double time) { return std::cos(w * time); };
        } else if (t.envelope.type == EnvelopeSpec::Type::Sin) {
          const double w = t.envelope.freq * g;
          d.envelope = [w](double time) { return std::sin(w * time); };
        }
        spec.terms.push_back(std::move(d));
        break;
      }
    }
  }
  for (const auto& c : channels) spec.channels.push_back({c.mode, c.kind, c.p, c.rate * g});
  return spec;
}

std::vector<InitialModeState> Scenario::to_initial() const {
  std::vector<InitialModeState> out;
  out.reserve(initial.size());
  for (const auto& init : initial) {
    switch (init.type) {
      case InitDecl::Type::Coherent: {
        const double mag = std::sqrt(init.n);
        out.push_back(InitialCoherent{Complex{mag * std::cos(init.phase),
                                              mag * std::sin(init.phase)}});
        break;
      }
      case InitDecl::Type::Fock: out.push_back(InitialFock{init.fock_n}); break;
      case InitDecl::Type::Ground: out.push_back(InitialGround{}); break;
      case InitDecl::Type::Excited: out.push_back(InitialExcited{}); break;
    }
  }
  return out;
}

std::vector<double> Scenario::time_grid() const {
  std::vector<double> times(static_cast<size_t>(time.n_points));
  const double t_end_abs = time.t_end / gamma;
  for (int k = 0; k < time.n_points; ++k)
    times[static_cast<size_t>(k)] = t_end_abs * k / (time.n_points - 1);
  return times;
}

std::vector<Complex> Scenario::coherent_amplitudes() const {
  std::vector<Complex> amps;
  for (size_t i = 0; i < initial.size(); ++i) {
    if (initial[i].type != InitDecl::Type::Coherent)
      throw ValidationError("positive-P needs coherent initial states on every mode",
                            "kind-mismatch");
    const double mag = std::sqrt(initial[i].n);
    amps.push_back(Complex{mag * std::cos(initial[i].phase), mag * std::sin(initial[i].phase)});
  }
  return amps;
}

namespace {

Scenario parse_scenario_impl(const std::string& text, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line:column
    size_t line = 1, col = 1;
    const size_t stop = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
             ": syntax error: " + e.what(),
         "syntax");
  }
  if (!j.is_object()) fail(origin + ": scenario must be a JSON object", "syntax");

  expect_keys(j, "scenario",
              {"name", "gamma", "modes", "hamiltonian", "channels", "initial_state", "time",
               "correlators", "engine", "output"});

  Scenario s;
  if (j.contains("name")) s.name = get_string(j, "scenario", "name");
  s.gamma = get_number_or(j, "scenario", "gamma", 1.0);

  if (!j.contains("modes") || !j.at("modes").is_array())
    fail("scenario needs a 'modes' array", "cross-ref");
  int mode_idx = 0;
  for (const auto& jm : j.at("modes")) {
    const std::string where = "modes[" + std::to_string(mode_idx) + "]";
    if (!jm.is_object()) fail(where + " must be an object", "kind-mismatch");
    expect_keys(jm, where, {"kind", "cutoff", "label"});
    ModeDecl m;
    const std::string kind = get_string(jm, where, "kind");
    if (kind == "boson") {
      m.kind = ModeKind::Boson;
      m.cutoff = get_number<int>(jm, where, "cutoff");
    } else if (kind == "two_level") {
      m.kind = ModeKind::TwoLevel;
      if (jm.contains("cutoff")) fail(where + ": cutoff is for bosons only", "kind-mismatch");
      m.cutoff = 0;
    } else {
      fail(where + ": unknown mode kind '" + kind + "'", "kind-mismatch");
    }
    m.label = jm.contains("label") ? get_string(jm, where, "label")
                                   : "m" + std::to_string(mode_idx);
    s.modes.push_back(std::move(m));
    ++mode_idx;
  }

  if (j.contains("hamiltonian")) {
    if (!j.at("hamiltonian").is_array()) fail("'hamiltonian' must be an array", "kind-mismatch");
    int term_idx = 0;
    for (const auto& jt : j.at("hamiltonian")) {
      const std::string where = "hamiltonian[" + std::to_string(term_idx) + "]";
      if (!jt.is_object()) fail(where + " must be an object", "kind-mismatch");
      const std::string type = get_string(jt, where, "type");
      TermDecl t;
      if (type == "detuning") {
        expect_keys(jt, where, {"type", "mode", "omega"});
        t.type = TermDecl::Type::Detuning;
        t.mode_a = get_number<int>(jt, where, "mode");
        t.rate = get_number<double>(jt, where, "omega");
      } else if (type == "hopping") {
        expect_keys(jt, where, {"type", "modes", "tau"});
        t.type = TermDecl::Type::Hopping;
        if (!jt.contains("modes") || !jt.at("modes").is_array() || jt.at("modes").size() != 2 ||
            !jt.at("modes")[0].is_number() || !jt.at("modes")[1].is_number())
          fail(where + ": 'modes' must be a pair of indices", "kind-mismatch");
        t.mode_a = jt.at("modes")[0].get<int>();
        t.mode_b = jt.at("modes")[1].get<int>();
        t.rate = get_number<double>(jt, where, "tau");
      } else if (type == "kerr") {
        expect_keys(jt, where, {"type", "mode", "g"});
        t.type = TermDecl::Type::Kerr;
        t.mode_a = get_number<int>(jt, where, "mode");
        t.rate = get_number<double>(jt, where, "g");
      } else if (type == "jc") {
        expect_keys(jt, where, {"type", "boson", "two_level", "eta"});
        t.type = TermDecl::Type::JC;
        t.mode_a = get_number<int>(jt, where, "boson");
        t.mode_b = get_number<int>(jt, where, "two_level");
        t.rate = get_number<double>(jt, where, "eta");
      } else if (type == "drive") {
        expect_keys(jt, where, {"type", "mode", "f", "envelope"});
        t.type = TermDecl::Type::Drive;
        t.mode_a = get_number<int>(jt, where, "mode");
        t.rate = get_number<double>(jt, where, "f");
        if (jt.contains("envelope")) t.envelope = parse_envelope(jt.at("envelope"), where);
      } else {
        fail(where + ": unknown term type '" + type + "'", "kind-mismatch");
      }
      s.terms.push_back(std::move(t));
      ++term_idx;
    }
  }

  if (j.contains("channels")) {
    if (!j.at("channels").is_array()) fail("'channels' must be an array", "kind-mismatch");
    int ch_idx = 0;
    for (const auto& jc : j.at("channels")) {
      const std::string where = "channels[" + std::to_string(ch_idx) + "]";
      if (!jc.is_object()) fail(where + " must be an object", "kind-mismatch");
      expect_keys(jc, where, {"mode", "kind", "p", "rate"});
      ChannelDecl c;
      c.mode = get_number<int>(jc, where, "mode");
      const std::string kind = get_string(jc, where, "kind");
      if (kind == "loss") {
        c.kind = ChannelKind::Loss;
        c.p = get_number_or<int>(jc, where, "p", 1);
      } else if (kind == "gain") {
        c.kind = ChannelKind::Gain;
        if (jc.contains("p")) fail(where + ": 'p' is for loss channels only", "kind-mismatch");
        c.p = 1;
      } else {
        fail(where + ": unknown channel kind '" + kind + "'", "kind-mismatch");
      }
      c.rate = get_number<double>(jc, where, "rate");
      s.channels.push_back(c);
      ++ch_idx;
    }
  }

  if (!j.contains("initial_state") || !j.at("initial_state").is_array())
    fail("scenario needs an 'initial_state' array", "cross-ref");
  int init_idx = 0;
  for (const auto& ji : j.at("initial_state")) {
    const std::string where = "initial_state[" + std::to_string(init_idx) + "]";
    if (!ji.is_object()) fail(where + " must be an object", "kind-mismatch");
    const std::string type = get_string(ji, where, "type");
    InitDecl init;
    if (type == "coherent") {
      expect_keys(ji, where, {"type", "n", "phase"});
      init.type = InitDecl::Type::Coherent;
      init.n = get_number<double>(ji, where, "n");
      init.phase = get_number_or<double>(ji, where, "phase", 0.0);
    } else if (type == "fock") {
      expect_keys(ji, where, {"type", "n"});
      init.type = InitDecl::Type::Fock;
      init.fock_n = get_number<int>(ji, where, "n");
    } else if (type == "ground") {
      expect_keys(ji, where, {"type"});
      init.type = InitDecl::Type::Ground;
    } else if (type == "excited") {
      expect_keys(ji, where, {"type"});
      init.type = InitDecl::Type::Excited;
    } else {
      fail(where + ": unknown initial state type '" + type + "'", "kind-mismatch");
    }
    s.initial.push_back(init);
    ++init_idx;
  }

  if (!j.contains("time") || !j.at("time").is_object())
    fail("scenario needs a 'time' object", "cross-ref");
  expect_keys(j.at("time"), "time", {"t_end", "n_points"});
  s.time.t_end = get_number<double>(j.at("time"), "time", "t_end");
  s.time.n_points = get_number<int>(j.at("time"), "time", "n_points");

  if (j.contains("correlators")) {
    if (!j.at("correlators").is_object()) fail("'correlators' must be an object", "kind-mismatch");
    expect_keys(j.at("correlators"), "correlators", {"orders"});
    const auto& jo = j.at("correlators");
    if (jo.contains("orders")) {
      if (!jo.at("orders").is_array()) fail("'orders' must be an array", "kind-mismatch");
      s.orders.clear();
      for (const auto& o : jo.at("orders")) {
        if (!o.is_number()) fail("'orders' entries must be integers", "kind-mismatch");
        s.orders.push_back(o.get<int>());
      }
    }
  }

  if (!j.contains("engine") || !j.at("engine").is_object())
    fail("scenario needs an 'engine' object", "cross-ref");
  {
    const auto& je = j.at("engine");
    const std::string type = get_string(je, "engine", "type");
    if (type == "exact") {
      expect_keys(je, "engine", {"type", "tol", "leakage_bound"});
      s.engine.type = EngineDecl::Type::Exact;
      s.engine.tol = get_number_or<double>(je, "engine", "tol", 1e-9);
      s.engine.leakage_bound = get_number_or<double>(je, "engine", "leakage_bound", 1e-3);
    } else if (type == "positive_p") {
      expect_keys(je, "engine",
                  {"type", "n_traj", "seed", "dt", "threads", "escape_radius",
                   "convergence_check"});
      s.engine.type = EngineDecl::Type::PositiveP;
      s.engine.n_traj = get_number<int>(je, "engine", "n_traj");
      s.engine.seed = get_number<std::uint64_t>(je, "engine", "seed");
      s.engine.dt = get_number<double>(je, "engine", "dt");
      s.engine.threads = get_number_or<int>(je, "engine", "threads", 0);
      s.engine.escape_radius = get_number_or<double>(je, "engine", "escape_radius", 1e6);
      if (je.contains("convergence_check")) {
        if (!je.at("convergence_check").is_boolean())
          fail("'convergence_check' must be a boolean", "kind-mismatch");
        s.engine.convergence_check = je.at("convergence_check").get<bool>();
      }
    } else {
      fail("unknown engine type '" + type + "'", "kind-mismatch");
    }
  }

  if (j.contains("output")) {
    if (!j.at("output").is_object()) fail("'output' must be an object", "kind-mismatch");
    expect_keys(j.at("output"), "output", {"directory"});
    if (j.at("output").contains("directory"))
      s.output_dir = get_string(j.at("output"), "output", "directory");
  }

  validate_scenario(s);
  return s;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  try {
    return parse_scenario_impl(text, origin);
  } catch (const nlohmann::json::exception& e) {
    fail(origin + ": malformed scenario: " + e.what(), "kind-mismatch");
  }
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file: " + path, "cross-ref");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

std::string render_scenario(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["gamma"] = s.gamma;
  j["modes"] = ordered_json::array();
  for (const auto& m : s.modes) {
    ordered_json jm;
    jm["kind"] = m.kind == ModeKind::Boson ? "boson" : "two_level";
    if (m.kind == ModeKind::Boson) jm["cutoff"] = m.cutoff;
    jm["label"] = m.label;
    j["modes"].push_back(jm);
  }
  j["hamiltonian"] = ordered_json::array();
  for (const auto& t : s.terms) {
    ordered_json jt;
    switch (t.type) {
      case TermDecl::Type::Detuning:
        jt["type"] = "detuning";
        jt["mode"] = t.mode_a;
        jt["omega"] = t.rate;
        break;
      case TermDecl::Type::Hopping:
        jt["type"] = "hopping";
        jt["modes"] = {t.mode_a, t.mode_b};
        jt["tau"] = t.rate;
        break;
      case TermDecl::Type::Kerr:
        jt["type"] = "kerr";
        jt["mode"] = t.mode_a;
        jt["g"] = t.rate;
        break;
      case TermDecl::Type::JC:
        jt["type"] = "jc";
        jt["boson"] = t.mode_a;
        jt["two_level"] = t.mode_b;
        jt["eta"] = t.rate;
        break;
      case TermDecl::Type::Drive:
        jt["type"] = "drive";
        jt["mode"] = t.mode_a;
        jt["f"] = t.rate;
        jt["envelope"] = render_envelope(t.envelope);
        break;
    }
    j["hamiltonian"].push_back(jt);
  }
  j["channels"] = ordered_json::array();
  for (const auto& c : s.channels) {
    ordered_json jc;
    jc["mode"] = c.mode;
    jc["kind"] = c.kind == ChannelKind::Loss ? "loss" : "gain";
    if (c.kind == ChannelKind::Loss) jc["p"] = c.p;
    jc["rate"] = c.rate;
    j["channels"].push_back(jc);
  }
  j["initial_state"] = ordered_json::array();
  for (const auto& init : s.initial) {
    ordered_json ji;
    switch (init.type) {
      case InitDecl::Type::Coherent:
        ji["type"] = "coherent";
        ji["n"] = init.n;
        ji["phase"] = init.phase;
        break;
      case InitDecl::Type::Fock:
        ji["type"] = "fock";
        ji["n"] = init.fock_n;
        break;
      case InitDecl::Type::Ground: ji["type"] = "ground"; break;
      case InitDecl::Type::Excited: ji["type"] = "excited"; break;
    }
    j["initial_state"].push_back(ji);
  }
  j["time"]["t_end"] = s.time.t_end;
  j["time"]["n_points"] = s.time.n_points;
  j["correlators"]["orders"] = s.orders;
  if (s.engine.type == EngineDecl::Type::Exact) {
    j["engine"]["type"] = "exact";
    j["engine"]["tol"] = s.engine.tol;
    j["engine"]["leakage_bound"] = s.engine.leakage_bound;
  } else {
    j["engine"]["type"] = "positive_p";
    j["engine"]["n_traj"] = s.engine.n_traj;
    j["engine"]["seed"] = s.engine.seed;
    j["engine"]["dt"] = s.engine.dt;
    j["engine"]["threads"] = s.engine.threads;
    j["engine"]["escape_radius"] = s.engine.escape_radius;
    j["engine"]["convergence_check"] = s.engine.convergence_check;
  }
  if (!s.output_dir.empty()) j["output"]["directory"] = s.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace qcorr
