#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcorr/dynamics.hpp"
#include "qcorr/model.hpp"

namespace qcorr {

// Declarative scenario mirroring the file format. All rates are expressed in
// units of the declared reference rate gamma; times in units of 1/gamma.

struct EnvelopeSpec {
  enum class Type { CW, Cos, Sin };
  Type type = Type::CW;
  double freq = 0.0;  // in gamma units; used by Cos/Sin
  bool operator==(const EnvelopeSpec&) const = default;
};

struct ModeDecl {
  ModeKind kind = ModeKind::Boson;
  int cutoff = 0;
  std::string label;
  bool operator==(const ModeDecl&) const = default;
};

struct TermDecl {
  enum class Type { Detuning, Hopping, Kerr, JC, Drive };
  Type type = Type::Detuning;
  int mode_a = 0;
  int mode_b = 0;        // hopping partner / two-level side of a JC term
  double rate = 0.0;     // omega / tau / g / eta / f
  EnvelopeSpec envelope; // drives only
  bool operator==(const TermDecl&) const = default;
};

struct ChannelDecl {
  int mode = 0;
  ChannelKind kind = ChannelKind::Loss;
  int p = 1;
  double rate = 0.0;
  bool operator==(const ChannelDecl&) const = default;
};

struct InitDecl {
  enum class Type { Coherent, Fock, Ground, Excited };
  Type type = Type::Coherent;
  double n = 0.0;      // |alpha|^2 for Coherent
  double phase = 0.0;  // arg(alpha)
  int fock_n = 0;
  bool operator==(const InitDecl&) const = default;
};

struct TimeGrid {
  double t_end = 3.0;  // units of 1/gamma
  int n_points = 400;
  bool operator==(const TimeGrid&) const = default;
};

struct EngineDecl {
  enum class Type { Exact, PositiveP };
  Type type = Type::Exact;
  // exact
  double tol = 1e-9;
  double leakage_bound = 1e-3;
  // positive-P
  int n_traj = 1000;
  std::uint64_t seed = 1;
  double dt = 1e-3;  // gamma * dt
  int threads = 0;
  double escape_radius = 1e6;
  bool convergence_check = false;
  bool operator==(const EngineDecl&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  double gamma = 1.0;  // reference rate, absolute units
  std::vector<ModeDecl> modes;
  std::vector<TermDecl> terms;
  std::vector<ChannelDecl> channels;
  std::vector<InitDecl> initial;
  TimeGrid time;
  std::vector<int> orders = {2};
  EngineDecl engine;
  std::string output_dir;  // optional default for the CLI

  bool operator==(const Scenario&) const = default;

  HilbertSpace space() const;
  /// Model with absolute rates (scenario rates scaled by gamma).
  ModelSpec to_model() const;
  std::vector<InitialModeState> to_initial() const;
  /// Absolute output times.
  std::vector<double> time_grid() const;
  /// Coherent amplitudes for the positive-P engine (all modes must be coherent).
  std::vector<Complex> coherent_amplitudes() const;
};

/// Parse and validate. Throws ValidationError with a category of
/// syntax | unknown-key | cross-ref | kind-mismatch.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin);

/// Canonical JSON rendering; parse(render(s)) == s.
std::string render_scenario(const Scenario& s);

}  // namespace qcorr
