#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qcorr/model.hpp"

namespace qcorr {

// Per-mode initial state. Coherent is bosonic only (truncated and
// renormalized), Ground/Excited are two-level only.
struct InitialCoherent {
  Complex alpha;
};
struct InitialFock {
  int n = 0;
};
struct InitialGround {};
struct InitialExcited {};

using InitialModeState = std::variant<InitialCoherent, InitialFock, InitialGround, InitialExcited>;

/// Pure product state ρ = |ψ⟩⟨ψ|, one entry per mode.
Matrix initial_state(const HilbertSpace& space, const std::vector<InitialModeState>& spec);

/// Named expectation value recorded along a run.
struct Observable {
  std::string name;
  Matrix op;
};

struct IntegrateOptions {
  double leakage_bound = 1e-3;  // abort when cutoff-level population exceeds this
  long max_steps = 50000000;
  int positivity_samples = 12;  // grid points where the minimum eigenvalue is sampled
  double psd_tol = 1e-7;        // warn when min eigenvalue < -psd_tol
};

struct Trajectory {
  std::vector<double> times;
  std::map<std::string, std::vector<Complex>> records;
  std::vector<double> leakage;
  Matrix final_state;
  double leakage_max = 0.0;
  double trace_drift_max = 0.0;
  double hermiticity_drift_max = 0.0;
  double purity_max = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<std::string> diagnostics;

  const std::vector<Complex>& series(const std::string& name) const;
  bool has_series(const std::string& name) const { return records.count(name) > 0; }
};

/// Master-equation right-hand side:
///   -i[H(t),ρ] + Σ_i γ_i (2 F_i ρ F_i† - F_i†F_i ρ - ρ F_i†F_i).
/// Trace-free to round-off.
Matrix lindblad_rhs(const ModelSpec& spec, const Matrix& rho, double t);

/// Total population of basis states with any boson at its cutoff level.
double measure_leakage(const Matrix& rho, const HilbertSpace& space);

// Adaptive Dormand-Prince 5(4) integration of the master equation with
// per-step max-norm error control at tolerance `tol`, landing exactly on the
// requested output times. Occupations are always recorded; additional
// observables are caller-supplied. Leakage is checked on every accepted step.
Trajectory integrate(const ModelSpec& spec, const Matrix& rho0, const std::vector<double>& times,
                     double tol, const std::vector<Observable>& observables = {},
                     const IntegrateOptions& options = {});

}  // namespace qcorr
