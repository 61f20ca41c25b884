#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcorr/model.hpp"

namespace qcorr {

// Doubled-phase-space drift/diffusion data for a bosonic model with linear
// terms, Kerr nonlinearities and classical drives. The α block evolves as
//   dα/dt = A α - i f h(t) - 2i g_i β_i α_i² + noise,  (dα_i)² = -2i g_i α_i² dt
// and the β block is the conjugate mirror (α ↔ β, coefficients conjugated).
// Gain channels add correlated (α, β) noise with ⟨dα dβ⟩ = 2γ₊ dt.
struct PPModel {
  int n_modes = 0;
  Eigen::MatrixXcd linear;             // A: detuning, hopping, loss and gain drift
  std::vector<double> kerr;            // g per mode
  std::vector<double> drive_amp;       // f per mode (0 when undriven)
  std::vector<std::function<double(double)>> drive_env;  // empty = CW
  std::vector<double> gain;            // γ₊ per mode
  std::vector<Complex> kerr_noise_alpha;  // sqrt(-2ig), 0 when g = 0
  std::vector<Complex> kerr_noise_beta;   // sqrt(+2ig)

  bool stochastic() const;
};

/// Positive-P correspondence applied to the master equation.
/// Throws ValidationError for unsupported mode/term/channel kinds.
PPModel pp_drift_diffusion(const ModelSpec& spec);

struct PPEstimate {
  std::vector<Complex> mean;
  std::vector<double> se_real;
  std::vector<double> se_imag;
};

struct PPEnsemble {
  int n_traj = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<double> times;  // realized capture times (multiples of dt)
  // keys: n_<label>, pair_<i>_<j>, N_total, J_<m>
  std::map<std::string, PPEstimate> stats;
  std::map<int, std::vector<double>> g_tot;     // per order m
  std::map<int, std::vector<double>> g_tot_se;  // delta-method standard errors
  // grouped pairwise correlators ⟨c_i†c_j†c_ic_j⟩/(⟨n_i⟩+⟨n_j⟩)², keyed like pair_
  std::map<std::string, std::vector<double>> g2_grouped;
  std::map<std::string, std::vector<double>> g2_grouped_se;
  int excluded = 0;
  std::string noise_factorization;
  std::vector<std::string> diagnostics;
};

struct PPRunOptions {
  int n_traj = 1000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  std::vector<int> orders = {2};
  double escape_radius = 1e6;
  int threads = 0;  // 0 = hardware concurrency
  bool convergence_check = false;
};

// Fixed-step split-step Itô evolution of independent trajectories: exact
// matrix-exponential propagation of the linear drift, Heun (predictor-
// corrector) for the Kerr/drive drift, and left-point multiplicative noise.
// Trajectory k's noise stream depends only on (seed, k), so output bits are
// identical for any worker count.
PPEnsemble pp_run(const ModelSpec& spec, const std::vector<Complex>& alpha0,
                  const std::vector<double>& times, const PPRunOptions& options);

}  // namespace qcorr
