#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "qcorr/hilbert.hpp"

namespace qcorr {

// Hamiltonian terms. All rates are angular frequencies in the same units as
// the dissipation rates.

struct Detuning {
  int mode = 0;
  double omega = 0.0;  // ω n
};

struct Hopping {
  int mode_a = 0, mode_b = 1;
  double tau = 0.0;  // τ (c_a† c_b + c_b† c_a)
};

struct Kerr {
  int mode = 0;
  double g = 0.0;  // g a†²a²
};

struct JCCoupling {
  int boson = 0, two_level = 1;
  double eta = 0.0;  // η (a†σ⁻ + aσ⁺)
};

struct Drive {
  int mode = 0;
  double amplitude = 0.0;                     // f
  std::function<double(double)> envelope;     // h(t); empty means CW (h ≡ 1)
  double envelope_eval(double t) const { return envelope ? envelope(t) : 1.0; }
};

using HamiltonianTerm = std::variant<Detuning, Hopping, Kerr, JCCoupling, Drive>;

enum class ChannelKind { Loss, Gain };

// Jump operator F = a^p (boson loss), σ⁻ (two-level loss, p = 1), or a† (gain).
struct DissipatorChannel {
  int mode = 0;
  ChannelKind kind = ChannelKind::Loss;
  int p = 1;          // photon order for Loss; must be 1 for Gain and two-level
  double rate = 0.0;  // γ ≥ 0

  bool linear() const { return p == 1; }
};

struct ModelSpec {
  HilbertSpace space;
  std::vector<HamiltonianTerm> terms;
  std::vector<DissipatorChannel> channels;

  /// Throws ValidationError on invalid indices, kinds, or rates.
  void validate() const;
  bool time_dependent() const;  // true iff any drive has a non-constant envelope
};

struct SymmetryReport {
  double commutator_norm = 0.0;  // max_t ‖[H(t),N]‖_F / (‖H(t)‖_F ‖N‖_F)
  bool is_u1_symmetric = false;
  bool linear_dissipation = false;
  bool uniform_rates = false;
  bool predicted_conserved = false;
};

/// Assemble H(t) = Σ terms. Hermitian for all t.
Matrix build_hamiltonian(const ModelSpec& spec, double t);

/// One (γ, F) pair per channel.
std::vector<std::pair<double, Matrix>> build_jump_operators(const ModelSpec& spec);

// Numerical U(1) analysis: commutator norm of [H(t), N] over the sampled
// times plus the dissipation-structure conditions of the conservation
// statement. predicted_conserved = symmetric ∧ linear ∧ uniform rates.
SymmetryReport check_u1_symmetry(const ModelSpec& spec, double tol,
                                 const std::vector<double>& sample_times);

}  // namespace qcorr
