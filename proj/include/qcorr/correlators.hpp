#pragma once

#include <map>
#include <utility>
#include <vector>

#include "qcorr/dynamics.hpp"

namespace qcorr {

/// Denominators below this mark a correlator value undefined.
inline constexpr double kCorrelatorFloor = 1e-9;

// Correlation observables of order m for a composite space: the normally
// ordered total correlator J = Σ c†...c† c...c over all mode multi-indices,
// the total number operator N, and the pairwise operators c_i†c_j†c_ic_j.
struct CorrelatorSet {
  int m = 2;
  Matrix J_op;
  Matrix N_op;
  std::map<std::pair<int, int>, Matrix> pair_ops;  // keyed (i, j) with i <= j
  std::vector<Matrix> number_ops;                  // embedded per-mode occupations

  const Matrix& pair_op(int i, int j) const;
};

CorrelatorSet build_correlator_set(const HilbertSpace& space, int m);

/// g_tot = Tr(J ρ) / Tr(N ρ)^m. Throws UndefinedValueError below the floor.
double g_tot(const Matrix& rho, const CorrelatorSet& cs);

/// ⟨c_i†c_j†c_ic_j⟩ / (⟨n_i⟩⟨n_j⟩).
double g2_pair(const Matrix& rho, const CorrelatorSet& cs, int i, int j);

/// ⟨c_i†c_j†c_ic_j⟩ / (⟨n_i⟩+⟨n_j⟩)² — normalized to the summed occupation,
/// the form plotted alongside g_tot.
double g2_grouped(const Matrix& rho, const CorrelatorSet& cs, int i, int j);

struct ConservationReport {
  std::vector<double> series;  // NaN where the floor makes the value undefined
  double max_abs_dev = 0.0;
  double max_rel_dev = 0.0;
  bool conserved = false;
  bool floor_breached = false;
  int first_defined = -1;  // reference index; -1 when no point is defined
};

// Constancy of the g_tot series recorded in a trajectory (needs the J_<m> and
// N_total series). Leading undefined points are skipped; the first defined
// value is the reference; a breach after that truncates the tail.
ConservationReport conservation_report(const Trajectory& traj, const CorrelatorSet& cs,
                                       double threshold);

// Analytic derivative identities for the driven single mode and the
// two-mode hopping system, cross-checked against a finite-difference
// derivative of the recorded series.
enum class DerivativeIdentity {
  DriveQuartic,     // d/dt ⟨a†a†aa⟩ for the driven mode
  DriveOccupation,  // d/dt ⟨n⟩ for the driven mode
  DriveG2,          // d/dt g² for the driven mode
  HopAutoQuartic,   // d/dt ⟨a₁†a₁†a₁a₁⟩ for two coupled modes
  HopOccupation,    // d/dt ⟨n₁⟩ for two coupled modes
  HopCross,         // d/dt ⟨n₁n₂⟩ for two coupled modes
};

/// Auxiliary expectation values a given identity needs recorded.
std::vector<Observable> identity_observables(const ModelSpec& spec, DerivativeIdentity identity);

struct ResidualReport {
  double max_residual = 0.0;  // relative to the largest right-hand-side magnitude
  int points = 0;
};

// Max relative residual between the identity's analytic right-hand side
// (rates per the implemented dissipator convention) and a 4th-order centered
// finite difference of the recorded left-hand-side series, over interior
// grid points.
ResidualReport derivative_crosscheck(const Trajectory& traj, const ModelSpec& spec,
                                     DerivativeIdentity identity);

}  // namespace qcorr
