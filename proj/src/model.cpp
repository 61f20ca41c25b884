#include "qcorr/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

void check_mode_index(const HilbertSpace& space, int i, const char* what) {
  if (i < 0 || i >= space.num_modes())
    throw ValidationError(std::string(what) + ": mode index out of range", "cross-ref");
}

// Modes referenced by any Hamiltonian term.
std::set<int> modes_in_hamiltonian(const ModelSpec& spec) {
  std::set<int> used;
  for (const auto& term : spec.terms) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Detuning>) used.insert(t.mode);
          else if constexpr (std::is_same_v<T, Hopping>) { used.insert(t.mode_a); used.insert(t.mode_b); }
          else if constexpr (std::is_same_v<T, Kerr>) used.insert(t.mode);
          else if constexpr (std::is_same_v<T, JCCoupling>) { used.insert(t.boson); used.insert(t.two_level); }
          else if constexpr (std::is_same_v<T, Drive>) used.insert(t.mode);
        },
        term);
  }
  return used;
}

}  // namespace

void ModelSpec::validate() const {
  if (space.num_modes() == 0) throw ValidationError("model has no modes");
  for (const auto& term : terms) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Detuning>) {
            check_mode_index(space, t.mode, "Detuning");
          } else if constexpr (std::is_same_v<T, Hopping>) {
            check_mode_index(space, t.mode_a, "Hopping");
            check_mode_index(space, t.mode_b, "Hopping");
            if (t.mode_a == t.mode_b)
              throw ValidationError("Hopping must reference two distinct modes", "cross-ref");
          } else if constexpr (std::is_same_v<T, Kerr>) {
            check_mode_index(space, t.mode, "Kerr");
            if (space.mode(t.mode).kind != ModeKind::Boson)
              throw ValidationError("Kerr requires a bosonic mode", "kind-mismatch");
          } else if constexpr (std::is_same_v<T, JCCoupling>) {
            check_mode_index(space, t.boson, "JCCoupling");
            check_mode_index(space, t.two_level, "JCCoupling");
            if (t.boson == t.two_level)
              throw ValidationError("JCCoupling must reference two distinct modes", "cross-ref");
            if (space.mode(t.boson).kind != ModeKind::Boson ||
                space.mode(t.two_level).kind != ModeKind::TwoLevel)
              throw ValidationError("JCCoupling needs (boson, two-level) modes", "kind-mismatch");
          } else if constexpr (std::is_same_v<T, Drive>) {
            check_mode_index(space, t.mode, "Drive");
          }
        },
        term);
  }
  for (const auto& ch : channels) {
    check_mode_index(space, ch.mode, "DissipatorChannel");
    if (ch.rate < 0.0) throw ValidationError("channel rate must be >= 0");
    if (ch.p < 1) throw ValidationError("channel photon order p must be >= 1");
    const bool boson = space.mode(ch.mode).kind == ModeKind::Boson;
    if (ch.kind == ChannelKind::Gain && !boson)
      throw ValidationError("Gain is defined for bosonic modes only", "kind-mismatch");
    if (ch.kind == ChannelKind::Gain && ch.p != 1)
      throw ValidationError("Gain must have p = 1", "kind-mismatch");
    if (ch.kind == ChannelKind::Loss && !boson && ch.p != 1)
      throw ValidationError("two-level loss must have p = 1", "kind-mismatch");
  }
}

bool ModelSpec::time_dependent() const {
  for (const auto& term : terms)
    if (const auto* d = std::get_if<Drive>(&term); d && d->envelope) return true;
  return false;
}

Matrix build_hamiltonian(const ModelSpec& spec, double t) {
  spec.validate();
  const int dim = spec.space.dim();
  Matrix h = Matrix::Zero(dim, dim);
  for (const auto& term : spec.terms) {
    std::visit(
        [&](const auto& tm) {
          using T = std::decay_t<decltype(tm)>;
          if constexpr (std::is_same_v<T, Detuning>) {
            h += tm.omega * embed(number_matrix(spec.space.mode(tm.mode)), tm.mode, spec.space);
          } else if constexpr (std::is_same_v<T, Hopping>) {
            const Matrix ca = embed(lowering_matrix(spec.space.mode(tm.mode_a)), tm.mode_a, spec.space);
            const Matrix cb = embed(lowering_matrix(spec.space.mode(tm.mode_b)), tm.mode_b, spec.space);
            const Matrix hop = ca.adjoint() * cb;
            h += tm.tau * (hop + hop.adjoint());
          } else if constexpr (std::is_same_v<T, Kerr>) {
            const Matrix a = annihilation_matrix(spec.space.mode(tm.mode).cutoff);
            h += tm.g * embed((a.adjoint() * a.adjoint() * a * a).eval(), tm.mode, spec.space);
          } else if constexpr (std::is_same_v<T, JCCoupling>) {
            const Matrix a = embed(annihilation_matrix(spec.space.mode(tm.boson).cutoff), tm.boson, spec.space);
            const Matrix sm = embed(sigma_minus(), tm.two_level, spec.space);
            const Matrix jc = a.adjoint() * sm;
            h += tm.eta * (jc + jc.adjoint());
          } else if constexpr (std::is_same_v<T, Drive>) {
            const Matrix c = embed(lowering_matrix(spec.space.mode(tm.mode)), tm.mode, spec.space);
            h += (tm.amplitude * tm.envelope_eval(t)) * (c + c.adjoint());
          }
        },
        term);
  }
  return h;
}

std::vector<std::pair<double, Matrix>> build_jump_operators(const ModelSpec& spec) {
  spec.validate();
  std::vector<std::pair<double, Matrix>> jumps;
  jumps.reserve(spec.channels.size());
  for (const auto& ch : spec.channels) {
    const ModeSpec& mode = spec.space.mode(ch.mode);
    Matrix f;
    if (ch.kind == ChannelKind::Gain) {
      f = creation_matrix(mode.cutoff);
    } else if (mode.kind == ModeKind::TwoLevel) {
      f = sigma_minus();
    } else {
      const Matrix a = annihilation_matrix(mode.cutoff);
      f = Matrix::Identity(a.rows(), a.cols());
      for (int k = 0; k < ch.p; ++k) f = (f * a).eval();
    }
    jumps.emplace_back(ch.rate, embed(f, ch.mode, spec.space));
  }
  return jumps;
}

SymmetryReport check_u1_symmetry(const ModelSpec& spec, double tol,
                                 const std::vector<double>& sample_times) {
  if (tol <= 0.0) throw ValidationError("symmetry tolerance must be > 0");
  if (sample_times.empty()) throw ValidationError("need at least one sample time");
  spec.validate();

  const Matrix n = total_number_operator(spec.space);
  const double n_norm = n.norm();

  SymmetryReport report;
  report.commutator_norm = 0.0;
  for (double t : sample_times) {
    const Matrix h = build_hamiltonian(spec, t);
    const double h_norm = h.norm();
    if (h_norm == 0.0) continue;  // H = 0 is symmetric
    const double c = (h * n - n * h).norm() / (h_norm * n_norm);
    report.commutator_norm = std::max(report.commutator_norm, c);
  }
  report.is_u1_symmetric = report.commutator_norm < tol;

  report.linear_dissipation =
      std::all_of(spec.channels.begin(), spec.channels.end(),
                  [](const DissipatorChannel& ch) { return ch.linear(); });

  if (spec.channels.empty()) {
    report.uniform_rates = true;
  } else {
    bool equal = true;
    for (const auto& ch : spec.channels) equal &= ch.rate == spec.channels.front().rate;
    std::set<int> covered;
    for (const auto& ch : spec.channels) covered.insert(ch.mode);
    bool all_covered = true;
    for (int m : modes_in_hamiltonian(spec)) all_covered &= covered.count(m) > 0;
    report.uniform_rates = equal && all_covered;
  }

  report.predicted_conserved =
      report.is_u1_symmetric && report.linear_dissipation && report.uniform_rates;
  return report;
}

}  // namespace qcorr
