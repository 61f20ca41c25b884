#include "qcorr/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

Complex expectation(const Matrix& op, const Matrix& rho) {
  return (op.transpose().cwiseProduct(rho)).sum();
}

double real_expectation(const Matrix& op, const Matrix& rho, const char* what) {
  const Complex v = expectation(op, rho);
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
    throw EngineError(std::string(what) + ": expectation has a non-negligible imaginary part");
  return v.real();
}

// Non-decreasing multi-indices of length m over n modes, with the multinomial
// weight m!/Πk_j! for the number of orderings that collapse onto each one.
void for_each_multiset(int n_modes, int m,
                       const std::function<void(const std::vector<int>&, double)>& fn) {
  std::vector<int> idx(static_cast<size_t>(m), 0);
  double m_fact = 1.0;
  for (int k = 2; k <= m; ++k) m_fact *= k;
  while (true) {
    double denom = 1.0;
    int run = 1;
    for (size_t k = 1; k < idx.size(); ++k) {
      if (idx[k] == idx[k - 1]) {
        ++run;
        denom *= run;
      } else {
        run = 1;
      }
    }
    fn(idx, m_fact / denom);
    int k = m - 1;
    while (k >= 0 && idx[static_cast<size_t>(k)] == n_modes - 1) --k;
    if (k < 0) break;
    const int next = idx[static_cast<size_t>(k)] + 1;
    for (size_t j = static_cast<size_t>(k); j < idx.size(); ++j) idx[j] = next;
  }
}

bool defined(double x) { return !std::isnan(x); }

}  // namespace

const Matrix& CorrelatorSet::pair_op(int i, int j) const {
  auto it = pair_ops.find({std::min(i, j), std::max(i, j)});
  if (it == pair_ops.end()) throw ValidationError("no pair operator for the given modes");
  return it->second;
}

CorrelatorSet build_correlator_set(const HilbertSpace& space, int m) {
  if (m < 2) throw ValidationError("correlator order m must be >= 2");
  CorrelatorSet cs;
  cs.m = m;
  cs.N_op = total_number_operator(space);

  const int n_modes = space.num_modes();
  // per-mode powers of the embedded lowering operator, up to m
  std::vector<std::vector<Matrix>> lower_pow(static_cast<size_t>(n_modes));
  for (int i = 0; i < n_modes; ++i) {
    const Matrix c = embed(lowering_matrix(space.mode(i)), i, space);
    auto& pows = lower_pow[static_cast<size_t>(i)];
    pows.push_back(Matrix::Identity(space.dim(), space.dim()));
    for (int k = 1; k <= m; ++k) pows.push_back((pows.back() * c).eval());
  }

  cs.J_op = Matrix::Zero(space.dim(), space.dim());
  for_each_multiset(n_modes, m, [&](const std::vector<int>& idx, double weight) {
    std::vector<int> mult(static_cast<size_t>(n_modes), 0);
    for (int i : idx) ++mult[static_cast<size_t>(i)];
    // a two-level mode raised twice vanishes identically
    for (int i = 0; i < n_modes; ++i)
      if (space.mode(i).kind == ModeKind::TwoLevel && mult[static_cast<size_t>(i)] > 1) return;
    Matrix lower = Matrix::Identity(space.dim(), space.dim());
    for (int i = 0; i < n_modes; ++i) {
      const int k = mult[static_cast<size_t>(i)];
      if (k > 0) lower = (lower * lower_pow[static_cast<size_t>(i)][static_cast<size_t>(k)]).eval();
    }
    cs.J_op += weight * (lower.adjoint() * lower);
  });

  for (int i = 0; i < n_modes; ++i)
    for (int j = i; j < n_modes; ++j) {
      const Matrix& ci = lower_pow[static_cast<size_t>(i)][1];
      const Matrix& cj = lower_pow[static_cast<size_t>(j)][1];
      const Matrix low = ci * cj;
      cs.pair_ops[{i, j}] = low.adjoint() * low;
    }
  for (int i = 0; i < n_modes; ++i) {
    const Matrix& ci = lower_pow[static_cast<size_t>(i)][1];
    cs.number_ops.push_back(ci.adjoint() * ci);
  }
  return cs;
}

double g_tot(const Matrix& rho, const CorrelatorSet& cs) {
  const double n = real_expectation(cs.N_op, rho, "g_tot");
  if (n < kCorrelatorFloor)
    throw UndefinedValueError("g_tot undefined: total occupation below the floor");
  const double j = real_expectation(cs.J_op, rho, "g_tot");
  return j / std::pow(n, cs.m);
}

double g2_pair(const Matrix& rho, const CorrelatorSet& cs, int i, int j) {
  const double ni = real_expectation(cs.number_ops.at(static_cast<size_t>(i)), rho, "g2_pair");
  const double nj = real_expectation(cs.number_ops.at(static_cast<size_t>(j)), rho, "g2_pair");
  if (ni < kCorrelatorFloor || nj < kCorrelatorFloor)
    throw UndefinedValueError("g2_pair undefined: occupation below the floor");
  const double p = real_expectation(cs.pair_op(i, j), rho, "g2_pair");
  return p / (ni * nj);
}

double g2_grouped(const Matrix& rho, const CorrelatorSet& cs, int i, int j) {
  const double ni = real_expectation(cs.number_ops.at(static_cast<size_t>(i)), rho, "g2_grouped");
  const double nj = real_expectation(cs.number_ops.at(static_cast<size_t>(j)), rho, "g2_grouped");
  const double denom = ni + nj;
  if (denom < kCorrelatorFloor)
    throw UndefinedValueError("g2_grouped undefined: occupations below the floor");
  const double p = real_expectation(cs.pair_op(i, j), rho, "g2_grouped");
  return p / (denom * denom);
}

ConservationReport conservation_report(const Trajectory& traj, const CorrelatorSet& cs,
                                       double threshold) {
  const auto& j_series = traj.series("J_" + std::to_string(cs.m));
  const auto& n_series = traj.series("N_total");
  const size_t n_pts = traj.times.size();

  ConservationReport report;
  report.series.assign(n_pts, std::numeric_limits<double>::quiet_NaN());

  bool seen_defined = false;
  bool truncated = false;
  for (size_t k = 0; k < n_pts; ++k) {
    const double n = n_series[k].real();
    if (n < kCorrelatorFloor) {
      report.floor_breached = true;
      if (seen_defined) truncated = true;  // tail after a breach stays undefined
      continue;
    }
    if (truncated) continue;
    report.series[k] = j_series[k].real() / std::pow(n, cs.m);
    if (!seen_defined) {
      seen_defined = true;
      report.first_defined = static_cast<int>(k);
    }
  }

  if (!seen_defined) {
    report.conserved = false;
    return report;
  }
  const double ref = report.series[static_cast<size_t>(report.first_defined)];
  for (size_t k = static_cast<size_t>(report.first_defined); k < n_pts; ++k) {
    if (!defined(report.series[k])) continue;
    report.max_abs_dev = std::max(report.max_abs_dev, std::abs(report.series[k] - ref));
  }
  report.max_rel_dev = report.max_abs_dev / std::max(std::abs(ref), 1e-12);
  report.conserved = report.max_rel_dev < threshold;
  return report;
}

namespace {

struct IdentityContext {
  double coupling = 0.0;                   // f for drive identities, τ for hopping
  std::function<double(double)> envelope;  // drive envelope; empty = CW
  std::vector<double> mode_loss;           // summed linear loss rate per mode
};

bool is_drive_identity(DerivativeIdentity id) {
  return id == DerivativeIdentity::DriveQuartic || id == DerivativeIdentity::DriveOccupation ||
         id == DerivativeIdentity::DriveG2;
}

IdentityContext identity_context(const ModelSpec& spec, DerivativeIdentity id) {
  spec.validate();
  IdentityContext ctx;
  ctx.mode_loss.assign(static_cast<size_t>(spec.space.num_modes()), 0.0);
  for (const auto& ch : spec.channels) {
    if (ch.kind != ChannelKind::Loss || ch.p != 1)
      throw ValidationError("derivative identities require linear loss channels only",
                            "kind-mismatch");
    ctx.mode_loss[static_cast<size_t>(ch.mode)] += ch.rate;
  }

  if (is_drive_identity(id)) {
    if (spec.space.num_modes() != 1 || spec.space.mode(0).kind != ModeKind::Boson)
      throw ValidationError("drive identities apply to a single bosonic mode",
                            "kind-mismatch");
    int n_drives = 0;
    for (const auto& term : spec.terms) {
      if (const auto* d = std::get_if<Drive>(&term)) {
        ++n_drives;
        ctx.coupling = d->amplitude;
        ctx.envelope = d->envelope;
      } else if (!std::holds_alternative<Detuning>(term) && !std::holds_alternative<Kerr>(term)) {
        throw ValidationError("drive identities allow Detuning/Kerr/Drive terms only",
                              "kind-mismatch");
      }
    }
    if (n_drives > 1)
      throw ValidationError("drive identities expect at most one drive term", "kind-mismatch");
  } else {
    if (spec.space.num_modes() != 2 || spec.space.mode(0).kind != ModeKind::Boson ||
        spec.space.mode(1).kind != ModeKind::Boson)
      throw ValidationError("hopping identities apply to two bosonic modes", "kind-mismatch");
    int n_hops = 0;
    for (const auto& term : spec.terms) {
      if (const auto* h = std::get_if<Hopping>(&term)) {
        ++n_hops;
        ctx.coupling = h->tau;
      } else if (!std::holds_alternative<Detuning>(term) && !std::holds_alternative<Kerr>(term)) {
        throw ValidationError("hopping identities allow Detuning/Kerr/Hopping terms only",
                              "kind-mismatch");
      }
    }
    if (n_hops != 1)
      throw ValidationError("hopping identities expect exactly one hopping term",
                            "kind-mismatch");
  }
  return ctx;
}

}  // namespace

std::vector<Observable> identity_observables(const ModelSpec& spec, DerivativeIdentity id) {
  identity_context(spec, id);  // validates shape
  const HilbertSpace& space = spec.space;
  std::vector<Observable> obs;
  if (is_drive_identity(id)) {
    const Matrix a = embed(annihilation_matrix(space.mode(0).cutoff), 0, space);
    const Matrix ad = a.adjoint();
    obs.push_back({"quartic_0", ad * ad * a * a});
    obs.push_back({"cubic_0", ad * a * a});
    obs.push_back({"amp_0", a});
  } else {
    const Matrix a0 = embed(annihilation_matrix(space.mode(0).cutoff), 0, space);
    const Matrix a1 = embed(annihilation_matrix(space.mode(1).cutoff), 1, space);
    const Matrix n0 = a0.adjoint() * a0;
    const Matrix n1 = a1.adjoint() * a1;
    const Matrix id_m = Matrix::Identity(space.dim(), space.dim());
    obs.push_back({"quartic_0", a0.adjoint() * a0.adjoint() * a0 * a0});
    obs.push_back({"hop_quartic", a0.adjoint() * a0 * a0 * a1.adjoint()});
    obs.push_back({"coh_01", a0.adjoint() * a1});
    obs.push_back({"cross_01", a0.adjoint() * a1.adjoint() * a0 * a1});
    obs.push_back({"w1_01", (n0 - n1 - id_m) * (a0.adjoint() * a1)});
  }
  return obs;
}

ResidualReport derivative_crosscheck(const Trajectory& traj, const ModelSpec& spec,
                                     DerivativeIdentity id) {
  const IdentityContext ctx = identity_context(spec, id);
  const size_t n = traj.times.size();
  if (n < 5) throw ValidationError("derivative check needs at least 5 grid points");

  const double dt = traj.times[1] - traj.times[0];
  for (size_t k = 1; k + 1 < n; ++k)
    if (std::abs((traj.times[k + 1] - traj.times[k]) - dt) > 1e-9 * dt)
      throw ValidationError("derivative check needs a uniform time grid");

  auto envelope_at = [&](double t) { return ctx.envelope ? ctx.envelope(t) : 1.0; };

  // assemble the left-hand-side series and the analytic right-hand side
  std::vector<double> lhs(n), rhs(n);
  switch (id) {
    case DerivativeIdentity::DriveQuartic: {
      const auto& q = traj.series("quartic_0");
      const auto& cu = traj.series("cubic_0");
      const double gamma = ctx.mode_loss[0];
      for (size_t k = 0; k < n; ++k) {
        lhs[k] = q[k].real();
        const double fh = ctx.coupling * envelope_at(traj.times[k]);
        rhs[k] = -4.0 * fh * cu[k].imag() - 4.0 * gamma * q[k].real();
      }
      break;
    }
    case DerivativeIdentity::DriveOccupation: {
      const auto& nn = traj.series("n_" + spec.space.mode(0).label);
      const auto& amp = traj.series("amp_0");
      const double gamma = ctx.mode_loss[0];
      for (size_t k = 0; k < n; ++k) {
        lhs[k] = nn[k].real();
        const double fh = ctx.coupling * envelope_at(traj.times[k]);
        rhs[k] = -2.0 * fh * amp[k].imag() - 2.0 * gamma * nn[k].real();
      }
      break;
    }
    case DerivativeIdentity::DriveG2: {
      const auto& q = traj.series("quartic_0");
      const auto& cu = traj.series("cubic_0");
      const auto& amp = traj.series("amp_0");
      const auto& nn = traj.series("n_" + spec.space.mode(0).label);
      for (size_t k = 0; k < n; ++k) {
        const double occ = nn[k].real();
        if (occ < kCorrelatorFloor)
          throw UndefinedValueError("g² undefined on the grid (occupation below floor)");
        const double g2 = q[k].real() / (occ * occ);
        lhs[k] = g2;
        const double fh = ctx.coupling * envelope_at(traj.times[k]);
        rhs[k] = fh / (occ * occ) * (-4.0 * cu[k].imag() + 4.0 * occ * g2 * amp[k].imag());
      }
      break;
    }
    case DerivativeIdentity::HopAutoQuartic: {
      const auto& q = traj.series("quartic_0");
      const auto& w = traj.series("hop_quartic");
      const double gamma = ctx.mode_loss[0];
      for (size_t k = 0; k < n; ++k) {
        lhs[k] = q[k].real();
        rhs[k] = -4.0 * ctx.coupling * w[k].imag() - 4.0 * gamma * q[k].real();
      }
      break;
    }
    case DerivativeIdentity::HopOccupation: {
      const auto& nn = traj.series("n_" + spec.space.mode(0).label);
      const auto& s = traj.series("coh_01");
      const double gamma = ctx.mode_loss[0];
      for (size_t k = 0; k < n; ++k) {
        lhs[k] = nn[k].real();
        rhs[k] = 2.0 * ctx.coupling * s[k].imag() - 2.0 * gamma * nn[k].real();
      }
      break;
    }
    case DerivativeIdentity::HopCross: {
      const auto& x = traj.series("cross_01");
      const auto& w1 = traj.series("w1_01");
      const double gamma_sum = ctx.mode_loss[0] + ctx.mode_loss[1];
      for (size_t k = 0; k < n; ++k) {
        lhs[k] = x[k].real();
        rhs[k] = -2.0 * ctx.coupling * w1[k].imag() - 2.0 * gamma_sum * x[k].real();
      }
      break;
    }
  }

  // 4th-order centered difference on the interior
  ResidualReport report;
  double scale = 0.0;
  std::vector<double> fd(n, 0.0);
  for (size_t k = 2; k + 2 < n; ++k) {
    fd[k] = (-lhs[k + 2] + 8.0 * lhs[k + 1] - 8.0 * lhs[k - 1] + lhs[k - 2]) / (12.0 * dt);
    scale = std::max({scale, std::abs(rhs[k]), std::abs(fd[k])});
    ++report.points;
  }
  if (report.points == 0) throw ValidationError("derivative check has no interior points");
  scale = std::max(scale, 1e-12);
  for (size_t k = 2; k + 2 < n; ++k)
    report.max_residual = std::max(report.max_residual, std::abs(fd[k] - rhs[k]) / scale);
  return report;
}

}  // namespace qcorr
