#include "qcorr/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

using SpMat = Eigen::SparseMatrix<Complex>;

Vector coherent_vector(int cutoff, Complex alpha) {
  Vector psi(cutoff + 1);
  // amplitudes α^n / √(n!), built recursively; renormalized after truncation
  Complex amp{1.0, 0.0};
  psi(0) = amp;
  for (int n = 1; n <= cutoff; ++n) {
    amp *= alpha / std::sqrt(static_cast<double>(n));
    psi(n) = amp;
  }
  psi.normalize();
  return psi;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Tr(A ρ) without forming the product.
Complex trace_of_product(const Matrix& a, const Matrix& rho) {
  return (a.transpose().cwiseProduct(rho)).sum();
}

// Time-independent pieces of the generator, with drives kept separate so the
// coefficient f·h(t) can be refreshed per stage.
struct PreparedGenerator {
  SpMat h_const;
  struct DriveOp {
    double amplitude;
    std::function<double(double)> envelope;
    SpMat op;  // c + c†
  };
  std::vector<DriveOp> drives;
  struct Jump {
    double rate;
    SpMat f;
    SpMat f_dag;
    SpMat fdf;  // F†F
  };
  std::vector<Jump> jumps;

  explicit PreparedGenerator(const ModelSpec& spec) {
    spec.validate();
    ModelSpec static_part = spec;
    static_part.terms.clear();
    for (const auto& term : spec.terms) {
      if (const auto* d = std::get_if<Drive>(&term)) {
        const Matrix c = embed(lowering_matrix(spec.space.mode(d->mode)), d->mode, spec.space);
        drives.push_back({d->amplitude, d->envelope, Matrix(c + c.adjoint()).sparseView()});
      } else {
        static_part.terms.push_back(term);
      }
    }
    h_const = build_hamiltonian(static_part, 0.0).sparseView();
    for (const auto& [rate, f] : build_jump_operators(spec)) {
      SpMat fs = f.sparseView();
      SpMat fd = Matrix(f.adjoint()).sparseView();
      SpMat fdf = Matrix(f.adjoint() * f).sparseView();
      jumps.push_back({rate, std::move(fs), std::move(fd), std::move(fdf)});
    }
  }

  void apply(double t, const Matrix& rho, Matrix& out) const {
    const Complex minus_i{0.0, -1.0};
    out.noalias() = h_const * rho;
    out.noalias() -= rho * h_const;
    for (const auto& d : drives) {
      const double coeff = d.amplitude * (d.envelope ? d.envelope(t) : 1.0);
      if (coeff == 0.0) continue;
      out.noalias() += coeff * (d.op * rho);
      out.noalias() -= coeff * (rho * d.op);
    }
    out *= minus_i;
    for (const auto& j : jumps) {
      if (j.rate == 0.0) continue;
      const Matrix fr = j.f * rho;
      out.noalias() += (2.0 * j.rate) * (fr * j.f_dag);
      out.noalias() -= j.rate * (j.fdf * rho);
      out.noalias() -= j.rate * (rho * j.fdf);
    }
  }
};

std::vector<int> cutoff_level_states(const HilbertSpace& space) {
  std::vector<int> idx;
  for (int b = 0; b < space.dim(); ++b) {
    for (int m = 0; m < space.num_modes(); ++m) {
      if (space.mode(m).kind == ModeKind::Boson &&
          space.occupation(b, m) == space.mode(m).cutoff) {
        idx.push_back(b);
        break;
      }
    }
  }
  return idx;
}

double leakage_from_diagonal(const Matrix& rho, const std::vector<int>& idx) {
  double leak = 0.0;
  for (int b : idx) leak += rho(b, b).real();
  return leak;
}

}  // namespace

Matrix initial_state(const HilbertSpace& space, const std::vector<InitialModeState>& spec) {
  if (static_cast<int>(spec.size()) != space.num_modes())
    throw ValidationError("initial state needs exactly one entry per mode");
  Vector psi = Vector::Ones(1);
  for (int m = 0; m < space.num_modes(); ++m) {
    const ModeSpec& mode = space.mode(m);
    Vector factor;
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, InitialCoherent>) {
            if (mode.kind != ModeKind::Boson)
              throw ValidationError("Coherent state requires a bosonic mode", "kind-mismatch");
            factor = coherent_vector(mode.cutoff, s.alpha);
          } else if constexpr (std::is_same_v<S, InitialFock>) {
            if (mode.kind != ModeKind::Boson)
              throw ValidationError("Fock state requires a bosonic mode", "kind-mismatch");
            if (s.n < 0 || s.n > mode.cutoff)
              throw ValidationError("Fock occupation exceeds the cutoff");
            factor = Vector::Zero(mode.dimension());
            factor(s.n) = 1.0;
          } else if constexpr (std::is_same_v<S, InitialGround>) {
            if (mode.kind != ModeKind::TwoLevel)
              throw ValidationError("Ground requires a two-level mode", "kind-mismatch");
            factor = Vector::Zero(2);
            factor(0) = 1.0;
          } else {
            if (mode.kind != ModeKind::TwoLevel)
              throw ValidationError("Excited requires a two-level mode", "kind-mismatch");
            factor = Vector::Zero(2);
            factor(1) = 1.0;
          }
        },
        spec[static_cast<size_t>(m)]);
    psi = kron(psi, factor);
  }
  return psi * psi.adjoint();
}

Matrix lindblad_rhs(const ModelSpec& spec, const Matrix& rho, double t) {
  if (rho.rows() != spec.space.dim() || rho.cols() != spec.space.dim())
    throw ValidationError("density matrix dimension does not match the space");
  PreparedGenerator gen(spec);
  Matrix out(rho.rows(), rho.cols());
  gen.apply(t, rho, out);
  return out;
}

double measure_leakage(const Matrix& rho, const HilbertSpace& space) {
  return leakage_from_diagonal(rho, cutoff_level_states(space));
}

const std::vector<Complex>& Trajectory::series(const std::string& name) const {
  auto it = records.find(name);
  if (it == records.end()) throw ValidationError("missing recorded series: " + name);
  return it->second;
}

Trajectory integrate(const ModelSpec& spec, const Matrix& rho0, const std::vector<double>& times,
                     double tol, const std::vector<Observable>& observables,
                     const IntegrateOptions& options) {
  if (times.size() < 1) throw ValidationError("empty time grid");
  for (size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1]) throw ValidationError("times must be strictly increasing");
  if (tol <= 0.0) throw ValidationError("integrator tolerance must be > 0");
  if (rho0.rows() != spec.space.dim() || rho0.cols() != spec.space.dim())
    throw ValidationError("initial state dimension does not match the space");

  const PreparedGenerator gen(spec);
  const std::vector<int> leak_idx = cutoff_level_states(spec.space);

  // observable set: caller's list plus per-mode occupations; duplicate names
  // collapse onto the first occurrence
  std::vector<Observable> obs;
  auto add_observable = [&obs](const Observable& candidate) {
    for (const auto& o : obs)
      if (o.name == candidate.name) return;
    obs.push_back(candidate);
  };
  for (const auto& o : observables) add_observable(o);
  for (int m = 0; m < spec.space.num_modes(); ++m) {
    const std::string name = "n_" + spec.space.mode(m).label;
    add_observable({name, embed(number_matrix(spec.space.mode(m)), m, spec.space)});
  }

  Trajectory traj;
  traj.times = times;
  for (const auto& o : obs) traj.records[o.name] = {};
  traj.leakage.reserve(times.size());

  // Dormand-Prince 5(4) coefficients
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const int dim = spec.space.dim();
  Matrix y = rho0;
  Matrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), k5(dim, dim), k6(dim, dim),
      k7(dim, dim), ytmp(dim, dim), yerr(dim, dim), ynew(dim, dim);

  double t = times.front();
  const double t_span = times.back() - times.front();

  auto record_at = [&](const Matrix& rho) {
    for (const auto& o : obs) traj.records[o.name].push_back(trace_of_product(o.op, rho));
    const double leak = leakage_from_diagonal(rho, leak_idx);
    traj.leakage.push_back(leak);
    traj.leakage_max = std::max(traj.leakage_max, leak);
    traj.trace_drift_max = std::max(traj.trace_drift_max, std::abs(rho.trace().real() - 1.0) +
                                                              std::abs(rho.trace().imag()));
    traj.hermiticity_drift_max =
        std::max(traj.hermiticity_drift_max, (rho - rho.adjoint()).norm());
    traj.purity_max = std::max(traj.purity_max, rho.squaredNorm());
  };

  record_at(y);

  // initial step-size guess, refined by the controller
  gen.apply(t, y, k1);
  bool k1_fresh = true;
  double h = 0.0;
  {
    const double d0 = std::max(y.cwiseAbs().maxCoeff(), 1e-8);
    const double d1 = std::max(k1.cwiseAbs().maxCoeff(), 1e-12);
    h = std::min(0.01 * d0 / d1, t_span > 0 ? t_span / 10.0 : 1.0);
    if (h <= 0.0 || !std::isfinite(h)) h = 1e-6;
  }

  long steps = 0;
  // positivity samples: a sparse subset of grid indices
  std::vector<size_t> psd_at;
  if (options.positivity_samples > 0 && times.size() > 1) {
    const size_t stride =
        std::max<size_t>(1, (times.size() - 1) / static_cast<size_t>(options.positivity_samples));
    for (size_t k = 0; k < times.size(); k += stride) psd_at.push_back(k);
    if (psd_at.back() != times.size() - 1) psd_at.push_back(times.size() - 1);
  } else {
    psd_at.push_back(times.size() - 1);
  }
  size_t psd_cursor = 0;
  traj.min_eigenvalue = 1.0;
  auto sample_positivity = [&](size_t grid_index, const Matrix& rho) {
    if (psd_cursor < psd_at.size() && psd_at[psd_cursor] == grid_index) {
      ++psd_cursor;
      const Matrix herm = 0.5 * (rho + rho.adjoint());
      Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      traj.min_eigenvalue = std::min(traj.min_eigenvalue, lmin);
      if (lmin < -options.psd_tol)
        traj.diagnostics.push_back("positivity violation: min eigenvalue " +
                                   std::to_string(lmin) + " at t = " +
                                   std::to_string(times[grid_index]));
    }
  };
  sample_positivity(0, y);

  for (size_t target_idx = 1; target_idx < times.size(); ++target_idx) {
    const double target = times[target_idx];
    while (t < target) {
      if (++steps > options.max_steps) throw EngineError("integrator exceeded the step limit");
      const double h_left = target - t;
      const bool clamped = h > h_left;
      const double h_try = clamped ? h_left : h;
      if (h_try < 1e-14 * std::max({1.0, std::abs(t), t_span}))
        throw EngineError("integrator step size underflow");

      if (!k1_fresh) {
        gen.apply(t, y, k1);
        k1_fresh = true;
      }
      ytmp = y + (h_try * a21) * k1;
      gen.apply(t + c2 * h_try, ytmp, k2);
      ytmp = y + h_try * (a31 * k1 + a32 * k2);
      gen.apply(t + c3 * h_try, ytmp, k3);
      ytmp = y + h_try * (a41 * k1 + a42 * k2 + a43 * k3);
      gen.apply(t + c4 * h_try, ytmp, k4);
      ytmp = y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      gen.apply(t + c5 * h_try, ytmp, k5);
      ytmp = y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      gen.apply(t + h_try, ytmp, k6);
      ynew = y + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      gen.apply(t + h_try, ynew, k7);

      yerr = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double scale = tol * std::max(1.0, y.cwiseAbs().maxCoeff());
      const double ratio = yerr.cwiseAbs().maxCoeff() / scale;

      double factor = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
      factor = std::clamp(factor, 0.2, 5.0);

      if (ratio <= 1.0) {
        t += h_try;
        if (clamped) t = target;  // avoid a 1-ulp sliver step
        y.swap(ynew);
        k1 = k7;  // FSAL
        k1_fresh = true;
        const double leak = leakage_from_diagonal(y, leak_idx);
        traj.leakage_max = std::max(traj.leakage_max, leak);
        if (leak > options.leakage_bound)
          throw EngineError("truncation error: cutoff-level population " + std::to_string(leak) +
                            " exceeds the bound " + std::to_string(options.leakage_bound));
        double h_next = h_try * factor;
        if (clamped) h_next = std::max(h_next, h);  // do not punish grid clamping
        h = h_next;
      } else {
        h = h_try * factor;
        // k1 still valid: same (t, y)
      }
    }
    record_at(y);
    sample_positivity(target_idx, y);
  }

  traj.final_state = y;
  return traj;
}

}  // namespace qcorr
