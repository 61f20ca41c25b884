#include "qcorr/positivep.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

// Box-Muller on explicit 53-bit uniforms; independent of the standard
// library's normal_distribution implementation.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    rng_.seed(seq);
  }

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

struct QuantityLayout {
  // per capture time, in order: ν_i (modes), P_ij and S_ij per pair, N, J_m per order
  int n_modes = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> orders;
  int per_time = 0;

  int nu(int i) const { return i; }
  int pair(int p) const { return n_modes + 2 * p; }
  int pair_sum(int p) const { return n_modes + 2 * p + 1; }
  int total() const { return n_modes + 2 * static_cast<int>(pairs.size()); }
  int order(int k) const { return total() + 1 + k; }
  void finalize() { per_time = total() + 1 + static_cast<int>(orders.size()); }
};

struct Accum {
  std::vector<Complex> sum;
  std::vector<double> re2, im2;
  std::vector<double> cov_jn;  // per (time, order): Σ Re(J)Re(N)
  std::vector<double> cov_ps;  // per (time, pair): Σ Re(P)Re(S)
  long included = 0;
  int excluded = 0;

  void init(size_t n_times, const QuantityLayout& lay) {
    sum.assign(n_times * static_cast<size_t>(lay.per_time), Complex{0, 0});
    re2.assign(sum.size(), 0.0);
    im2.assign(sum.size(), 0.0);
    cov_jn.assign(n_times * lay.orders.size(), 0.0);
    cov_ps.assign(n_times * lay.pairs.size(), 0.0);
  }

  void merge(const Accum& other) {
    for (size_t i = 0; i < sum.size(); ++i) {
      sum[i] += other.sum[i];
      re2[i] += other.re2[i];
      im2[i] += other.im2[i];
    }
    for (size_t i = 0; i < cov_jn.size(); ++i) cov_jn[i] += other.cov_jn[i];
    for (size_t i = 0; i < cov_ps.size(); ++i) cov_ps[i] += other.cov_ps[i];
    included += other.included;
    excluded += other.excluded;
  }
};

constexpr int kBlockSize = 64;

}  // namespace

bool PPModel::stochastic() const {
  for (double g : kerr)
    if (g != 0.0) return true;
  for (double gp : gain)
    if (gp > 0.0) return true;
  return false;
}

PPModel pp_drift_diffusion(const ModelSpec& spec) {
  spec.validate();
  const int m = spec.space.num_modes();
  for (int i = 0; i < m; ++i)
    if (spec.space.mode(i).kind != ModeKind::Boson)
      throw ValidationError("positive-P supports bosonic modes only", "kind-mismatch");

  PPModel model;
  model.n_modes = m;
  model.linear = Eigen::MatrixXcd::Zero(m, m);
  model.kerr.assign(static_cast<size_t>(m), 0.0);
  model.drive_amp.assign(static_cast<size_t>(m), 0.0);
  model.drive_env.assign(static_cast<size_t>(m), {});
  model.gain.assign(static_cast<size_t>(m), 0.0);

  const Complex i_unit{0.0, 1.0};
  for (const auto& term : spec.terms) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Detuning>) {
            model.linear(t.mode, t.mode) -= i_unit * t.omega;
          } else if constexpr (std::is_same_v<T, Hopping>) {
            model.linear(t.mode_a, t.mode_b) -= i_unit * t.tau;
            model.linear(t.mode_b, t.mode_a) -= i_unit * t.tau;
          } else if constexpr (std::is_same_v<T, Kerr>) {
            model.kerr[static_cast<size_t>(t.mode)] += t.g;
          } else if constexpr (std::is_same_v<T, Drive>) {
            if (model.drive_amp[static_cast<size_t>(t.mode)] != 0.0)
              throw ValidationError("positive-P supports one drive per mode", "kind-mismatch");
            model.drive_amp[static_cast<size_t>(t.mode)] = t.amplitude;
            model.drive_env[static_cast<size_t>(t.mode)] = t.envelope;
          } else {
            throw ValidationError("positive-P does not support this Hamiltonian term",
                                  "kind-mismatch");
          }
        },
        term);
  }
  for (const auto& ch : spec.channels) {
    if (!ch.linear())
      throw ValidationError("positive-P supports linear channels only", "kind-mismatch");
    if (ch.kind == ChannelKind::Loss)
      model.linear(ch.mode, ch.mode) -= ch.rate;
    else {
      model.linear(ch.mode, ch.mode) += ch.rate;
      model.gain[static_cast<size_t>(ch.mode)] += ch.rate;
    }
  }
  for (int i = 0; i < m; ++i) {
    const double g = model.kerr[static_cast<size_t>(i)];
    model.kerr_noise_alpha.push_back(g == 0.0 ? Complex{0, 0} : std::sqrt(Complex{0.0, -2.0 * g}));
    model.kerr_noise_beta.push_back(g == 0.0 ? Complex{0, 0} : std::sqrt(Complex{0.0, 2.0 * g}));
  }
  return model;
}

PPEnsemble pp_run(const ModelSpec& spec, const std::vector<Complex>& alpha0,
                  const std::vector<double>& times, const PPRunOptions& options) {
  if (options.n_traj < 1) throw ValidationError("positive-P needs n_traj >= 1");
  if (options.dt <= 0.0) throw ValidationError("positive-P needs dt > 0");
  if (times.empty()) throw ValidationError("empty time grid");
  for (size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1]) throw ValidationError("times must be strictly increasing");
  const PPModel model = pp_drift_diffusion(spec);
  if (static_cast<int>(alpha0.size()) != model.n_modes)
    throw ValidationError("initial amplitudes must match the mode count");

  const int m = model.n_modes;
  QuantityLayout lay;
  lay.n_modes = m;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) lay.pairs.emplace_back(i, j);
  lay.orders = options.orders;
  lay.finalize();

  // capture step indices on the fixed-step grid
  std::vector<long> capture(times.size());
  for (size_t k = 0; k < times.size(); ++k)
    capture[k] = std::lround(times[k] / options.dt);
  const long total_steps = capture.back();

  const Eigen::MatrixXcd e_alpha = (model.linear * options.dt).exp();
  const Eigen::MatrixXcd e_beta = e_alpha.conjugate();

  const size_t n_times = times.size();
  const int n_blocks = (options.n_traj + kBlockSize - 1) / kBlockSize;
  std::vector<Accum> block_accum(static_cast<size_t>(n_blocks));

  auto run_block = [&](int block) {
    Accum& acc = block_accum[static_cast<size_t>(block)];
    acc.init(n_times, lay);
    std::vector<Complex> samples(n_times * static_cast<size_t>(lay.per_time));
    const int traj_begin = block * kBlockSize;
    const int traj_end = std::min(options.n_traj, traj_begin + kBlockSize);

    Eigen::VectorXcd alpha(m), beta(m), a_next(m), b_next(m);
    for (int traj = traj_begin; traj < traj_end; ++traj) {
      GaussianStream noise(options.seed, static_cast<std::uint64_t>(traj));
      for (int i = 0; i < m; ++i) {
        alpha(i) = alpha0[static_cast<size_t>(i)];
        beta(i) = std::conj(alpha0[static_cast<size_t>(i)]);
      }
      bool diverged = false;
      size_t next_capture = 0;
      auto capture_now = [&](size_t time_idx) {
        Complex* row = samples.data() + time_idx * static_cast<size_t>(lay.per_time);
        Complex n_total{0, 0};
        for (int i = 0; i < m; ++i) {
          const Complex nu = beta(i) * alpha(i);
          row[lay.nu(i)] = nu;
          n_total += nu;
        }
        for (size_t p = 0; p < lay.pairs.size(); ++p) {
          const auto [i, j] = lay.pairs[p];
          row[lay.pair(static_cast<int>(p))] = row[lay.nu(i)] * row[lay.nu(j)];
          row[lay.pair_sum(static_cast<int>(p))] = row[lay.nu(i)] + row[lay.nu(j)];
        }
        row[lay.total()] = n_total;
        for (size_t k = 0; k < lay.orders.size(); ++k) {
          Complex jm{1.0, 0.0};
          for (int q = 0; q < lay.orders[k]; ++q) jm *= n_total;
          row[lay.order(static_cast<int>(k))] = jm;
        }
      };

      while (next_capture < n_times && capture[next_capture] == 0) capture_now(next_capture++);
      const double sqrt_dt = std::sqrt(options.dt);
      // Kerr + drive drift for one mode at a given phase-space point
      auto drift = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, int i, double t,
                       Complex& da, Complex& db) {
        da = Complex{0, 0};
        db = Complex{0, 0};
        const double g = model.kerr[static_cast<size_t>(i)];
        if (g != 0.0) {
          const Complex i2g{0.0, 2.0 * g};
          da -= i2g * b(i) * a(i) * a(i);
          db += i2g * a(i) * b(i) * b(i);
        }
        const double f = model.drive_amp[static_cast<size_t>(i)];
        if (f != 0.0) {
          const auto& env = model.drive_env[static_cast<size_t>(i)];
          const double fh = f * (env ? env(t) : 1.0);
          da += Complex{0.0, -fh};
          db += Complex{0.0, fh};
        }
      };
      Eigen::VectorXcd pred_a(m), pred_b(m), k1a(m), k1b(m), k2a(m), k2b(m);
      for (long s = 1; s <= total_steps && !diverged; ++s) {
        // exact linear propagation
        a_next.noalias() = e_alpha * alpha;
        b_next.noalias() = e_beta * beta;
        alpha.swap(a_next);
        beta.swap(b_next);
        const double t0 = static_cast<double>(s - 1) * options.dt;
        const double t1 = static_cast<double>(s) * options.dt;
        // Heun on the Kerr/drive drift, left-point (Ito) multiplicative noise
        for (int i = 0; i < m; ++i) {
          drift(alpha, beta, i, t0, k1a(i), k1b(i));
          pred_a(i) = alpha(i) + options.dt * k1a(i);
          pred_b(i) = beta(i) + options.dt * k1b(i);
        }
        for (int i = 0; i < m; ++i) {
          drift(pred_a, pred_b, i, t1, k2a(i), k2b(i));
          Complex da = 0.5 * options.dt * (k1a(i) + k2a(i));
          Complex db = 0.5 * options.dt * (k1b(i) + k2b(i));
          if (model.kerr[static_cast<size_t>(i)] != 0.0) {
            da += model.kerr_noise_alpha[static_cast<size_t>(i)] * alpha(i) * (sqrt_dt * noise());
            db += model.kerr_noise_beta[static_cast<size_t>(i)] * beta(i) * (sqrt_dt * noise());
          }
          const double gp = model.gain[static_cast<size_t>(i)];
          if (gp > 0.0) {
            const double xa = noise(), xb = noise();
            const double root = std::sqrt(gp) * sqrt_dt;
            da += root * Complex{xa, xb};
            db += root * Complex{xa, -xb};
          }
          alpha(i) += da;
          beta(i) += db;
        }
        for (int i = 0; i < m && !diverged; ++i)
          diverged = !(std::abs(alpha(i)) < options.escape_radius) ||
                     !(std::abs(beta(i)) < options.escape_radius);
        while (!diverged && next_capture < n_times && capture[next_capture] == s)
          capture_now(next_capture++);
      }

      if (diverged || next_capture != n_times) {
        ++acc.excluded;
        continue;
      }
      ++acc.included;
      for (size_t t = 0; t < n_times; ++t) {
        const Complex* row = samples.data() + t * static_cast<size_t>(lay.per_time);
        Complex* srow = acc.sum.data() + t * static_cast<size_t>(lay.per_time);
        double* r2 = acc.re2.data() + t * static_cast<size_t>(lay.per_time);
        double* i2 = acc.im2.data() + t * static_cast<size_t>(lay.per_time);
        for (int q = 0; q < lay.per_time; ++q) {
          srow[q] += row[q];
          r2[q] += row[q].real() * row[q].real();
          i2[q] += row[q].imag() * row[q].imag();
        }
        for (size_t k = 0; k < lay.orders.size(); ++k)
          acc.cov_jn[t * lay.orders.size() + k] +=
              row[lay.order(static_cast<int>(k))].real() * row[lay.total()].real();
        for (size_t p = 0; p < lay.pairs.size(); ++p)
          acc.cov_ps[t * lay.pairs.size() + p] +=
              row[lay.pair(static_cast<int>(p))].real() *
              row[lay.pair_sum(static_cast<int>(p))].real();
      }
    }
  };

  int n_threads = options.threads > 0 ? options.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, n_blocks);
  if (n_threads <= 1) {
    for (int b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (int b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) run_block(b);
      });
    for (auto& th : pool) th.join();
  }

  Accum total;
  total.init(n_times, lay);
  for (const auto& acc : block_accum) total.merge(acc);

  PPEnsemble out;
  out.n_traj = options.n_traj;
  out.seed = options.seed;
  out.dt = options.dt;
  out.excluded = total.excluded;
  out.noise_factorization =
      "kerr: dalpha += sqrt(-2ig) alpha dW1, dbeta += sqrt(+2ig) beta dW2; "
      "gain: dalpha += sqrt(g+) (dWa + i dWb), dbeta += sqrt(g+) (dWa - i dWb)";
  out.times.resize(n_times);
  for (size_t k = 0; k < n_times; ++k)
    out.times[k] = static_cast<double>(capture[k]) * options.dt;

  const long mN = total.included;
  if (mN == 0) throw EngineError("all positive-P trajectories diverged");
  if (total.excluded > 0) {
    const double frac = static_cast<double>(total.excluded) / options.n_traj;
    out.diagnostics.push_back("excluded " + std::to_string(total.excluded) +
                              " divergent trajectories");
    if (frac > 1e-3) out.diagnostics.push_back("unreliable: exclusion fraction above 0.1%");
  }

  auto stat_for = [&](int q) {
    PPEstimate est;
    est.mean.resize(n_times);
    est.se_real.resize(n_times);
    est.se_imag.resize(n_times);
    for (size_t t = 0; t < n_times; ++t) {
      const size_t idx = t * static_cast<size_t>(lay.per_time) + static_cast<size_t>(q);
      const Complex mean = total.sum[idx] / static_cast<double>(mN);
      est.mean[t] = mean;
      auto se = [&](double sq, double mu) {
        if (mN < 2) return 0.0;
        double resid = sq - mN * mu * mu;
        if (resid < 1e-12 * sq) resid = 0.0;  // one-pass cancellation round-off
        return std::sqrt(resid / static_cast<double>(mN - 1) / static_cast<double>(mN));
      };
      est.se_real[t] = se(total.re2[idx], mean.real());
      est.se_imag[t] = se(total.im2[idx], mean.imag());
    }
    return est;
  };

  for (int i = 0; i < m; ++i)
    out.stats["n_" + spec.space.mode(i).label] = stat_for(lay.nu(i));
  for (size_t p = 0; p < lay.pairs.size(); ++p) {
    const auto [i, j] = lay.pairs[p];
    out.stats["pair_" + std::to_string(i) + "_" + std::to_string(j)] =
        stat_for(lay.pair(static_cast<int>(p)));
  }
  out.stats["N_total"] = stat_for(lay.total());
  for (size_t k = 0; k < lay.orders.size(); ++k)
    out.stats["J_" + std::to_string(lay.orders[k])] = stat_for(lay.order(static_cast<int>(k)));

  // ratio estimators with delta-method errors
  auto ratio_series = [&](int num_q, int den_q, int power, const double* cov_nd,
                          size_t cov_stride, size_t cov_off, std::vector<double>& val,
                          std::vector<double>& se) {
    val.assign(n_times, std::numeric_limits<double>::quiet_NaN());
    se.assign(n_times, std::numeric_limits<double>::quiet_NaN());
    for (size_t t = 0; t < n_times; ++t) {
      const size_t ni = t * static_cast<size_t>(lay.per_time) + static_cast<size_t>(num_q);
      const size_t di = t * static_cast<size_t>(lay.per_time) + static_cast<size_t>(den_q);
      const double jbar = (total.sum[ni] / static_cast<double>(mN)).real();
      const double nbar = (total.sum[di] / static_cast<double>(mN)).real();
      if (std::abs(nbar) < 1e-9) continue;
      const double denom_p = std::pow(nbar, power);
      const double g = jbar / denom_p;
      val[t] = g;
      if (mN < 2) {
        se[t] = 0.0;
        continue;
      }
      auto clamped = [&](double sq, double product) {
        double resid = sq - mN * product;
        if (std::abs(resid) < 1e-12 * std::abs(sq)) resid = 0.0;
        return resid / static_cast<double>(mN - 1) / static_cast<double>(mN);
      };
      const double var_j = std::max(0.0, clamped(total.re2[ni], jbar * jbar));
      const double var_n = std::max(0.0, clamped(total.re2[di], nbar * nbar));
      const double cov = clamped(cov_nd[t * cov_stride + cov_off], jbar * nbar);
      const double dj = 1.0 / denom_p;
      const double dn = -power * jbar / (denom_p * nbar);
      const double var_g = dj * dj * var_j + dn * dn * var_n + 2.0 * dj * dn * cov;
      se[t] = std::sqrt(std::max(0.0, var_g));
    }
  };

  for (size_t k = 0; k < lay.orders.size(); ++k) {
    const int order = lay.orders[k];
    ratio_series(lay.order(static_cast<int>(k)), lay.total(), order, total.cov_jn.data(),
                 lay.orders.size(), k, out.g_tot[order], out.g_tot_se[order]);
  }
  for (size_t p = 0; p < lay.pairs.size(); ++p) {
    const auto [i, j] = lay.pairs[p];
    const std::string key = std::to_string(i) + "_" + std::to_string(j);
    ratio_series(lay.pair(static_cast<int>(p)), lay.pair_sum(static_cast<int>(p)), 2,
                 total.cov_ps.data(), lay.pairs.size(), p, out.g2_grouped[key],
                 out.g2_grouped_se[key]);
  }

  if (options.convergence_check) {
    PPRunOptions half = options;
    half.dt = options.dt / 2.0;
    half.convergence_check = false;
    const PPEnsemble fine = pp_run(spec, alpha0, times, half);
    double max_diff = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto& a = out.stats.at("n_" + spec.space.mode(i).label).mean;
      const auto& b = fine.stats.at("n_" + spec.space.mode(i).label).mean;
      for (size_t t = 0; t < n_times; ++t)
        max_diff = std::max(max_diff, std::abs(a[t].real() - b[t].real()));
    }
    out.diagnostics.push_back("halved-step occupation shift: " + std::to_string(max_diff));
  }

  return out;
}

}  // namespace qcorr
