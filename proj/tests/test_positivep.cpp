#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qcorr/correlators.hpp"
#include "qcorr/dynamics.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/positivep.hpp"

using namespace qcorr;

namespace {

std::vector<double> grid(double t_end, int n) {
  std::vector<double> times(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) times[static_cast<size_t>(k)] = t_end * k / (n - 1);
  return times;
}

ModelSpec coupled_kerr(double tau, double g, double gamma, int cutoff) {
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, cutoff, "m1"}, {ModeKind::Boson, cutoff, "m2"}});
  spec.terms = {Hopping{0, 1, tau}, Kerr{0, g}, Kerr{1, g}};
  spec.channels = {{0, ChannelKind::Loss, 1, gamma}, {1, ChannelKind::Loss, 1, gamma}};
  return spec;
}

}  // namespace

TEST_CASE("drift coefficients of the phase-space mapping") {
  const auto spec = coupled_kerr(1.5, 0.25, 1.0, 4);
  const PPModel model = pp_drift_diffusion(spec);
  CHECK(model.n_modes == 2);
  CHECK(model.linear(0, 0) == Complex{-1.0, 0.0});               // loss
  CHECK(model.linear(0, 1) == Complex{0.0, -1.5});               // -iτ
  CHECK(model.linear(1, 0) == Complex{0.0, -1.5});
  CHECK(model.kerr[0] == 0.25);
  // squared noise amplitudes: -2ig on the alpha side, +2ig on the beta side
  const Complex na = model.kerr_noise_alpha[0];
  CHECK(std::abs(na * na - Complex{0.0, -0.5}) < 1e-14);
  const Complex nb = model.kerr_noise_beta[0];
  CHECK(std::abs(nb * nb - Complex{0.0, 0.5}) < 1e-14);
  CHECK(model.stochastic());

  ModelSpec detuned;
  detuned.space = HilbertSpace({{ModeKind::Boson, 2, "m"}});
  detuned.terms = {Detuning{0, 0.7}};
  const PPModel lin = pp_drift_diffusion(detuned);
  CHECK(lin.linear(0, 0) == Complex{0.0, -0.7});
  CHECK(!lin.stochastic());
}

TEST_CASE("unsupported models are rejected") {
  ModelSpec jc;
  jc.space = HilbertSpace({{ModeKind::Boson, 2, "cav"}, {ModeKind::TwoLevel, 0, "atom"}});
  CHECK_THROWS_AS(pp_drift_diffusion(jc), ValidationError);

  ModelSpec absorber;
  absorber.space = HilbertSpace({{ModeKind::Boson, 4, "m"}});
  absorber.channels = {{0, ChannelKind::Loss, 2, 1.0}};
  CHECK_THROWS_AS(pp_drift_diffusion(absorber), ValidationError);

  ModelSpec jc_term;
  jc_term.space = HilbertSpace({{ModeKind::Boson, 2, "a"}, {ModeKind::Boson, 2, "b"}});
  jc_term.terms = {JCCoupling{0, 1, 1.0}};  // wrong kinds anyway
  CHECK_THROWS_AS(pp_drift_diffusion(jc_term), ValidationError);
}

TEST_CASE("deterministic linear flow reproduces the loss decay per trajectory") {
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 2, "m"}});
  spec.channels = {{0, ChannelKind::Loss, 1, 1.0}};
  PPRunOptions opts;
  opts.n_traj = 3;
  opts.seed = 9;
  opts.dt = 1e-3;
  const auto times = grid(2.0, 21);
  const PPEnsemble ens = pp_run(spec, {Complex{std::sqrt(1.7), 0.0}}, times, opts);
  for (size_t k = 0; k < ens.times.size(); ++k) {
    const double expected = 1.7 * std::exp(-2.0 * ens.times[k]);
    CHECK(std::abs(ens.stats.at("n_m").mean[k].real() - expected) < 1e-12);
    CHECK(ens.stats.at("n_m").se_real[k] == 0.0);  // identical trajectories
  }
}

TEST_CASE("noise-free hopping matches the exact integrator to integrator order") {
  const double tau = 1.5;
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 14, "m1"}, {ModeKind::Boson, 14, "m2"}});
  spec.terms = {Hopping{0, 1, tau}};
  spec.channels = {{0, ChannelKind::Loss, 1, 1.0}, {1, ChannelKind::Loss, 1, 1.0}};

  const Complex a1{std::sqrt(0.5), 0.0}, a2{0.0, 0.0};
  const auto times = grid(2.0, 21);
  PPRunOptions opts;
  opts.n_traj = 1;
  opts.seed = 1;
  opts.dt = 1e-3;
  const PPEnsemble ens = pp_run(spec, {a1, a2}, times, opts);

  const Matrix rho0 = initial_state(spec.space, {InitialCoherent{a1}, InitialCoherent{a2}});
  const Trajectory traj = integrate(spec, rho0, times, 1e-12);
  for (size_t k = 0; k < times.size(); ++k) {
    CHECK(std::abs(ens.stats.at("n_m1").mean[k].real() - traj.series("n_m1")[k].real()) < 1e-10);
    CHECK(std::abs(ens.stats.at("n_m2").mean[k].real() - traj.series("n_m2")[k].real()) < 1e-10);
  }
}

TEST_CASE("coherent evolution pins the total correlator at one with zero variance") {
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 4, "m1"}, {ModeKind::Boson, 4, "m2"}});
  spec.terms = {Hopping{0, 1, 1.5}};
  spec.channels = {{0, ChannelKind::Loss, 1, 1.0}, {1, ChannelKind::Loss, 1, 1.0}};
  PPRunOptions opts;
  opts.n_traj = 50;
  opts.seed = 4;
  opts.dt = 1e-3;
  const PPEnsemble ens =
      pp_run(spec, {Complex{1.2, 0.0}, Complex{0.3, 0.2}}, grid(1.0, 11), opts);
  for (size_t k = 0; k < ens.times.size(); ++k) {
    CHECK(ens.g_tot.at(2)[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ens.g_tot_se.at(2)[k] == doctest::Approx(0.0));
  }
}

TEST_CASE("determinism under reruns and worker counts") {
  const auto spec = coupled_kerr(1.5, 0.25, 1.0, 4);
  const std::vector<Complex> init{Complex{std::sqrt(1.7), 0.0}, Complex{std::sqrt(0.22), 0.0}};
  const auto times = grid(0.5, 6);
  PPRunOptions opts;
  opts.n_traj = 100;
  opts.seed = 1234;
  opts.dt = 1e-3;

  opts.threads = 1;
  const PPEnsemble a = pp_run(spec, init, times, opts);
  const PPEnsemble b = pp_run(spec, init, times, opts);
  opts.threads = 4;
  const PPEnsemble c = pp_run(spec, init, times, opts);

  for (const auto& [key, est] : a.stats) {
    for (size_t k = 0; k < est.mean.size(); ++k) {
      CHECK(est.mean[k] == b.stats.at(key).mean[k]);  // bit identical
      CHECK(est.mean[k] == c.stats.at(key).mean[k]);
      CHECK(est.se_real[k] == c.stats.at(key).se_real[k]);
    }
  }

  opts.seed = 77;
  const PPEnsemble d = pp_run(spec, init, times, opts);
  bool differs = false;
  for (size_t k = 0; k < a.times.size(); ++k)
    differs |= a.stats.at("n_m1").mean[k] != d.stats.at("n_m1").mean[k];
  CHECK(differs);
}

TEST_CASE("kerr ensemble tracks the exact integrator") {
  // reference runs at cutoff 14 so its truncation sits far below the
  // comparison floor; the phase-space sampler has no cutoff
  const auto spec = coupled_kerr(1.5, 0.25, 1.0, 14);
  const std::vector<Complex> init{Complex{std::sqrt(1.7), 0.0}, Complex{std::sqrt(0.22), 0.0}};
  const auto times = grid(1.0, 11);
  PPRunOptions opts;
  opts.n_traj = 4000;
  opts.seed = 1;
  opts.dt = 1e-3;
  opts.threads = 4;
  const PPEnsemble ens = pp_run(spec, init, times, opts);
  CHECK(ens.excluded == 0);

  const Matrix rho0 =
      initial_state(spec.space, {InitialCoherent{init[0]}, InitialCoherent{init[1]}});
  const auto cs = build_correlator_set(spec.space, 2);
  std::vector<Observable> obs{{"N_total", cs.N_op}, {"J_2", cs.J_op}};
  const Trajectory traj = integrate(spec, rho0, times, 1e-10, obs);

  // 2e-4 allows for the weak discretization bias of the fixed step at this dt
  for (size_t k = 0; k < times.size(); ++k) {
    for (const auto* name : {"n_m1", "n_m2"}) {
      const auto& est = ens.stats.at(name);
      const double exact = traj.series(name)[k].real();
      const double tol = 3.0 * est.se_real[k] + 2e-4;
      CHECK(std::abs(est.mean[k].real() - exact) <= tol);
      // hermitian observable: imaginary part is statistical noise only
      CHECK(std::abs(est.mean[k].imag()) <= 3.0 * est.se_imag[k] + 1e-9);
    }
    const double exact_j = traj.series("J_2")[k].real();
    const double exact_n = traj.series("N_total")[k].real();
    const double g_exact = exact_j / (exact_n * exact_n);
    CHECK(std::abs(ens.g_tot.at(2)[k] - g_exact) <= 3.0 * ens.g_tot_se.at(2)[k] + 2e-4);
  }
}

TEST_CASE("gain noise reproduces the exact thermalization statistics") {
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 22, "m"}});
  spec.channels = {{0, ChannelKind::Loss, 1, 1.0}, {0, ChannelKind::Gain, 1, 0.3}};
  const Complex a0{1.0, 0.0};
  const auto times = grid(2.0, 11);
  PPRunOptions opts;
  opts.n_traj = 4000;
  opts.seed = 31;
  opts.dt = 1e-3;
  opts.threads = 4;
  const PPEnsemble ens = pp_run(spec, {a0}, times, opts);

  const Matrix rho0 = initial_state(spec.space, {InitialCoherent{a0}});
  const auto cs = build_correlator_set(spec.space, 2);
  std::vector<Observable> obs{{"pair", cs.pair_op(0, 0)}};
  IntegrateOptions iopts;
  iopts.leakage_bound = 1e-6;
  const Trajectory traj = integrate(spec, rho0, times, 1e-10, obs, iopts);

  for (size_t k = 0; k < times.size(); ++k) {
    const auto& est = ens.stats.at("n_m");
    CHECK(std::abs(est.mean[k].real() - traj.series("n_m")[k].real()) <=
          3.0 * est.se_real[k] + 1e-4);
    // second moment picks up the thermal component as well
    const auto& pair = ens.stats.at("pair_0_0");
    CHECK(std::abs(pair.mean[k].real() - traj.series("pair")[k].real()) <=
          3.0 * pair.se_real[k] + 1e-4);
  }
}

TEST_CASE("divergent trajectories are excluded and reported") {
  const auto spec = coupled_kerr(0.0, 2.0, 0.05, 4);
  PPRunOptions opts;
  opts.n_traj = 200;
  opts.seed = 5;
  opts.dt = 5e-3;
  opts.escape_radius = 3.0;  // tight on purpose
  const PPEnsemble ens =
      pp_run(spec, {Complex{1.4, 0.0}, Complex{1.0, 0.0}}, grid(2.0, 11), opts);
  CHECK(ens.excluded > 0);
  REQUIRE(!ens.diagnostics.empty());
  CHECK(ens.diagnostics.front().find("excluded") != std::string::npos);
  if (ens.excluded > opts.n_traj / 1000) {
    bool marked = false;
    for (const auto& d : ens.diagnostics) marked |= d.find("unreliable") != std::string::npos;
    CHECK(marked);
  }
}

TEST_CASE("input validation") {
  const auto spec = coupled_kerr(1.0, 0.1, 1.0, 3);
  PPRunOptions opts;
  opts.n_traj = 0;
  CHECK_THROWS_AS(pp_run(spec, {Complex{1, 0}, Complex{0, 0}}, grid(1.0, 3), opts),
                  ValidationError);
  opts.n_traj = 1;
  opts.dt = 0.0;
  CHECK_THROWS_AS(pp_run(spec, {Complex{1, 0}, Complex{0, 0}}, grid(1.0, 3), opts),
                  ValidationError);
  opts.dt = 1e-3;
  CHECK_THROWS_AS(pp_run(spec, {Complex{1, 0}}, grid(1.0, 3), opts), ValidationError);
}
