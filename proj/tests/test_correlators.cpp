#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qcorr/correlators.hpp"
#include "qcorr/errors.hpp"
#include "support/random_specs.hpp"

using namespace qcorr;

namespace {

std::vector<double> grid(double t_end, int n) {
  std::vector<double> times(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) times[static_cast<size_t>(k)] = t_end * k / (n - 1);
  return times;
}

Matrix falling_factorial(const Matrix& n, int m) {
  Matrix out = Matrix::Identity(n.rows(), n.cols());
  for (int k = 0; k < m; ++k)
    out = (out * (n - static_cast<double>(k) * Matrix::Identity(n.rows(), n.cols()))).eval();
  return out;
}

}  // namespace

TEST_CASE("single-mode total correlator is the falling factorial") {
  const HilbertSpace space({{ModeKind::Boson, 6, "m"}});
  for (int m = 2; m <= 4; ++m) {
    const auto cs = build_correlator_set(space, m);
    CHECK((cs.J_op - falling_factorial(cs.N_op, m)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(build_correlator_set(space, 1), ValidationError);
}

TEST_CASE("mixed-space total correlator expansion") {
  const HilbertSpace space({{ModeKind::Boson, 4, "cav"}, {ModeKind::TwoLevel, 0, "atom"}});
  const auto cs = build_correlator_set(space, 2);
  // independent construction: a†²a² + 2 n_b n_f, the (fm,fm) term vanishes
  const Matrix a = embed(annihilation_matrix(4), 0, space);
  const Matrix nf = embed(number_matrix(space.mode(1)), 1, space);
  const Matrix nb = a.adjoint() * a;
  const Matrix expected = a.adjoint() * a.adjoint() * a * a + 2.0 * nb * nf;
  CHECK((cs.J_op - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multi-boson total correlator identities") {
  const HilbertSpace two({{ModeKind::Boson, 3, "a"}, {ModeKind::Boson, 3, "b"}});
  const auto cs2 = build_correlator_set(two, 2);
  // explicit four-index expansion
  const Matrix a1 = embed(annihilation_matrix(3), 0, two);
  const Matrix a2 = embed(annihilation_matrix(3), 1, two);
  const Matrix expected = a1.adjoint() * a1.adjoint() * a1 * a1 +
                          a2.adjoint() * a2.adjoint() * a2 * a2 +
                          2.0 * a1.adjoint() * a2.adjoint() * a1 * a2;
  CHECK((cs2.J_op - expected).cwiseAbs().maxCoeff() < 1e-12);
  // and the normally ordered power identity :N²: = N² - N
  CHECK((cs2.J_op - (cs2.N_op * cs2.N_op - cs2.N_op)).cwiseAbs().maxCoeff() < 1e-12);

  const HilbertSpace three(
      {{ModeKind::Boson, 2, "a"}, {ModeKind::Boson, 2, "b"}, {ModeKind::Boson, 2, "c"}});
  const auto cs3 = build_correlator_set(three, 2);
  CHECK((cs3.J_op - (cs3.N_op * cs3.N_op - cs3.N_op)).cwiseAbs().maxCoeff() < 1e-12);
  // falling factorial holds at order 3 as well
  const auto cs3b = build_correlator_set(three, 3);
  CHECK((cs3b.J_op - falling_factorial(cs3b.N_op, 3)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("g_tot values on reference states") {
  const HilbertSpace space({{ModeKind::Boson, 14, "m"}});
  const auto cs = build_correlator_set(space, 2);
  const Matrix coherent = initial_state(space, {InitialCoherent{Complex{1.0, 0.0}}});
  CHECK(g_tot(coherent, cs) == doctest::Approx(1.0).epsilon(1e-8));
  const Matrix fock1 = initial_state(space, {InitialFock{1}});
  CHECK(g_tot(fock1, cs) == doctest::Approx(0.0));
  const Matrix vacuum = initial_state(space, {InitialFock{0}});
  CHECK_THROWS_AS(g_tot(vacuum, cs), UndefinedValueError);

  const HilbertSpace jc({{ModeKind::Boson, 8, "cav"}, {ModeKind::TwoLevel, 0, "atom"}});
  const auto cs_jc = build_correlator_set(jc, 2);
  const Matrix rho =
      initial_state(jc, {InitialCoherent{Complex{std::sqrt(0.18), 0.0}}, InitialExcited{}});
  CHECK(g_tot(rho, cs_jc) == doctest::Approx(0.3924 / 1.3924).epsilon(1e-9));
  CHECK(g_tot(rho, cs_jc) < 1.0);  // sub-Poissonian from the start
}

TEST_CASE("pairwise correlators") {
  const HilbertSpace space({{ModeKind::Boson, 14, "m"}});
  const auto cs = build_correlator_set(space, 2);
  CHECK(g2_pair(initial_state(space, {InitialFock{2}}), cs, 0, 0) == doctest::Approx(0.5));
  const Matrix coherent = initial_state(space, {InitialCoherent{Complex{0.8, 0.3}}});
  CHECK(g2_pair(coherent, cs, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g2_grouped(coherent, cs, 0, 0) == doctest::Approx(0.25).epsilon(1e-9));

  const HilbertSpace two({{ModeKind::Boson, 10, "a"}, {ModeKind::Boson, 10, "b"}});
  const auto cs2 = build_correlator_set(two, 2);
  const Matrix product = initial_state(
      two, {InitialCoherent{Complex{0.7, 0.0}}, InitialCoherent{Complex{0.0, 0.5}}});
  CHECK(g2_pair(product, cs2, 0, 1) == doctest::Approx(1.0).epsilon(1e-9));
  const Matrix fock11 = initial_state(two, {InitialFock{1}, InitialFock{1}});
  CHECK(g2_grouped(fock11, cs2, 0, 1) == doctest::Approx(0.25));

  CHECK_THROWS_AS(g2_pair(initial_state(two, {InitialFock{0}, InitialFock{1}}), cs2, 0, 1),
                  UndefinedValueError);
}

TEST_CASE("grouped correlators do not sum to the total one") {
  // the grouped normalization (n_i + n_j)² differs from <N>^m by design
  const HilbertSpace jc({{ModeKind::Boson, 8, "cav"}, {ModeKind::TwoLevel, 0, "atom"}});
  const auto cs = build_correlator_set(jc, 2);
  const Matrix rho =
      initial_state(jc, {InitialCoherent{Complex{std::sqrt(0.18), 0.0}}, InitialExcited{}});
  const double summed =
      g2_grouped(rho, cs, 0, 0) + g2_grouped(rho, cs, 1, 1) + 2.0 * g2_grouped(rho, cs, 0, 1);
  CHECK(std::abs(summed - g_tot(rho, cs)) > 1e-3);
}

TEST_CASE("correlator operators are hermitian and bosonic ones positive") {
  const HilbertSpace two({{ModeKind::Boson, 4, "a"}, {ModeKind::Boson, 3, "b"}});
  const auto cs = build_correlator_set(two, 2);
  CHECK(is_hermitian(cs.J_op));
  CHECK(is_hermitian(cs.N_op));
  for (const auto& [key, op] : cs.pair_ops) CHECK(is_hermitian(op));
  Eigen::SelfAdjointEigenSolver<Matrix> es(cs.J_op, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("commutation with the hamiltonian follows the total number operator") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const auto sys = test::random_u1_system(rng);
    const Matrix h = build_hamiltonian(sys.model, 0.0);
    const Matrix n = total_number_operator(sys.model.space);
    REQUIRE((h * n - n * h).norm() <= 1e-12 * h.norm() * n.norm());
    for (int m : {2, 3}) {
      const auto cs = build_correlator_set(sys.model.space, m);
      const double rel = (h * cs.J_op - cs.J_op * h).norm() / (h.norm() * cs.J_op.norm());
      CHECK(rel < 1e-12);
    }
  }
}

TEST_CASE("conservation report flags and truncation") {
  const HilbertSpace space({{ModeKind::Boson, 3, "m"}});
  Trajectory traj;
  traj.times = {0.0, 1.0, 2.0, 3.0};
  traj.records["N_total"] = {Complex{0.0, 0.0}, Complex{1.0, 0.0}, Complex{1.0, 0.0},
                             Complex{1e-12, 0.0}};
  traj.records["J_2"] = {Complex{0.0, 0.0}, Complex{0.5, 0.0}, Complex{0.5001, 0.0},
                         Complex{0.2, 0.0}};
  const auto cs = build_correlator_set(space, 2);
  const auto report = conservation_report(traj, cs, 1e-2);
  CHECK(report.floor_breached);
  CHECK(report.first_defined == 1);  // leading undefined point skipped
  CHECK(std::isnan(report.series[0]));
  CHECK(std::isnan(report.series[3]));  // tail truncated at the breach
  CHECK(report.max_abs_dev == doctest::Approx(1e-4).epsilon(1e-6));
  CHECK(report.conserved);

  const auto strict = conservation_report(traj, cs, 1e-5);
  CHECK(!strict.conserved);
}

TEST_CASE("undriven mode: quartic identity residual and flat g2") {
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 10, "m"}});
  const double gamma = 1.0;
  spec.channels = {{0, ChannelKind::Loss, 1, gamma}};
  const Matrix rho0 = initial_state(spec.space, {InitialCoherent{Complex{1.1, 0.2}}});
  const auto obs = identity_observables(spec, DerivativeIdentity::DriveQuartic);
  auto all_obs = obs;
  for (const auto& o : identity_observables(spec, DerivativeIdentity::DriveG2))
    all_obs.push_back(o);
  const Trajectory traj = integrate(spec, rho0, grid(3.0, 400), 1e-10, all_obs);

  const auto quartic = derivative_crosscheck(traj, spec, DerivativeIdentity::DriveQuartic);
  CHECK(quartic.max_residual < 1e-6);

  // g² must stay flat: finite differences of the recorded series vanish
  const auto& q = traj.series("quartic_0");
  const auto& n = traj.series("n_m");
  double g0 = q[0].real() / (n[0].real() * n[0].real());
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const double g = q[k].real() / (n[k].real() * n[k].real());
    CHECK(std::abs(g - g0) < 1e-6);
  }
}

TEST_CASE("two-mode identities on a small hopping model") {
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 6, "m1"}, {ModeKind::Boson, 6, "m2"}});
  spec.terms = {Hopping{0, 1, 1.5}, Kerr{0, 0.25}, Kerr{1, 0.25}};
  spec.channels = {{0, ChannelKind::Loss, 1, 1.0}, {1, ChannelKind::Loss, 1, 1.0}};
  const Matrix rho0 = initial_state(
      spec.space, {InitialCoherent{Complex{1.0, 0.0}}, InitialCoherent{Complex{0.4, 0.0}}});

  std::vector<Observable> obs;
  for (auto id : {DerivativeIdentity::HopAutoQuartic, DerivativeIdentity::HopOccupation,
                  DerivativeIdentity::HopCross})
    for (const auto& o : identity_observables(spec, id)) {
      bool seen = false;
      for (const auto& e : obs) seen |= e.name == o.name;
      if (!seen) obs.push_back(o);
    }
  const Trajectory traj = integrate(spec, rho0, grid(2.0, 400), 1e-10, obs);

  for (auto id : {DerivativeIdentity::HopAutoQuartic, DerivativeIdentity::HopOccupation,
                  DerivativeIdentity::HopCross}) {
    const auto report = derivative_crosscheck(traj, spec, id);
    CHECK(report.max_residual < 1e-3);
  }
}

TEST_CASE("identity arity mismatches are rejected") {
  ModelSpec two;
  two.space = HilbertSpace({{ModeKind::Boson, 2, "a"}, {ModeKind::Boson, 2, "b"}});
  two.terms = {Hopping{0, 1, 1.0}};
  CHECK_THROWS_AS(identity_observables(two, DerivativeIdentity::DriveQuartic), ValidationError);

  ModelSpec one;
  one.space = HilbertSpace({{ModeKind::Boson, 2, "a"}});
  CHECK_THROWS_AS(identity_observables(one, DerivativeIdentity::HopCross), ValidationError);

  // nonlinear channels are outside the identities' scope
  ModelSpec absorber;
  absorber.space = HilbertSpace({{ModeKind::Boson, 4, "a"}});
  absorber.channels = {{0, ChannelKind::Loss, 2, 1.0}};
  CHECK_THROWS_AS(identity_observables(absorber, DerivativeIdentity::DriveQuartic),
                  ValidationError);

  // missing auxiliary series
  ModelSpec spec;
  spec.space = HilbertSpace({{ModeKind::Boson, 2, "a"}});
  spec.channels = {{0, ChannelKind::Loss, 1, 1.0}};
  Trajectory traj;
  traj.times = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK_THROWS_AS(derivative_crosscheck(traj, spec, DerivativeIdentity::DriveQuartic),
                  ValidationError);
}
