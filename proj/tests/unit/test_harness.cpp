#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tbnls/harness.hpp"

using namespace tbnls;

TEST_CASE("amplitude projection") {
  const ReductionSetup& s = test::small_setup(0.1);
  const double l1 = s.coefficients.lambda1;

  SUBCASE("a basis function projects onto its site") {
    FieldState psi{0.0, s.basis.functions[3], s.basis.dx};
    const auto c = project_amplitudes(psi, s.basis, l1, s.hbar);
    Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(s.basis.size());
    delta[3] = 1.0;
    CHECK((c - delta).norm() < 1e-10);
  }
  SUBCASE("Parseval on the band") {
    Eigen::VectorXcd a = gaussian_amplitudes(s.basis.size(), 5);
    a[0] = cplx(0.0, 0.2);
    FieldState psi{0.7, synthesize(a, s.basis), s.basis.dx};
    const auto c = project_amplitudes(psi, s.basis, l1, s.hbar);
    CHECK(c.norm() == doctest::Approx(psi.norm()).epsilon(1e-12));
    CHECK((c - a * std::polar(1.0, l1 * 0.7 / s.hbar)).norm() < 1e-12);
  }
  SUBCASE("second-band states have no amplitudes") {
    FieldState psi{0.0, s.spectrum.bloch_state(2, 1), s.basis.dx};
    CHECK(project_amplitudes(psi, s.basis, l1, s.hbar).norm() < 1e-10);
  }
}

TEST_CASE("reduction error") {
  const ReductionSetup& s = test::small_setup(0.1);
  const double l1 = s.coefficients.lambda1;
  const Eigen::VectorXcd g0 = gaussian_amplitudes(s.basis.size(), 3);

  SUBCASE("identical initial data") {
    FieldState psi{0.0, synthesize(g0, s.basis), s.basis.dx};
    const auto e = reduction_error(psi, LatticeState{0.0, g0}, s.basis, s.band, l1, s.hbar);
    CHECK(e.err_total < 1e-10);
    CHECK(e.err_perp < 1e-10);
    CHECK(e.err_amp < 1e-10);
  }
  SUBCASE("orthogonal decomposition with an off-band component") {
    FieldState psi{0.4, synthesize(g0, s.basis) + 0.05 * s.spectrum.bloch_state(1, 1), s.basis.dx};
    Eigen::VectorXcd g = g0;
    g[2] += 0.01;
    const auto e = reduction_error(psi, LatticeState{0.4, g}, s.basis, s.band, l1, s.hbar);
    CHECK(e.err_perp == doctest::Approx(0.05).epsilon(1e-8));
    CHECK(e.err_total * e.err_total ==
          doctest::Approx(e.err_perp * e.err_perp + e.err_amp * e.err_amp).epsilon(1e-10));
  }
  SUBCASE("times must agree") {
    FieldState psi{0.5, synthesize(g0, s.basis), s.basis.dx};
    CHECK_THROWS_AS(reduction_error(psi, LatticeState{0.6, g0}, s.basis, s.band, l1, s.hbar),
                    NumericalError);
  }
}

TEST_CASE("remainder components") {
  const ReductionSetup& s = test::small_setup(0.1);
  const Eigen::VectorXcd g0 = gaussian_amplitudes(s.basis.size(), 5);

  SUBCASE("no orthogonal part means no r3 and no A") {
    FieldState psi{0.0, synthesize(g0, s.basis), s.basis.dx};
    const auto v = remainder_vectors(psi, s);
    CHECK(v.r3.norm() < 1e-12);
    CHECK(v.a.norm() < 1e-12);
    CHECK((v.r1 - s.coefficients.residual * g0).norm() < 1e-12);
  }
  SUBCASE("zero perturbation") {
    const LatticeModel m = test::small_lattice(8, 64, "zero");
    const ReductionSetup z = prepare_reduction(m, 0.1);
    FieldState psi{0.0, synthesize(g0, z.basis) + 0.01 * z.spectrum.bloch_state(0, 1), z.basis.dx};
    const auto v = remainder_vectors(psi, z);
    CHECK(v.r2.norm() == 0.0);
    CHECK(v.r3.norm() == 0.0);
  }
  SUBCASE("triangle inequality on the assembled remainder") {
    FieldState psi{0.0, synthesize(g0, s.basis) + 0.02 * s.spectrum.bloch_state(1, 1), s.basis.dx};
    const SemiclassicalParams p{0.1, 0.01, 0.3, Regime::custom};
    const auto d = remainder_diagnostics(psi, s, p);
    CHECK(d.total <= d.r1 + d.r2 + d.r3 + d.r4 + 1e-15);
    CHECK(d.perp == doctest::Approx(0.02).epsilon(1e-8));
  }
}

TEST_CASE("nonlinear remainder matches the exhaustive triple sum") {
  const ReductionSetup& s = test::small_setup(0.1);
  SUBCASE("single site") {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(s.basis.size());
    c[s.basis.size() / 2] = 1.0;
    FieldState psi{0.0, synthesize(c, s.basis), s.basis.dx};
    const auto v = remainder_vectors(psi, s);
    CHECK((v.r4 - oracle::triple_sum_b(s.basis, c)).norm() < 1e-10);
  }
  SUBCASE("spread complex amplitudes") {
    Eigen::VectorXcd c = gaussian_amplitudes(s.basis.size(), 5);
    c[3] *= cplx(0.0, 1.0);
    FieldState psi{0.0, synthesize(c, s.basis), s.basis.dx};
    const auto v = remainder_vectors(psi, s);
    CHECK((v.b - oracle::triple_sum_b(s.basis, c)).norm() < 1e-10);
  }
}

TEST_CASE("paired run in the linear regime") {
  const ReductionSetup& s = test::small_setup(0.15);
  const SemiclassicalParams p{0.15, 0.0, 0.0, Regime::custom};
  PairedRunConfig cfg;
  cfg.final_time = 5.0;
  cfg.min_pde_steps = 500;
  const auto g0 = gaussian_amplitudes(s.basis.size(), 3);
  const PairedRunResult r = run_paired(s, p, g0, cfg);
  CHECK(r.samples.size() == static_cast<std::size_t>(r.pde_steps / cfg.monitor_stride + 1));
  CHECK(r.max_mass_drift < 1e-10);
  CHECK(r.max_err_perp < 1e-10);  // H_B keeps the band invariant
  // err_amp <= ||D~|| tau / h
  for (const auto& sample : r.samples)
    CHECK(sample.error.err_amp <= s.coefficients.residual_bound() * sample.error.tau / s.hbar + 1e-10);
  CHECK(r.max_err_amp > 0.0);
}

TEST_CASE("Gaussian initial amplitudes") {
  const auto g = gaussian_amplitudes(16, 5);
  CHECK(g.norm() == doctest::Approx(1.0));
  CHECK(std::abs(g[8]) == doctest::Approx(g.cwiseAbs().maxCoeff()));
  CHECK(std::abs(g[6] - g[10]) == 0.0);
  CHECK(std::abs(g[5]) == 0.0);
  CHECK_THROWS(gaussian_amplitudes(4, 5));
}
