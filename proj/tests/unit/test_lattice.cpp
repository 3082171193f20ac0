#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "tbnls/lattice.hpp"

using namespace tbnls;

TEST_CASE("reference lattice geometry") {
  const LatticeModel m = test::reference_lattice();
  CHECK(m.grid_size() == 4096);
  CHECK(m.dx() == doctest::Approx(1.0 / 256));
  CHECK(m.x(m.site_index(m.central_site())) == doctest::Approx(0.0));
  CHECK(m.site_index(17) == m.site_index(1));
  CHECK(m.offset_from_site(m.site_index(3) + 5, 3) == 5);
  CHECK(m.offset_from_site(m.site_index(3) - 5, 3) == -5);
  CHECK(m.potential().minCoeff() == doctest::Approx(0.0));
  CHECK(m.potential().maxCoeff() == doctest::Approx(1.0));
  CHECK(m.potential()[m.site_index(5)] == 0.0);
  CHECK(m.check_hypotheses().empty());
}

TEST_CASE("potential is periodic on the grid and W is the slow cosine") {
  const LatticeModel m = test::reference_lattice();
  const int cell = m.points_per_cell();
  for (int j = 0; j < m.grid_size(); ++j)
    REQUIRE(m.potential()[(j + cell) % m.grid_size()] == m.potential()[j]);
  for (int j = 0; j < m.grid_size(); j += 97) {
    CHECK(m.potential()[j] == doctest::Approx(std::pow(std::sin(kPi * m.x(j)), 2)).epsilon(1e-12));
    CHECK(m.perturbation()[j] == doctest::Approx(std::cos(2 * kPi * m.x(j) / 16)).epsilon(1e-12));
  }
}

TEST_CASE("lattice constraints are enforced") {
  LatticeSpec spec;
  spec.num_cells = 7;
  CHECK_THROWS_AS(LatticeModel::build(spec), std::invalid_argument);
  spec.num_cells = 8;
  spec.potential.name = "nope";
  CHECK_THROWS_AS(LatticeModel::build(spec), std::invalid_argument);
  spec.potential.name = "sin2";
  spec.perturbation.name = "w-tanh";
  spec.perturbation.length = 0.0;
  CHECK_THROWS_AS(LatticeModel::build(spec), std::invalid_argument);
}

TEST_CASE("hypothesis check reports shifted minima") {
  LatticeModel m = test::small_lattice();
  RealField v = m.potential().array() + 0.5;
  LatticeModel shifted(m.cell_size(), m.num_cells(), m.points_per_cell(), v, m.perturbation());
  CHECK_FALSE(shifted.check_hypotheses().empty());
}

TEST_CASE("model parameter regimes") {
  const auto p1 = model1_params(0.1, 2.0, 3.0);
  CHECK(p1.F == doctest::Approx(0.02));
  CHECK(p1.eta == doctest::Approx(0.03));
  CHECK(p1.regime == Regime::model1);
  const auto p2 = model2_params(0.04, 1e-3, 2.0, 3.0);
  CHECK(p2.F == doctest::Approx(2e-3));
  CHECK(p2.eta == doctest::Approx(3.0 * 0.2 * 1e-3));
  CHECK(regime_from_string(to_string(Regime::model2)) == Regime::model2);
  SemiclassicalParams bad;
  bad.hbar = -1;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("physical units map onto the rescaled equation") {
  PhysicalParams p;
  p.planck = 1.0;
  p.mass = 0.5;
  p.epsilon = 0.01;
  p.alpha1 = 2.0;
  p.alpha2 = -1.0;
  const RescaledParams r = rescale(p);
  CHECK(r.params.hbar == doctest::Approx(0.1));
  CHECK(r.params.F == doctest::Approx(0.02));
  CHECK(r.params.eta == doctest::Approx(-0.01));
  // tau = eps hbar_p t / h
  CHECK(r.time_scale == doctest::Approx(0.01 / 0.1));
}
