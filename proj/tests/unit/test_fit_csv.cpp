#include "doctest.h"

#include <cmath>
#include <sstream>

#include "tbnls/csv.hpp"
#include "tbnls/fit.hpp"

using namespace tbnls;

TEST_CASE("least squares line") {
  const LinearFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(fit_line({0, 1, 2}, {0, 1, 2}));
  CHECK_THROWS(fit_line({1, 1, 1, 1}, {0, 1, 2, 3}));
}

TEST_CASE("power law and exponential fits") {
  std::vector<double> h{0.14, 0.12, 0.1, 0.08}, y, z;
  for (double x : h) {
    y.push_back(3.0 * std::pow(x, 0.5));
    z.push_back(2.0 * std::exp(-0.6 / x));
  }
  CHECK(fit_power_law(h, y).slope == doctest::Approx(0.5));
  CHECK(fit_exponential_in_inverse(h, z).slope == doctest::Approx(-0.6));
  CHECK(std::exp(fit_exponential_in_inverse(h, z).intercept) == doctest::Approx(2.0));
}

TEST_CASE("slope confidence interval") {
  // residuals +-0.1 on five points
  const LinearFit f = fit_line({0, 1, 2, 3, 4}, {0.1, 0.9, 2.1, 2.9, 4.1});
  CHECK(f.slope == doctest::Approx(1.0));
  // t_{0.975, 3} = 3.182446
  CHECK(f.slope_halfwidth(0.95) == doctest::Approx(3.182446 * f.slope_stderr).epsilon(1e-6));
}

TEST_CASE("csv formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(NAN) == "nan");
  CsvTable t({"a", "b"});
  t.add_row({1.0, 0.5});
  t.add_row_text({"x", "y"});
  CHECK(t.str() == "a,b\n1,0.5\nx,y\n");
  CHECK_THROWS(t.add_row({1.0}));
}
