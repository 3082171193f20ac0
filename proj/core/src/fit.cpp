#include "tbnls/fit.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace tbnls {

double LinearFit::slope_halfwidth(double confidence) const {
  if (points < 3) return INFINITY;
  const boost::math::students_t dist(points - 2);
  return boost::math::quantile(dist, 0.5 + 0.5 * confidence) * slope_stderr;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y, int min_points) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: x and y differ in length");
  const int n = static_cast<int>(x.size());
  if (n < min_points || n < 2)
    throw std::invalid_argument("fit: needs at least " + std::to_string(min_points) + " points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit: non-finite data point");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit: abscissae are all equal");

  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      sse += r * r;
    }
    const double s2 = sse / (n - 2);
    f.slope_stderr = std::sqrt(s2 / sxx);
    f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

namespace {

std::vector<double> logs(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double a : v) {
    if (!(a > 0.0)) throw std::invalid_argument("fit: logarithm of a non-positive value");
    out.push_back(std::log(a));
  }
  return out;
}

}  // namespace

LinearFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                        int min_points) {
  return fit_line(logs(x), logs(y), min_points);
}

LinearFit fit_exponential_in_inverse(const std::vector<double>& x, const std::vector<double>& y,
                                     int min_points) {
  std::vector<double> inv;
  inv.reserve(x.size());
  for (double a : x) {
    if (a == 0.0) throw std::invalid_argument("fit: zero abscissa");
    inv.push_back(1.0 / a);
  }
  return fit_line(inv, logs(y), min_points);
}

}  // namespace tbnls
