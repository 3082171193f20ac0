#pragma once

#include <vector>

namespace tbnls {

/// Ordinary least-squares line y = intercept + slope x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  int points = 0;

  /// Half-width of the two-sided confidence interval on the slope
  /// (Student t with points - 2 degrees of freedom).
  double slope_halfwidth(double confidence = 0.95) const;
};

/// Throws std::invalid_argument with fewer than `min_points` points or a
/// degenerate abscissa.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y, int min_points = 4);

/// Fit of log y against log x.
LinearFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                        int min_points = 4);

/// Fit of log y against 1/x.
LinearFit fit_exponential_in_inverse(const std::vector<double>& x, const std::vector<double>& y,
                                     int min_points = 4);

}  // namespace tbnls
