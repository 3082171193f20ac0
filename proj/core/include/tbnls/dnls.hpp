#pragma once

#include <vector>

#include "tbnls/basis.hpp"

namespace tbnls {

struct LatticeState {
  double tau = 0.0;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

/// Coefficients of i h g_n' = -beta (g_{n+1} + g_{n-1}) + F chi_n g_n + eta C1 |g_n|^2 g_n
/// on the N-site ring.
struct DnlsCoefficients {
  double hbar = 0.1;
  double beta = 0.0;
  double F = 0.0;
  double eta = 0.0;
  double c1 = 0.0;
  Eigen::VectorXd chi;

  static DnlsCoefficients from(const TightBindingCoefficients& tb, const SemiclassicalParams& p);
  int sites() const { return static_cast<int>(chi.size()); }
};

/// (1/(i h)) G(g) with periodic wrap.
Eigen::VectorXcd dnls_rhs(const Eigen::VectorXcd& g, const DnlsCoefficients& c);

/// 0.1 h / max(beta, F max|chi|, |eta| C1).
double default_dnls_step(const DnlsCoefficients& c);

struct DnlsOptions {
  double dt = 0.0;               // 0: default_dnls_step
  double sample_interval = 0.0;  // 0: every step
  double drift_tolerance = 1e-10;
  int max_halvings = 6;
};

struct DnlsTrajectory {
  std::vector<LatticeState> samples;  // includes tau = 0
  double dt_used = 0.0;
  int halvings = 0;
  double norm_drift = 0.0;  // max | ||g(tau)|| - ||g(0)|| |
};

/// One classical RK4 step.
void rk4_step(LatticeState& g, const DnlsCoefficients& c, double dt);

/// RK4 from g0 to final_time. The whole run is repeated with a halved step when
/// the norm drift exceeds the tolerance; NumericalError after max_halvings.
/// Requires ||g0|| = 1.
DnlsTrajectory integrate(const LatticeState& g0, const DnlsCoefficients& c, double final_time,
                         const DnlsOptions& options = {});

/// g -> e^{i Lambda_1 tau / h} g.
LatticeState apply_gauge(const LatticeState& g, double lambda1, double hbar, double tau);

}  // namespace tbnls
