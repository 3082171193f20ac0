#include "tbnls/dnls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tbnls {

DnlsCoefficients DnlsCoefficients::from(const TightBindingCoefficients& tb,
                                        const SemiclassicalParams& p) {
  DnlsCoefficients c;
  c.hbar = p.hbar;
  c.beta = tb.beta;
  c.F = p.F;
  c.eta = p.eta;
  c.c1 = tb.c1;
  c.chi = Eigen::Map<const Eigen::VectorXd>(tb.chi.data(), static_cast<Eigen::Index>(tb.chi.size()));
  return c;
}

Eigen::VectorXcd dnls_rhs(const Eigen::VectorXcd& g, const DnlsCoefficients& c) {
  const Eigen::Index n = g.size();
  Eigen::VectorXcd out(n);
  const cplx scale = -kI / c.hbar;
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx hop = g[(j + 1) % n] + g[(j + n - 1) % n];
    const double onsite = c.F * c.chi[j] + c.eta * c.c1 * std::norm(g[j]);
    out[j] = scale * (-c.beta * hop + onsite * g[j]);
  }
  return out;
}

double default_dnls_step(const DnlsCoefficients& c) {
  const double chi_max = c.chi.size() ? c.chi.cwiseAbs().maxCoeff() : 0.0;
  const double rate = std::max({c.beta, c.F * chi_max, std::abs(c.eta) * c.c1});
  if (!(rate > 0.0)) return 0.1 * c.hbar;
  return 0.1 * c.hbar / rate;
}

void rk4_step(LatticeState& g, const DnlsCoefficients& c, double dt) {
  const Eigen::VectorXcd& y = g.amplitudes;
  const Eigen::VectorXcd k1 = dnls_rhs(y, c);
  const Eigen::VectorXcd k2 = dnls_rhs(y + 0.5 * dt * k1, c);
  const Eigen::VectorXcd k3 = dnls_rhs(y + 0.5 * dt * k2, c);
  const Eigen::VectorXcd k4 = dnls_rhs(y + dt * k3, c);
  g.amplitudes += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  g.tau += dt;
}

namespace {

bool run_once(const LatticeState& g0, const DnlsCoefficients& c, double final_time, double dt,
              double sample_interval, double tol, DnlsTrajectory& out) {
  const long samples = std::max(1L, std::lround(final_time / sample_interval));
  const double interval = final_time / samples;
  const long sub = std::max(1L, static_cast<long>(std::ceil(interval / dt - 1e-9)));
  const double h = interval / sub;
  const double n0 = g0.norm();

  out.samples.clear();
  out.samples.reserve(samples + 1);
  out.samples.push_back(g0);
  out.dt_used = h;
  out.norm_drift = 0.0;
  LatticeState g = g0;
  for (long s = 1; s <= samples; ++s) {
    for (long k = 0; k < sub; ++k) rk4_step(g, c, h);
    g.tau = s * interval;
    if (!g.amplitudes.allFinite()) return false;
    out.norm_drift = std::max(out.norm_drift, std::abs(g.norm() - n0));
    if (out.norm_drift > tol) return false;
    out.samples.push_back(g);
  }
  return true;
}

}  // namespace

DnlsTrajectory integrate(const LatticeState& g0, const DnlsCoefficients& c, double final_time,
                         const DnlsOptions& options) {
  if (g0.amplitudes.size() != c.chi.size())
    throw std::invalid_argument("lattice state and coefficients differ in size");
  if (std::abs(g0.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("initial lattice state must be normalized");
  if (!(final_time > 0.0)) throw std::invalid_argument("final time must be positive");
  double dt = options.dt > 0.0 ? options.dt : default_dnls_step(c);
  dt = std::min(dt, final_time);
  const double interval = options.sample_interval > 0.0 ? options.sample_interval : dt;

  DnlsTrajectory out;
  for (int h = 0; h <= options.max_halvings; ++h) {
    out.halvings = h;
    if (run_once(g0, c, final_time, dt, std::max(interval, dt), options.drift_tolerance, out))
      return out;
    dt *= 0.5;
  }
  std::ostringstream os;
  os << "DNLS norm drift " << out.norm_drift << " above " << options.drift_tolerance << " after "
     << options.max_halvings << " step halvings";
  throw NumericalError(os.str());
}

LatticeState apply_gauge(const LatticeState& g, double lambda1, double hbar, double tau) {
  LatticeState out = g;
  out.amplitudes *= std::polar(1.0, lambda1 * tau / hbar);
  return out;
}

}  // namespace tbnls
