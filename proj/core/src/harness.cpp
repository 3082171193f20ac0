#include "tbnls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace tbnls {

namespace {

Eigen::VectorXcd inner_all(const LocalizedBasis& basis, const Field& f) {
  Eigen::VectorXcd out(basis.size());
  for (int n = 0; n < basis.size(); ++n) out[n] = inner(basis.functions[n], f, basis.dx);
  return out;
}

Field cubic(const Field& psi) { return (psi.array().abs2() * psi.array()).matrix(); }

}  // namespace

Eigen::VectorXcd project_amplitudes(const FieldState& psi, const LocalizedBasis& basis,
                                    double lambda1, double hbar) {
  return inner_all(basis, psi.values) * std::polar(1.0, lambda1 * psi.tau / hbar);
}

Field synthesize(const Eigen::VectorXcd& a, const LocalizedBasis& basis) {
  if (a.size() != basis.size()) throw std::invalid_argument("amplitude/basis size mismatch");
  Field out = Field::Zero(basis.functions.at(0).size());
  for (int n = 0; n < basis.size(); ++n) out += a[n] * basis.functions[n];
  return out;
}

ReductionError reduction_error(const FieldState& psi, const LatticeState& g,
                               const LocalizedBasis& basis, const BandData& band, double lambda1,
                               double hbar) {
  if (std::abs(psi.tau - g.tau) > 1e-9 * std::max(1.0, std::abs(psi.tau))) {
    std::ostringstream os;
    os << "PDE and lattice trajectories are out of sync (tau " << psi.tau << " vs " << g.tau
       << ")";
    throw NumericalError(os.str());
  }
  ReductionError e;
  e.tau = psi.tau;
  const Eigen::VectorXcd c = project_amplitudes(psi, basis, lambda1, hbar);
  const Field psi_perp = psi.values - band_projection(psi.values, band);
  const Field model = synthesize(g.amplitudes, basis) * std::polar(1.0, -lambda1 * psi.tau / hbar);
  e.err_total = l2_norm(psi.values - model, psi.dx);
  e.err_perp = l2_norm(psi_perp, psi.dx);
  e.err_amp = (c - g.amplitudes).norm();

  const double lhs = e.err_total * e.err_total;
  const double rhs = e.err_perp * e.err_perp + e.err_amp * e.err_amp;
  if (std::abs(lhs - rhs) > 1e-10) {
    std::ostringstream os;
    os << "orthogonal error decomposition violated: " << lhs << " vs " << rhs;
    throw NumericalError(os.str());
  }
  return e;
}

RemainderVectors remainder_vectors(const FieldState& psi, const ReductionSetup& setup) {
  const auto& basis = setup.basis;
  const auto& tb = setup.coefficients;
  const RealField& w = setup.model.perturbation();

  const Eigen::VectorXcd c = inner_all(basis, psi.values);
  const Field psi1 = band_projection(psi.values, setup.band);
  const Field perp = psi.values - psi1;

  RemainderVectors r;
  r.r1 = tb.residual * c;
  Eigen::MatrixXcd off = tb.perturbation;
  off.diagonal().setZero();
  r.r2 = off * c;
  r.r3 = inner_all(basis, (w.cast<cplx>().array() * perp.array()).matrix());

  const Field full = cubic(psi.values);
  const Field band_part = cubic(psi1);
  r.a = inner_all(basis, full - band_part);
  r.b = inner_all(basis, band_part);
  for (int n = 0; n < basis.size(); ++n) r.b[n] -= tb.c1 * std::norm(c[n]) * c[n];
  r.r4 = r.a + r.b;
  return r;
}

RemainderDiagnostics remainder_diagnostics(const FieldState& psi, const ReductionSetup& setup,
                                           const SemiclassicalParams& params) {
  const RemainderVectors v = remainder_vectors(psi, setup);
  RemainderDiagnostics d;
  d.tau = psi.tau;
  d.r1 = v.r1.norm();
  d.r2 = params.F * v.r2.norm();
  d.r3 = params.F * v.r3.norm();
  d.r4 = std::abs(params.eta) * v.r4.norm();
  d.a = v.a.norm();
  d.b = v.b.norm();
  d.total = (v.r1 + params.F * (v.r2 + v.r3) + params.eta * v.r4).norm();
  d.perp = l2_norm(psi.values - band_projection(psi.values, setup.band), psi.dx);
  return d;
}

Eigen::VectorXcd gaussian_amplitudes(int sites, int width) {
  if (width < 1 || width > sites) throw std::invalid_argument("gaussian width out of range");
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(sites);
  const int c = sites / 2;
  for (int k = 0; k < width; ++k) {
    const int n = c - width / 2 + k;
    const double d = n - c;
    g[((n % sites) + sites) % sites] = std::exp(-0.5 * d * d);
  }
  return g / g.norm();
}

PairedRunResult run_paired(const ReductionSetup& setup, const SemiclassicalParams& params,
                           const Eigen::VectorXcd& g0, const PairedRunConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  if (!(config.final_time > 0.0)) throw std::invalid_argument("final time must be positive");
  if (config.monitor_stride < 1) throw std::invalid_argument("monitor stride must be >= 1");
  const double hbar = setup.hbar;
  if (std::abs(params.hbar - hbar) > 1e-14 * hbar)
    throw std::invalid_argument("parameters and reduction setup disagree on hbar");
  const double lambda1 = setup.coefficients.lambda1;

  PairedRunResult out;
  out.t_target = config.final_time;
  double dt = config.dt;
  if (!(dt > 0.0))
    dt = config.scheme == SplitScheme::bloch_exact ? default_bloch_time_step(setup.spectrum, params)
                                                   : default_time_step(setup.model, params);
  long steps = std::max(config.min_pde_steps, static_cast<long>(std::ceil(config.final_time / dt)));
  steps = ((steps + config.monitor_stride - 1) / config.monitor_stride) * config.monitor_stride;
  dt = config.final_time / steps;
  out.dt = dt;

  PropagatorConfig pc;
  pc.dt = dt;
  pc.final_time = config.final_time;
  pc.monitor_stride = config.monitor_stride;
  pc.scheme = config.scheme;
  const GpePropagator propagator(setup.model, params, pc, &setup.spectrum);

  const DnlsCoefficients dc = DnlsCoefficients::from(setup.coefficients, params);
  DnlsOptions dopt;
  dopt.sample_interval = config.monitor_stride * dt;
  dopt.dt = std::min(default_dnls_step(dc), dopt.sample_interval);
  const DnlsTrajectory traj = integrate(LatticeState{0.0, g0}, dc, config.final_time, dopt);
  out.dnls_norm_drift = traj.norm_drift;
  if (traj.samples.size() != static_cast<std::size_t>(steps / config.monitor_stride + 1))
    throw NumericalError("lattice trajectory sampling does not match the PDE monitor grid");

  FieldState psi{0.0, synthesize(g0, setup.basis), setup.basis.dx};
  const ConservationMonitor monitor(psi, setup.model, params, &setup.band);
  const double sh = std::sqrt(hbar), qh = std::pow(hbar, 0.25);

  auto record = [&](const FieldState& state, std::size_t index) {
    const LatticeState& g = traj.samples[index];
    PairedSample s;
    s.error = reduction_error(state, g, setup.basis, setup.band, lambda1, hbar);
    if (config.remainders) s.remainder = remainder_diagnostics(state, setup, params);
    s.conservation = monitor.observe(state);
    s.amplitudes = project_amplitudes(state, setup.basis, lambda1, hbar);
    s.lattice = g.amplitudes;
    const int n = static_cast<int>(g.amplitudes.size());
    s.boundary_amplitude = std::max(std::abs(g.amplitudes[0]), std::abs(g.amplitudes[n - 1]));
    out.max_err_total = std::max(out.max_err_total, s.error.err_total);
    out.max_err_perp = std::max(out.max_err_perp, s.error.err_perp);
    out.max_err_amp = std::max(out.max_err_amp, s.error.err_amp);
    out.max_grad_scaled = std::max(out.max_grad_scaled, s.conservation.grad_norm * sh);
    out.max_sup_scaled = std::max(out.max_sup_scaled, s.conservation.sup_norm * qh);
    out.max_mass_drift = std::max(out.max_mass_drift, s.conservation.mass_drift);
    out.max_energy_drift = std::max(out.max_energy_drift, s.conservation.energy_drift);
    out.t_reached = state.tau;
    out.samples.push_back(std::move(s));
    if (config.on_sample) config.on_sample(state);
  };
  record(psi, 0);

  const auto observer = [&](const FieldState& state, long step) {
    record(state, static_cast<std::size_t>(step / config.monitor_stride));
    if (config.wall_budget_seconds > 0.0 &&
        std::chrono::duration<double>(clock::now() - start).count() > config.wall_budget_seconds) {
      out.truncated = true;
      return false;
    }
    return true;
  };
  out.pde_steps = propagator.advance(psi, steps, observer);

  if (out.truncated) {
    std::ostringstream os;
    os << "wall-clock budget reached: window truncated at tau = " << out.t_reached << " of "
       << out.t_target;
    out.notes.push_back(os.str());
  }
  double boundary = 0.0;
  for (const auto& s : out.samples) boundary = std::max(boundary, s.boundary_amplitude);
  if (boundary > 1e-8) {
    std::ostringstream os;
    os << "boundary-site amplitude reached " << boundary << " (ring wrap may matter)";
    out.notes.push_back(os.str());
  }
  for (const auto& s : out.samples)
    if (s.conservation.grad_flag || s.conservation.sup_flag) {
      out.notes.push_back("a priori norm monitor flagged at tau = " +
                          std::to_string(s.conservation.tau));
      break;
    }
  out.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return out;
}

int default_workers() {
  if (const char* env = std::getenv("TBNLS_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void check_grid(const std::vector<double>& hbars) {
  if (hbars.empty()) throw std::invalid_argument("sweep: empty hbar grid");
  for (std::size_t i = 1; i < hbars.size(); ++i)
    if (!(hbars[i] < hbars[i - 1]))
      throw std::invalid_argument("sweep: hbar grid must be strictly decreasing");
}

using PointJob = std::function<SweepRow(double)>;

std::vector<SweepRow> run_points(const SweepConfig& config, const PointJob& job,
                                 const SweepProgress& progress) {
  const std::size_t n = config.hbars.size();
  std::vector<SweepRow> rows(n);
  std::atomic<std::size_t> next{0};
  std::mutex collector;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      SweepRow row;
      try {
        row = job(config.hbars[i]);
      } catch (const std::exception& e) {
        row.hbar = config.hbars[i];
        row.failed = true;
        row.note = e.what();
      }
      std::lock_guard lock(collector);
      rows[i] = row;
      if (progress) progress(row);
    }
  };
  const int workers = std::min<int>(config.workers > 0 ? config.workers : default_workers(),
                                    static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

SweepRow run_point(const ReductionSetup& setup, const SemiclassicalParams& params, double window,
                   const SweepConfig& config) {
  SweepRow row;
  row.hbar = setup.hbar;
  row.F = params.F;
  row.eta = params.eta;
  row.beta = setup.coefficients.beta;
  row.c1 = setup.coefficients.c1;
  row.s0 = setup.coefficients.s0;
  row.t_window = window;
  PairedRunConfig rc = config.run;
  rc.final_time = window;
  const auto g0 = gaussian_amplitudes(setup.model.num_cells(), config.initial_width);
  const PairedRunResult r = run_paired(setup, params, g0, rc);
  row.max_err_total = r.max_err_total;
  row.max_err_perp = r.max_err_perp;
  row.max_err_amp = r.max_err_amp;
  row.max_grad_scaled = r.max_grad_scaled;
  row.max_sup_scaled = r.max_sup_scaled;
  row.truncated = r.truncated;
  if (r.truncated) row.t_window = r.t_reached;
  for (const auto& note : r.notes) row.note += (row.note.empty() ? "" : "; ") + note;
  return row;
}

void fit_rows(SweepResult& result, bool inverse) {
  std::vector<double> x, y;
  for (const auto& row : result.rows) {
    if (row.failed || !(row.max_err_total > 0.0)) continue;
    x.push_back(row.hbar);
    y.push_back(row.max_err_total);
  }
  try {
    result.fit = inverse ? fit_exponential_in_inverse(x, y) : fit_power_law(x, y);
    result.fit_valid = true;
  } catch (const std::invalid_argument& e) {
    result.notes.push_back(std::string("no slope fit: ") + e.what());
  }
  for (const auto& row : result.rows)
    if (row.failed) result.notes.push_back("h = " + std::to_string(row.hbar) + " failed: " + row.note);
}

}  // namespace

SweepResult run_model1_sweep(const SweepConfig& config, const SweepProgress& progress) {
  check_grid(config.hbars);
  const LatticeModel model = LatticeModel::build(config.lattice);
  SweepResult result;
  result.regime = Regime::model1;
  result.rows = run_points(
      config,
      [&](double hbar) {
        const ReductionSetup setup = prepare_reduction(model, hbar);
        const SemiclassicalParams p = model1_params(hbar, config.k_F, config.k_eta);
        return run_point(setup, p, std::pow(hbar, -config.gamma), config);
      },
      progress);
  fit_rows(result, false);
  return result;
}

SweepResult run_model2_sweep(const SweepConfig& config, const SweepProgress& progress) {
  check_grid(config.hbars);
  const LatticeModel model = LatticeModel::build(config.lattice);
  SweepResult result;
  result.regime = Regime::model2;
  result.rows = run_points(
      config,
      [&](double hbar) {
        const ReductionSetup setup = prepare_reduction(model, hbar);
        const double beta = setup.coefficients.beta;
        const SemiclassicalParams p = model2_params(hbar, beta, config.k_F, config.k_eta);
        return run_point(setup, p, config.k_T * hbar / beta, config);
      },
      progress);
  fit_rows(result, true);
  return result;
}

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const SweepRow* anchor_row(const SweepResult& r) {
  for (const auto& row : r.rows)
    if (!row.failed) return &row;
  return nullptr;
}

}  // namespace

std::vector<SweepCheck> check_model1_sweep(const SweepResult& r, double min_slope, double band) {
  std::vector<SweepCheck> out;
  SweepCheck slope{"model-1 error exponent", false, ""};
  if (r.fit_valid) {
    slope.passed = r.fit.slope >= min_slope;
    slope.detail = "slope " + describe(r.fit.slope) + " +- " + describe(r.fit.slope_stderr) +
                   " (need >= " + describe(min_slope) + ")";
  } else {
    slope.detail = "no valid fit";
  }
  out.push_back(slope);

  SweepCheck bound{"model-1 bound with constant fixed at largest h", false, ""};
  if (const SweepRow* a = anchor_row(r)) {
    const double c = a->max_err_total / std::pow(a->hbar, min_slope);
    double worst = 0.0;
    bool all = true;
    for (const auto& row : r.rows) {
      if (row.failed) {
        all = false;
        continue;
      }
      worst = std::max(worst, row.max_err_total / (c * std::pow(row.hbar, min_slope)));
    }
    bound.passed = all && worst <= band;
    bound.detail = "C_fit " + describe(c) + ", worst err / (C_fit h^" + describe(min_slope) +
                   ") = " + describe(worst) + " (need <= " + describe(band) + ")";
  } else {
    bound.detail = "no successful sweep point";
  }
  out.push_back(bound);
  return out;
}

std::vector<SweepCheck> check_model2_sweep(const SweepResult& r, double confidence,
                                           double rho_fraction, double band) {
  std::vector<SweepCheck> out;
  SweepCheck slope{"model-2 exponential decay of the error", false, ""};
  if (r.fit_valid) {
    const double upper = r.fit.slope + r.fit.slope_halfwidth(confidence);
    slope.passed = upper < 0.0;
    slope.detail = "slope " + describe(r.fit.slope) + ", upper " +
                   describe(100 * confidence) + "% limit " + describe(upper) + " (need < 0)";
  } else {
    slope.detail = "no valid fit";
  }
  out.push_back(slope);

  SweepCheck perp{"model-2 orthogonal part below c e^{-(S0-rho)/h}", false, ""};
  if (const SweepRow* a = anchor_row(r)) {
    const double rate = a->s0 * (1.0 - rho_fraction);
    const double c = a->max_err_perp * std::exp(rate / a->hbar);
    double worst = 0.0;
    bool all = true;
    for (const auto& row : r.rows) {
      if (row.failed) {
        all = false;
        continue;
      }
      worst = std::max(worst, row.max_err_perp / (c * std::exp(-rate / row.hbar)));
    }
    perp.passed = all && worst <= band;
    perp.detail = "c " + describe(c) + ", worst ratio " + describe(worst) + " (need <= " +
                  describe(band) + ")";
  } else {
    perp.detail = "no successful sweep point";
  }
  out.push_back(perp);
  return out;
}

std::vector<SweepCheck> check_norm_monitors(const SweepResult& r, double band) {
  std::vector<SweepCheck> out;
  const SweepRow* a = anchor_row(r);
  auto check = [&](const char* name, double SweepRow::*field) {
    SweepCheck c{name, false, ""};
    if (!a) {
      c.detail = "no successful sweep point";
      return c;
    }
    double lo = INFINITY, hi = 0.0;
    bool all = true;
    for (const auto& row : r.rows) {
      if (row.failed) {
        all = false;
        continue;
      }
      const double q = row.*field / (a->*field);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    c.passed = all && hi <= band && lo >= 1.0 / band;
    c.detail = "ratio to largest h in [" + describe(lo) + ", " + describe(hi) + "] (need within x" +
               describe(band) + ")";
    return c;
  };
  out.push_back(check("gradient monitor h^{1/2} max||psi'||", &SweepRow::max_grad_scaled));
  out.push_back(check("sup monitor h^{1/4} max||psi||_inf", &SweepRow::max_sup_scaled));
  return out;
}

}  // namespace tbnls
