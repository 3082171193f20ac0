#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tbnls/dnls.hpp"
#include "tbnls/fit.hpp"
#include "tbnls/gpe.hpp"

namespace tbnls {

/// c_n = e^{i Lambda_1 tau / h} <u_n, psi>: amplitudes in the gauged frame
/// psi -> e^{i Lambda_1 tau / h} psi, where the lattice equation carries no
/// on-site phase.
Eigen::VectorXcd project_amplitudes(const FieldState& psi, const LocalizedBasis& basis,
                                    double lambda1, double hbar);

/// sum_n a_n u_n on the grid.
Field synthesize(const Eigen::VectorXcd& a, const LocalizedBasis& basis);

struct ReductionError {
  double tau = 0.0;
  double err_total = 0.0;  // ||e^{i Lambda_1 tau/h} psi - sum g_n u_n||
  double err_perp = 0.0;   // ||Pi_perp psi||
  double err_amp = 0.0;    // ||c - g||
};

/// All three components; throws NumericalError on a tau mismatch or when
/// err_total^2 = err_perp^2 + err_amp^2 fails beyond 1e-10.
ReductionError reduction_error(const FieldState& psi, const LatticeState& g,
                               const LocalizedBasis& basis, const BandData& band, double lambda1,
                               double hbar);

/// Component vectors of the amplitude remainder r = r1 + F r2 + F r3 + eta r4,
/// all in the ungauged frame (c_n = <u_n, psi>).
struct RemainderVectors {
  Eigen::VectorXcd r1;  // D~ c
  Eigen::VectorXcd r2;  // sum_{m != n} <u_n, W u_m> c_m
  Eigen::VectorXcd r3;  // <u_n, W psi_perp>
  Eigen::VectorXcd r4;  // <u_n, |psi|^2 psi> - C1 |c_n|^2 c_n
  Eigen::VectorXcd a;   // <u_n, |psi|^2 psi - |psi_1|^2 psi_1>
  Eigen::VectorXcd b;   // <u_n, |psi_1|^2 psi_1> - C1 |c_n|^2 c_n
};

RemainderVectors remainder_vectors(const FieldState& psi, const ReductionSetup& setup);

struct RemainderDiagnostics {
  double tau = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;  // F ||r2||
  double r3 = 0.0;  // F ||r3||
  double r4 = 0.0;  // |eta| ||r4||
  double a = 0.0;   // ||A||
  double b = 0.0;   // ||B||
  double total = 0.0;  // ||r||
  double perp = 0.0;   // ||psi_perp||
};

RemainderDiagnostics remainder_diagnostics(const FieldState& psi, const ReductionSetup& setup,
                                           const SemiclassicalParams& params);

/// Normalized Gaussian g_n ~ exp(-(n - c)^2 / 2) on the `width` sites around
/// the central site c, zero elsewhere.
Eigen::VectorXcd gaussian_amplitudes(int sites, int width = 5);

struct PairedRunConfig {
  double final_time = 1.0;
  double dt = 0.0;  // 0: scheme default, then refined to reach min_pde_steps
  SplitScheme scheme = SplitScheme::bloch_exact;
  int monitor_stride = 50;
  long min_pde_steps = 2000;
  double wall_budget_seconds = 0.0;  // 0: unlimited
  bool remainders = true;
  /// Called with the PDE state at every sample (including tau = 0).
  std::function<void(const FieldState&)> on_sample;
};

struct PairedSample {
  ReductionError error;
  RemainderDiagnostics remainder;
  ConservationReport conservation;
  Eigen::VectorXcd amplitudes;      // c(tau), gauged
  Eigen::VectorXcd lattice;         // g(tau)
  double boundary_amplitude = 0.0;  // max(|g_0|, |g_{N-1}|)
};

struct PairedRunResult {
  std::vector<PairedSample> samples;  // includes tau = 0
  double dt = 0.0;
  long pde_steps = 0;
  double t_target = 0.0;
  double t_reached = 0.0;
  bool truncated = false;
  double dnls_norm_drift = 0.0;
  double max_err_total = 0.0;
  double max_err_perp = 0.0;
  double max_err_amp = 0.0;
  double max_grad_scaled = 0.0;  // max ||psi'|| h^{1/2}
  double max_sup_scaled = 0.0;   // max ||psi||_inf h^{1/4}
  double max_mass_drift = 0.0;
  double max_energy_drift = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::string> notes;
};

/// Propagates psi_0 = sum g0_n u_n with the PDE and g0 with the DNLS, and
/// compares them every monitor_stride PDE steps.
PairedRunResult run_paired(const ReductionSetup& setup, const SemiclassicalParams& params,
                           const Eigen::VectorXcd& g0, const PairedRunConfig& config);

struct SweepConfig {
  LatticeSpec lattice;
  std::vector<double> hbars;  // strictly decreasing
  double k_F = 1.0;
  double k_eta = 1.0;
  double gamma = 0.5;  // model 1: T = h^{-gamma}
  double k_T = 1.0;    // model 2: T = k_T h / beta
  int initial_width = 5;
  PairedRunConfig run;  // final_time is overwritten per point
  int workers = 0;      // 0: TBNLS_WORKERS or hardware concurrency
};

struct SweepRow {
  double hbar = 0.0;
  double F = 0.0;
  double eta = 0.0;
  double beta = 0.0;
  double c1 = 0.0;
  double s0 = 0.0;
  double t_window = 0.0;
  double max_err_total = 0.0;
  double max_err_perp = 0.0;
  double max_err_amp = 0.0;
  double max_grad_scaled = 0.0;
  double max_sup_scaled = 0.0;
  bool truncated = false;
  bool failed = false;
  std::string note;
};

struct SweepResult {
  Regime regime = Regime::model1;
  std::vector<SweepRow> rows;  // ordered as the h grid
  bool fit_valid = false;
  LinearFit fit;  // model 1: log err vs log h; model 2: log err vs 1/h
  std::vector<std::string> notes;
};

using SweepProgress = std::function<void(const SweepRow&)>;

/// F = k_F h^2, eta = k_eta h^2, T = h^{-gamma}.
SweepResult run_model1_sweep(const SweepConfig& config, const SweepProgress& progress = {});
/// F = k_F beta, eta = k_eta h^{1/2} beta, T = k_T h / beta.
SweepResult run_model2_sweep(const SweepConfig& config, const SweepProgress& progress = {});

/// One pass/fail verdict on a sweep.
struct SweepCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fitted slope >= min_slope, and with C fixed at the largest h by
/// err = C h^{min_slope}, err <= band * C h^{min_slope} at every h.
std::vector<SweepCheck> check_model1_sweep(const SweepResult& r, double min_slope,
                                           double band);

/// Slope of log err vs 1/h negative with the given two-sided confidence, and
/// ||psi_perp|| <= band * c e^{-(S0 - rho)/h}, rho = rho_fraction S0, with c
/// fixed at the largest h.
std::vector<SweepCheck> check_model2_sweep(const SweepResult& r, double confidence,
                                           double rho_fraction, double band);

/// max ||psi'|| h^{1/2} and max ||psi||_inf h^{1/4} within a factor `band`
/// (either way) of their values at the largest h.
std::vector<SweepCheck> check_norm_monitors(const SweepResult& r, double band);

/// TBNLS_WORKERS if set and positive, else the hardware concurrency (at least 1).
int default_workers();

}  // namespace tbnls
