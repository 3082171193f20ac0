#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tbnls/spectral.hpp"

namespace tbnls {

enum class SplitScheme {
  /// Strang: half potential phase (V + F W + eta|psi|^2), exact kinetic
  /// Fourier multiplier, half phase at the updated density.
  kinetic_potential,
  /// Strang: half phase (F W + eta|psi|^2), H_B propagated exactly through
  /// its Bloch-block eigendecomposition, half phase.
  bloch_exact,
};

std::string to_string(SplitScheme s);
SplitScheme split_scheme_from_string(const std::string& s);

struct PropagatorConfig {
  double dt = 0.0;
  double final_time = 1.0;
  int monitor_stride = 50;
  double mass_tolerance = 1e-10;
  double energy_tolerance = 1e-8;
  SplitScheme scheme = SplitScheme::kinetic_potential;
};

/// 0.05 h / max(1, max|V + F W|).
double default_time_step(const LatticeModel& model, const SemiclassicalParams& params);

/// Step for the Bloch-exact scheme: resolves the first-to-second band
/// frequency (0.25 h / (E2_top - E1_bottom)) and keeps the split phase
/// F max|W| dt / h below 0.1.
double default_bloch_time_step(const BlochSpectrum& spectrum, const SemiclassicalParams& params);

/// Propagator for i h psi_tau = -h^2 psi'' + V psi + F W psi + eta |psi|^2 psi
/// in the lab frame (no gauge). Norm-preserving by construction.
class GpePropagator {
 public:
  /// Refuses a step violating dt max|V + F W| / h <= 0.1 (for bloch_exact only
  /// the split part F W enters). `spectrum` is required for bloch_exact.
  GpePropagator(const LatticeModel& model, const SemiclassicalParams& params,
                const PropagatorConfig& config, const BlochSpectrum* spectrum = nullptr);

  const PropagatorConfig& config() const { return config_; }
  const SemiclassicalParams& params() const { return params_; }

  void step(FieldState& psi) const;

  /// Runs `steps` steps. The observer sees the state after every
  /// `monitor_stride` steps and may return false to stop early; the return
  /// value is the number of steps taken. Throws NumericalError (with the step
  /// index) on non-finite values.
  long advance(FieldState& psi, long steps,
               const std::function<bool(const FieldState&, long)>& observer = {}) const;

 private:
  void apply_phase(Field& psi, double fraction) const;

  LatticeModel model_;
  SemiclassicalParams params_;
  PropagatorConfig config_;
  std::shared_ptr<const Fft> fft_;
  RealField static_potential_;  // V + F W or F W
  Field kinetic_phase_;
  std::vector<Eigen::MatrixXcd> block_propagators_;
};

/// Convenience single step (builds a propagator).
FieldState step(const FieldState& psi, const PropagatorConfig& config, const LatticeModel& model,
                const SemiclassicalParams& params);

/// E(psi) = h^2 ||psi'||^2 + <V psi, psi> + F <W psi, psi> + eta/2 ||psi||_4^4.
class EnergyFunctional {
 public:
  EnergyFunctional(const LatticeModel& model, const SemiclassicalParams& params);

  double operator()(const FieldState& psi) const;
  /// ||psi'||_{L2}, spectral derivative.
  double gradient_norm(const Field& psi) const;

 private:
  LatticeModel model_;
  SemiclassicalParams params_;
  std::shared_ptr<const Fft> fft_;
  RealField k2_;
};

double energy(const FieldState& psi, const LatticeModel& model, const SemiclassicalParams& params);

struct ConservationReport {
  double tau = 0.0;
  double mass_drift = 0.0;    // | ||psi|| - ||psi_0|| |
  double energy_drift = 0.0;  // |E - E_0| / |E_0|
  double grad_norm = 0.0;     // ||psi'||
  double sup_norm = 0.0;      // ||psi||_inf
  double perp_norm = 0.0;     // ||Pi_perp psi||, 0 when no band data is attached
  bool grad_flag = false;     // ||psi'|| h^{1/2} above flag_factor x its tau = 0 value
  bool sup_flag = false;      // ||psi||_inf h^{1/4} likewise
};

/// Tracks the conserved quantities and the a priori bounds
/// ||psi'|| <= C h^{-1/2}, ||psi||_inf <= C h^{-1/4}, with C taken from the
/// initial state. Flags, never aborts.
class ConservationMonitor {
 public:
  ConservationMonitor(const FieldState& initial, const LatticeModel& model,
                      const SemiclassicalParams& params, const BandData* band = nullptr,
                      double flag_factor = 3.0);

  ConservationReport observe(const FieldState& psi) const;

  double reference_grad_scaled() const { return ref_grad_scaled_; }
  double reference_sup_scaled() const { return ref_sup_scaled_; }

 private:
  EnergyFunctional energy_;
  const BandData* band_;
  double hbar_;
  double flag_factor_;
  double mass0_;
  double energy0_;
  double ref_grad_scaled_;
  double ref_sup_scaled_;
};

}  // namespace tbnls
