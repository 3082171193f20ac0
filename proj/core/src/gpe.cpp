#include "tbnls/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tbnls {

std::string to_string(SplitScheme s) {
  return s == SplitScheme::bloch_exact ? "bloch-exact" : "kinetic-potential";
}

SplitScheme split_scheme_from_string(const std::string& s) {
  if (s == "kinetic-potential") return SplitScheme::kinetic_potential;
  if (s == "bloch-exact") return SplitScheme::bloch_exact;
  throw std::invalid_argument("unknown scheme '" + s +
                              "' (expected kinetic-potential or bloch-exact)");
}

double default_time_step(const LatticeModel& model, const SemiclassicalParams& params) {
  const double vmax =
      (model.potential() + params.F * model.perturbation()).cwiseAbs().maxCoeff();
  return 0.05 * params.hbar / std::max(1.0, vmax);
}

double default_bloch_time_step(const BlochSpectrum& spectrum, const SemiclassicalParams& params) {
  double e1_bottom = spectrum.block(0).energies[0];
  double e2_top = spectrum.block(0).energies[1];
  for (int j = 0; j < spectrum.num_blocks(); ++j) {
    e1_bottom = std::min(e1_bottom, spectrum.block(j).energies[0]);
    e2_top = std::max(e2_top, spectrum.block(j).energies[1]);
  }
  double dt = 0.25 * params.hbar / (e2_top - e1_bottom);
  const double wmax = params.F * spectrum.hamiltonian().model().perturbation().cwiseAbs().maxCoeff();
  if (wmax > 0.0) dt = std::min(dt, 0.1 * params.hbar / wmax);
  return dt;
}

GpePropagator::GpePropagator(const LatticeModel& model, const SemiclassicalParams& params,
                             const PropagatorConfig& config, const BlochSpectrum* spectrum)
    : model_(model), params_(params), config_(config) {
  params.validate();
  if (!(config.dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(config.final_time > 0.0)) throw std::invalid_argument("final time must be positive");
  if (config.monitor_stride < 1) throw std::invalid_argument("monitor stride must be >= 1");

  const bool exact = config.scheme == SplitScheme::bloch_exact;
  static_potential_ = params.F * model.perturbation();
  if (!exact) static_potential_ += model.potential();
  const double phase_rate = config.dt * static_potential_.cwiseAbs().maxCoeff() / params.hbar;
  if (phase_rate > 0.1 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time step " << config.dt << " violates the phase-resolution rule (dt max|V+FW|/h = "
       << phase_rate << " > 0.1)";
    throw std::invalid_argument(os.str());
  }

  if (exact) {
    if (spectrum == nullptr)
      throw std::invalid_argument("bloch-exact splitting needs the Bloch spectrum");
    const auto& sm = spectrum->hamiltonian().model();
    if (sm.grid_size() != model.grid_size() || sm.num_cells() != model.num_cells() ||
        std::abs(spectrum->hamiltonian().hbar() - params.hbar) > 1e-15 * params.hbar)
      throw std::invalid_argument("Bloch spectrum was computed for a different lattice or hbar");
    fft_ = std::make_shared<Fft>(model.grid_size());
    block_propagators_.reserve(spectrum->num_blocks());
    for (int j = 0; j < spectrum->num_blocks(); ++j) {
      const auto& b = spectrum->block(j);
      const Eigen::VectorXcd phases =
          (b.energies.cast<cplx>() * (-kI * config.dt / params.hbar)).array().exp();
      block_propagators_.push_back(b.vectors * phases.asDiagonal() * b.vectors.adjoint());
    }
  } else {
    fft_ = std::make_shared<Fft>(model.grid_size());
    const RealField k = wavenumbers(model.grid_size(), model.dx());
    kinetic_phase_ = (k.array().square().cast<cplx>() * (-kI * params.hbar * config.dt)).exp();
  }
}

void GpePropagator::apply_phase(Field& psi, double fraction) const {
  const double scale = fraction * config_.dt / params_.hbar;
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    const double v = static_potential_[j] + params_.eta * std::norm(psi[j]);
    psi[j] *= std::polar(1.0, -v * scale);
  }
}

void GpePropagator::step(FieldState& psi) const {
  apply_phase(psi.values, 0.5);
  Field spec = fft_->forward(psi.values);
  if (config_.scheme == SplitScheme::bloch_exact) {
    const int m = model_.points_per_cell();
    const int n = model_.num_cells();
    // bin j + g N sits at row g, column j of the row-major M x N view
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
        spec.data(), m, n);
    Eigen::VectorXcd column(m);
    for (int j = 0; j < n; ++j) {
      column.noalias() = block_propagators_[j] * view.col(j);
      view.col(j) = column;
    }
  } else {
    spec.array() *= kinetic_phase_.array();
  }
  fft_->inverse(spec, psi.values);
  apply_phase(psi.values, 0.5);
  psi.tau += config_.dt;
}

long GpePropagator::advance(FieldState& psi, long steps,
                            const std::function<bool(const FieldState&, long)>& observer) const {
  for (long s = 1; s <= steps; ++s) {
    step(psi);
    if (!psi.values.allFinite()) {
      std::ostringstream os;
      os << "non-finite wavefunction at step " << s << " (tau = " << psi.tau << ")";
      throw NumericalError(os.str());
    }
    if (observer && s % config_.monitor_stride == 0 && !observer(psi, s)) return s;
  }
  return steps;
}

FieldState step(const FieldState& psi, const PropagatorConfig& config, const LatticeModel& model,
                const SemiclassicalParams& params) {
  GpePropagator prop(model, params, config);
  FieldState out = psi;
  prop.step(out);
  return out;
}

EnergyFunctional::EnergyFunctional(const LatticeModel& model, const SemiclassicalParams& params)
    : model_(model),
      params_(params),
      fft_(std::make_shared<Fft>(model.grid_size())),
      k2_(wavenumbers(model.grid_size(), model.dx()).array().square()) {}

double EnergyFunctional::gradient_norm(const Field& psi) const {
  const Field spec = fft_->forward(psi);
  return std::sqrt(model_.dx() / model_.grid_size() * (k2_.array() * spec.array().abs2()).sum());
}

double EnergyFunctional::operator()(const FieldState& psi) const {
  const double g = gradient_norm(psi.values);
  const RealField rho = psi.values.cwiseAbs2();
  const double dx = model_.dx();
  return params_.hbar * params_.hbar * g * g + dx * model_.potential().dot(rho) +
         params_.F * dx * model_.perturbation().dot(rho) +
         0.5 * params_.eta * dx * rho.squaredNorm();
}

double energy(const FieldState& psi, const LatticeModel& model, const SemiclassicalParams& params) {
  return EnergyFunctional(model, params)(psi);
}

ConservationMonitor::ConservationMonitor(const FieldState& initial, const LatticeModel& model,
                                         const SemiclassicalParams& params, const BandData* band,
                                         double flag_factor)
    : energy_(model, params),
      band_(band),
      hbar_(params.hbar),
      flag_factor_(flag_factor),
      mass0_(initial.norm()),
      energy0_(energy_(initial)) {
  ref_grad_scaled_ = energy_.gradient_norm(initial.values) * std::sqrt(hbar_);
  ref_sup_scaled_ = initial.values.cwiseAbs().maxCoeff() * std::pow(hbar_, 0.25);
}

ConservationReport ConservationMonitor::observe(const FieldState& psi) const {
  ConservationReport r;
  r.tau = psi.tau;
  r.mass_drift = std::abs(psi.norm() - mass0_);
  const double e = energy_(psi);
  r.energy_drift = std::abs(e - energy0_) / std::max(std::abs(energy0_), 1e-300);
  r.grad_norm = energy_.gradient_norm(psi.values);
  r.sup_norm = psi.values.cwiseAbs().maxCoeff();
  if (band_ != nullptr)
    r.perp_norm = l2_norm(psi.values - band_projection(psi.values, *band_), psi.dx);
  r.grad_flag = r.grad_norm * std::sqrt(hbar_) > flag_factor_ * ref_grad_scaled_;
  r.sup_flag = r.sup_norm * std::pow(hbar_, 0.25) > flag_factor_ * ref_sup_scaled_;
  return r;
}

}  // namespace tbnls
