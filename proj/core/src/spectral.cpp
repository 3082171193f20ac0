#include "tbnls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tbnls {

double max_grid_spacing(double hbar) { return std::sqrt(hbar) / 8.0; }

BlochHamiltonian::BlochHamiltonian(const LatticeModel& model, double hbar)
    : model_(model), hbar_(hbar), fft_(std::make_shared<Fft>(model.grid_size())) {
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  if (model.dx() > max_grid_spacing(hbar) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "grid too coarse: dx = " << model.dx() << " exceeds sqrt(hbar)/8 = "
       << max_grid_spacing(hbar) << " at hbar = " << hbar
       << "; increase points_per_cell";
    throw ResolutionError(os.str());
  }
  kinetic_ = wavenumbers(model.grid_size(), model.dx()).array().square() * (hbar * hbar);
}

Field BlochHamiltonian::apply(const Field& psi) const {
  Field spec = fft_->forward(psi);
  spec.array() *= kinetic_.array().cast<cplx>();
  Field out = fft_->inverse(spec);
  out.array() += model_.potential().array().cast<cplx>() * psi.array();
  return out;
}

double BlochHamiltonian::kinetic_energy(const Field& psi) const {
  const Field spec = fft_->forward(psi);
  // Parseval: dx * sum |f|^2 = dx/n * sum |f^|^2
  return model_.dx() / model_.grid_size() * (kinetic_.array() * spec.array().abs2()).sum();
}

BlochSpectrum::BlochSpectrum(const BlochHamiltonian& h) : hamiltonian_(h) {
  const auto& model = h.model();
  const int n_cells = model.num_cells();
  const int m = model.points_per_cell();

  // Cell Fourier coefficients of V; V^_full[g N] = V^_cell[g].
  Fft cell_fft(m);
  Field v_cell = model.potential().head(m).cast<cplx>();
  const Field v_hat = cell_fft.forward(v_cell) / static_cast<double>(m);

  const auto& kin = h.kinetic_symbol();
  const double a = model.cell_size();
  blocks_.resize(n_cells);
  for (int j = 0; j < n_cells; ++j) {
    Eigen::MatrixXcd block(m, m);
    for (int g = 0; g < m; ++g) {
      for (int gp = 0; gp < m; ++gp) block(g, gp) = v_hat[((g - gp) % m + m) % m];
      block(g, g) += kin[j + g * n_cells];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
    if (solver.info() != Eigen::Success)
      throw SpectralError("Bloch block eigensolver did not converge");
    auto& b = blocks_[j];
    b.index = j;
    double k = 2.0 * kPi * j / model.length();
    if (k > kPi / a * (1.0 + 1e-12)) k -= 2.0 * kPi / a;
    b.quasimomentum = k;
    b.energies = solver.eigenvalues();
    b.vectors = solver.eigenvectors();
  }
}

Field BlochSpectrum::bloch_state(int j, int band) const {
  const auto& model = hamiltonian_.model();
  const int n_cells = model.num_cells();
  const int m = model.points_per_cell();
  const int n = model.grid_size();
  Field spec = Field::Zero(n);
  const auto& vec = blocks_.at(j).vectors;
  for (int g = 0; g < m; ++g) spec[j + g * n_cells] = vec(g, band);
  Field phi = hamiltonian_.fft().inverse(spec);
  phi *= std::sqrt(n / model.dx());
  return phi;
}

BandData compute_band_data(const BlochSpectrum& spectrum, const BandOptions& options) {
  const auto& model = spectrum.hamiltonian().model();
  if (options.num_bands < 2 || options.num_bands > model.points_per_cell())
    throw std::invalid_argument("num_bands must lie in [2, points_per_cell]");
  BandData band;
  band.dx = model.dx();
  band.energies.assign(options.num_bands, std::vector<double>(spectrum.num_blocks()));
  for (int j = 0; j < spectrum.num_blocks(); ++j) {
    const auto& b = spectrum.block(j);
    band.quasimomenta.push_back(b.quasimomentum);
    for (int l = 0; l < options.num_bands; ++l) band.energies[l][j] = b.energies[l];
    band.states.push_back(spectrum.bloch_state(j, 0));
  }
  band.e1_bottom = *std::min_element(band.e1().begin(), band.e1().end());
  band.e1_top = *std::max_element(band.e1().begin(), band.e1().end());
  band.e2_bottom = *std::min_element(band.e2().begin(), band.e2().end());

  const int origin = model.site_index(model.central_site());
  if (options.gauge_reference) {
    fix_bloch_gauge(band, *options.gauge_reference, origin);
  } else {
    fix_bloch_gauge(band, Field::Zero(model.grid_size()), origin);
  }

  const double scale = std::max(1.0, std::abs(band.e1_top));
  if (!options.allow_empty_gap && band.gap() <= 1e-10 * scale) {
    std::ostringstream os;
    os << "empty first gap (E2b - E1t = " << band.gap() << ") at hbar = "
       << spectrum.hamiltonian().hbar() << "; hbar too large for band separation";
    throw SpectralError(os.str());
  }
  return band;
}

void fix_bloch_gauge(BandData& band, const Field& reference, int origin_index) {
  const bool have_ref = reference.size() > 0 && reference.norm() > 0.0;
  for (auto& phi : band.states) {
    cplx overlap = have_ref ? inner(reference, phi, band.dx) : cplx{0.0};
    if (std::abs(overlap) <= 1e-12 * (have_ref ? l2_norm(reference, band.dx) : 1.0)) {
      overlap = phi[origin_index];
    }
    if (std::abs(overlap) > 0.0) phi *= std::conj(overlap) / std::abs(overlap);
  }
}

Field band_projection(const Field& psi, const BandData& band) {
  Field out = Field::Zero(psi.size());
  for (const auto& phi : band.states) out += inner(phi, psi, band.dx) * phi;
  return out;
}

std::pair<FieldState, FieldState> project_band(const FieldState& psi, const BandData& band) {
  if (psi.values.size() != (band.states.empty() ? 0 : band.states.front().size()) ||
      std::abs(psi.dx - band.dx) > 1e-15 * band.dx)
    throw std::invalid_argument("project_band: field and band data live on different grids");
  FieldState p1{psi.tau, band_projection(psi.values, band), psi.dx};
  FieldState perp{psi.tau, psi.values - p1.values, psi.dx};
  return {std::move(p1), std::move(perp)};
}

}  // namespace tbnls
