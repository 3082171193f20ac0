#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "tbnls/fft.hpp"
#include "tbnls/lattice.hpp"

namespace tbnls {

/// Wavefunction samples at time tau; norms use the quadrature weight dx.
struct FieldState {
  double tau = 0.0;
  Field values;
  double dx = 1.0;

  double norm() const { return l2_norm(values, dx); }
};

/// Bloch operator H_B = -h^2 d^2/dx^2 + V on the periodic grid. The kinetic
/// term is the exact Fourier multiplier h^2 k^2.
class BlochHamiltonian {
 public:
  /// Throws ResolutionError when dx > sqrt(h)/8.
  BlochHamiltonian(const LatticeModel& model, double hbar);

  const LatticeModel& model() const { return model_; }
  double hbar() const { return hbar_; }
  /// h^2 k^2 per FFT bin.
  const RealField& kinetic_symbol() const { return kinetic_; }
  const Fft& fft() const { return *fft_; }

  Field apply(const Field& psi) const;
  /// h^2 ||psi'||^2 evaluated spectrally.
  double kinetic_energy(const Field& psi) const;

 private:
  LatticeModel model_;
  double hbar_;
  RealField kinetic_;
  std::shared_ptr<const Fft> fft_;
};

/// Largest admissible grid spacing for a given h.
double max_grid_spacing(double hbar);

/// One quasimomentum block of H_B: the FFT bins j + g N (g = 0..M-1) couple
/// only among themselves because V has period a.
struct BlochBlock {
  int index = 0;           // j
  double quasimomentum;    // folded into (-pi/a, pi/a]
  RealField energies;      // ascending, all M bands
  Eigen::MatrixXcd vectors;  // columns: eigenvectors in the block's plane-wave coefficients
};

/// Full Bloch decomposition of the grid operator H_B (exact block
/// diagonalization, not an approximation of it).
class BlochSpectrum {
 public:
  explicit BlochSpectrum(const BlochHamiltonian& h);

  const BlochHamiltonian& hamiltonian() const { return hamiltonian_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const BlochBlock& block(int j) const { return blocks_[j]; }

  /// Normalized Bloch state of the given band and block on the full grid.
  Field bloch_state(int j, int band) const;

 private:
  BlochHamiltonian hamiltonian_;
  std::vector<BlochBlock> blocks_;
};

struct BandOptions {
  int num_bands = 2;
  /// Reports an empty first gap instead of rejecting it.
  bool allow_empty_gap = false;
  /// Gauge reference: each Bloch state is rotated so that <reference, phi_j> > 0.
  std::optional<Field> gauge_reference;
};

struct BandData {
  std::vector<double> quasimomenta;
  /// energies[band][j]
  std::vector<std::vector<double>> energies;
  double e1_bottom = 0.0;
  double e1_top = 0.0;
  double e2_bottom = 0.0;
  /// First-band Bloch states phi_j on the full grid.
  std::vector<Field> states;
  double dx = 1.0;

  double gap() const { return e2_bottom - e1_top; }
  const std::vector<double>& e1() const { return energies.at(0); }
  const std::vector<double>& e2() const { return energies.at(1); }
};

/// Band structure from the per-quasimomentum cell problems. Throws
/// SpectralError on an empty first gap unless allowed by the options.
BandData compute_band_data(const BlochSpectrum& spectrum, const BandOptions& options = {});

/// Rotates each Bloch state so that <reference, phi_j> is real positive; when
/// the overlap vanishes, phi_j(0) is made real positive instead.
void fix_bloch_gauge(BandData& band, const Field& reference, int origin_index);

/// psi_1 = sum_j <phi_j, psi> phi_j and psi_perp = psi - psi_1.
std::pair<FieldState, FieldState> project_band(const FieldState& psi, const BandData& band);

/// Pi psi only.
Field band_projection(const Field& psi, const BandData& band);

}  // namespace tbnls
