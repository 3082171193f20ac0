#pragma once

#include <string>
#include <vector>

#include "tbnls/types.hpp"

namespace tbnls {

struct PotentialSpec {
  std::string name = "sin2";  // sin2 | cos-lattice | zero
  double depth = 1.0;
};

struct PerturbationSpec {
  std::string name = "w-cos";  // w-cos | w-tanh | zero
  double amplitude = 1.0;
  double length = 1.0;  // tanh scale l
};

struct LatticeSpec {
  double cell_size = 1.0;
  int num_cells = 16;
  int points_per_cell = 256;
  PotentialSpec potential;
  PerturbationSpec perturbation;
};

/// Periodic potential V and bounded perturbation W sampled on
/// [-N a/2, N a/2) with M points per cell.
///
/// Site n is centred at x_n = -N a/2 + n a, i.e. at grid index n M; the
/// central site N/2 sits at the origin. Cell n covers the indices
/// n M - M/2 ... n M + M/2 (mod N M).
class LatticeModel {
 public:
  LatticeModel(double cell_size, int num_cells, int points_per_cell, RealField potential,
               RealField perturbation);

  /// Samples the named built-in potentials; throws std::invalid_argument.
  static LatticeModel build(const LatticeSpec& spec);

  double cell_size() const { return cell_size_; }
  int num_cells() const { return num_cells_; }
  int points_per_cell() const { return points_per_cell_; }
  int grid_size() const { return num_cells_ * points_per_cell_; }
  double dx() const { return cell_size_ / points_per_cell_; }
  double length() const { return cell_size_ * num_cells_; }
  double x(int j) const { return -0.5 * length() + j * dx(); }
  int central_site() const { return num_cells_ / 2; }
  int site_index(int site) const;
  /// Signed offset of grid index j from the centre of site n, wrapped to [-NM/2, NM/2).
  int offset_from_site(int j, int site) const;

  const RealField& potential() const { return potential_; }
  const RealField& perturbation() const { return perturbation_; }

  /// Violations of the standing assumptions on V and W (periodic, minimum
  /// zero attained only at cell centres, W bounded); empty when all hold.
  std::vector<std::string> check_hypotheses() const;

 private:
  double cell_size_;
  int num_cells_;
  int points_per_cell_;
  RealField potential_;
  RealField perturbation_;
};

enum class Regime { model1, model2, custom };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// Rescaled parameters of i h dpsi/dtau = -h^2 psi'' + V psi + F W psi + eta |psi|^2 psi.
struct SemiclassicalParams {
  double hbar = 0.1;
  double F = 0.0;
  double eta = 0.0;
  Regime regime = Regime::custom;

  void validate() const;
};

/// Fixed physical strengths: F = k_F h^2, eta = k_eta h^2.
SemiclassicalParams model1_params(double hbar, double k_F, double k_eta);
/// Strengths tied to the hopping: F = k_F beta, eta = k_eta h^{1/2} beta.
/// Needs beta, so it is resolved only after the tight-binding coefficients exist.
SemiclassicalParams model2_params(double hbar, double beta, double k_F, double k_eta);

/// Physical-units form of the equation,
///   i hbar_p dpsi/dt = -hbar_p^2/(2m) psi'' + V/eps psi + alpha1 W psi + alpha2 |psi|^2 psi.
struct PhysicalParams {
  double planck = 1.0;  // hbar_p
  double mass = 0.5;
  double epsilon = 0.01;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

struct RescaledParams {
  SemiclassicalParams params;
  /// tau = time_scale * t.
  double time_scale = 1.0;
};

/// Multiplying the physical equation by eps gives the rescaled one with
/// h = hbar_p sqrt(eps/2m), F = eps alpha1 = alpha1 2 m h^2/hbar_p^2 (same for
/// eta) and tau = eps hbar_p t / h. The time factor is derived by matching
/// the two equations rather than quoted.
RescaledParams rescale(const PhysicalParams& p);

}  // namespace tbnls
