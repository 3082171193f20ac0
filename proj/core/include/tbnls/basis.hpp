#pragma once

#include <string>
#include <vector>

#include "tbnls/spectral.hpp"

namespace tbnls {

/// Ground state of -h^2 d^2/dx^2 + V_n, where V_n keeps the n-th well of V
/// and fills every other cell up to the barrier top max V.
struct SingleWellProblem {
  int site = 0;
  RealField filled_potential;  // V_n on the full grid
  double ground_energy = 0.0;  // Lambda_1
  Field ground_state;          // real, positive, normalized
  std::vector<std::string> warnings;
};

struct SingleWellOptions {
  /// The eigenproblem is solved on a periodic window of this many cells
  /// centred on the site (capped at N); the state is zero outside it.
  int window_cells = 6;
};

/// V_n on the full grid.
RealField filled_potential(const LatticeModel& model, int site);

SingleWellProblem build_single_well(const LatticeModel& model, double hbar, int site,
                                    const SingleWellOptions& options = {});

/// Copy of a well problem moved to another site by an exact grid shift.
SingleWellProblem translate_well(const SingleWellProblem& well, const LatticeModel& model,
                                 int site);

struct LocalizedBasis {
  std::vector<Field> functions;  // u_n, n = 0..N-1
  double dx = 1.0;
  double gram_residual = 0.0;   // max |<u_n,u_m> - delta_nm|
  double band_residual = 0.0;   // max ||Pi u_n - u_n||
  double gram_condition = 1.0;  // condition number of the projected-state Gram matrix
  double well_distance = 0.0;   // ||u_c - psi_c|| at the central site

  int size() const { return static_cast<int>(functions.size()); }
};

/// v_n = Pi psi_n followed by symmetric (Loewdin) orthonormalization.
/// Throws SpectralError when the projected states are (numerically) dependent.
LocalizedBasis construct_basis(const BandData& band, const std::vector<SingleWellProblem>& wells);

struct TightBindingCoefficients {
  double lambda1 = 0.0;
  double beta = 0.0;
  double c1 = 0.0;
  double s0 = 0.0;
  std::vector<double> chi;      // <u_n, W u_n>
  Eigen::MatrixXcd hamiltonian;  // <u_n, H_B u_m>
  Eigen::MatrixXcd residual;     // D~ = H - Lambda_1 I + beta (nearest-neighbour shifts)
  Eigen::MatrixXcd perturbation;  // <u_n, W u_m>

  /// max_n sum_m |D~_nm|, an l2 -> l2 bound on D~.
  double residual_bound() const;
};

/// Matrix elements of H_B and W in the localized basis. beta = -<u_c, H_B u_{c+1}>
/// at the central site c; a non-positive beta triggers one sign re-fix of the
/// basis, then SpectralError.
TightBindingCoefficients extract_coefficients(LocalizedBasis& basis, const BlochHamiltonian& h,
                                              double lambda1);

/// S_0 = integral of sqrt(V - V_min) between neighbouring well bottoms
/// (composite Simpson on the grid samples).
double agmon_distance(const LatticeModel& model);

/// Everything the reduction needs at one value of h.
struct ReductionSetup {
  LatticeModel model;
  double hbar;
  BlochHamiltonian hamiltonian;
  BlochSpectrum spectrum;
  BandData band;
  SingleWellProblem well;  // central site
  LocalizedBasis basis;
  TightBindingCoefficients coefficients;
};

ReductionSetup prepare_reduction(const LatticeModel& model, double hbar,
                                 const SingleWellOptions& options = {});

}  // namespace tbnls
