#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tbnls {

using cplx = std::complex<double>;

/// Complex samples of a wavefunction on the periodic grid.
using Field = Eigen::VectorXcd;
/// Real samples (potentials, densities) on the periodic grid.
using RealField = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Grid too coarse for the requested semiclassical parameter.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigensolver failure, empty spectral gap, singular Gram matrix, ...
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, violated conservation guards, failed consistency identities.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// L2 inner product <a, b> = dx * sum conj(a) b.
inline cplx inner(const Field& a, const Field& b, double dx) { return dx * a.dot(b); }

inline double l2_norm(const Field& a, double dx) { return std::sqrt(dx) * a.norm(); }

}  // namespace tbnls
