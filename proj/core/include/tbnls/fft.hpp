#pragma once

#include <memory>

#include "tbnls/types.hpp"

namespace tbnls {

/// One-dimensional complex FFT of fixed length backed by FFTW.
///
/// Plans are created with FFTW_ESTIMATE so that transforms are
/// bit-reproducible between runs. Execution is thread-safe; several
/// threads may share one instance.
class Fft {
 public:
  explicit Fft(int size);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const { return size_; }

  /// Unnormalized forward transform, out[k] = sum_j in[j] e^{-2 pi i jk/n}.
  void forward(const Field& in, Field& out) const;
  /// Inverse transform including the 1/n factor.
  void inverse(const Field& in, Field& out) const;

  Field forward(const Field& in) const;
  Field inverse(const Field& in) const;

 private:
  int size_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Signed angular wavenumbers of an n-point grid with spacing dx, FFT bin order.
RealField wavenumbers(int n, double dx);

}  // namespace tbnls
