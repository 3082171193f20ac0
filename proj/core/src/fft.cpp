#include "tbnls/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace tbnls {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Fft::Fft(int size) : size_(size), plans_(std::make_unique<Plans>()) {
  if (size <= 0) throw std::invalid_argument("Fft: size must be positive");
  std::lock_guard lock(planner_mutex());
  auto* in = fftw_alloc_complex(static_cast<size_t>(size));
  auto* out = fftw_alloc_complex(static_cast<size_t>(size));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft_1d(size, in, out, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft_1d(size, in, out, FFTW_BACKWARD, flags);
  fftw_free(in);
  fftw_free(out);
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
}

void Fft::forward(const Field& in, Field& out) const {
  out.resize(size_);
  Field tmp = in;  // FFTW may scribble on the input of out-of-place plans
  fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(tmp.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void Fft::inverse(const Field& in, Field& out) const {
  out.resize(size_);
  Field tmp = in;
  fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(tmp.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= static_cast<double>(size_);
}

Field Fft::forward(const Field& in) const {
  Field out;
  forward(in, out);
  return out;
}

Field Fft::inverse(const Field& in) const {
  Field out;
  inverse(in, out);
  return out;
}

RealField wavenumbers(int n, double dx) {
  RealField k(n);
  const double dk = 2.0 * kPi / (n * dx);
  for (int j = 0; j < n; ++j) {
    const int s = (j < (n + 1) / 2) ? j : j - n;
    k[j] = s * dk;
  }
  return k;
}

}  // namespace tbnls
