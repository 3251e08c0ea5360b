#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace tkbd {

// Real-to-complex FFT of a fixed even length, backed by FFTW.
// Plans are shared per length; execute() is safe from many threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  // Unnormalized forward transform, X[k] = sum_n x[n] exp(-2 pi i k n / N),
  // for k = 0..N/2.
  void forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;

  // Inverse of forward(), including the 1/N factor.
  void inverse(std::span<const std::complex<double>> in,
               std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace tkbd
