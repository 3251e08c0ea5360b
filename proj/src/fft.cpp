#include "tkbd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "tkbd/error.hpp"

namespace tkbd {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(n / 2 + 1);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_r2c_1d(len, real.data(), cplx.data(), flags),
             fftw_plan_dft_c2r_1d(len, cplx.data(), real.data(), flags)};
  if (p.forward == nullptr || p.inverse == nullptr)
    throw Error(ErrorCode::invalid_argument, "FFTW planning failed");
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0 || n % 2 != 0)
    throw Error(ErrorCode::unsupported_batch_length,
                "FFT length must be even and positive, got " + std::to_string(n));
  auto p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins())
    throw Error(ErrorCode::dimension_mismatch, "RealFft::forward size mismatch");
  // r2c leaves the input untouched for 1-D transforms.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_),
                       const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_)
    throw Error(ErrorCode::dimension_mismatch, "RealFft::inverse size mismatch");
  // c2r overwrites its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : out) v *= scale;
}

}  // namespace tkbd
