#include "tkbd/kernels.hpp"

#include <atomic>
#include <cstddef>
#include <exception>

#include "tkbd/error.hpp"

namespace tkbd::kernels {
namespace {

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> b{Backend::openmp};
  return b;
}

void check_sizes(std::size_t in, std::size_t out) {
  if (in != out) throw Error(ErrorCode::dimension_mismatch, "kernel output size mismatch");
}

}  // namespace

Backend default_backend() { return backend_slot().load(std::memory_order_relaxed); }
void set_default_backend(Backend b) { backend_slot().store(b, std::memory_order_relaxed); }

void bearing_scan_serial(const BatchSpectrum& spec, const ArrayGeometry& geom,
                         std::span<const double> bearings_deg, std::span<double> out) {
  check_sizes(bearings_deg.size(), out.size());
  for (std::size_t j = 0; j < bearings_deg.size(); ++j)
    out[j] = beam_energy(spec, geom, bearings_deg[j]);
}

void bearing_scan_omp(const BatchSpectrum& spec, const ArrayGeometry& geom,
                      std::span<const double> bearings_deg, std::span<double> out) {
  check_sizes(bearings_deg.size(), out.size());
  const auto n = static_cast<std::ptrdiff_t>(bearings_deg.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    try {
      out[static_cast<std::size_t>(j)] =
          beam_energy(spec, geom, bearings_deg[static_cast<std::size_t>(j)]);
    } catch (...) {
#pragma omp critical(tkbd_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void log_lr_serial(const LikelihoodEvaluator& lr, std::span<const TargetState> states,
                   std::span<double> out) {
  check_sizes(states.size(), out.size());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = lr.log_lr(states[i]);
}

void log_lr_omp(const LikelihoodEvaluator& lr, std::span<const TargetState> states,
                std::span<double> out) {
  check_sizes(states.size(), out.size());
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = lr.log_lr(states[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(tkbd_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tkbd::kernels
