#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a plain
// serial version; the serial one is the reference the tests compare against
// and the baseline in bench/.

#include <span>

#include "tkbd/array.hpp"
#include "tkbd/likelihood.hpp"

namespace tkbd::kernels {

enum class Backend { serial, openmp };

// out[j] = B(bearings[j], y).
void bearing_scan_serial(const BatchSpectrum& spec, const ArrayGeometry& geom,
                         std::span<const double> bearings_deg, std::span<double> out);
void bearing_scan_omp(const BatchSpectrum& spec, const ArrayGeometry& geom,
                      std::span<const double> bearings_deg, std::span<double> out);

// out[i] = ln L(z | states[i]).
void log_lr_serial(const LikelihoodEvaluator& lr, std::span<const TargetState> states,
                   std::span<double> out);
void log_lr_omp(const LikelihoodEvaluator& lr, std::span<const TargetState> states,
                std::span<double> out);

// Process-wide default used by the library; tests pin it to compare backends.
Backend default_backend();
void set_default_backend(Backend b);

inline void bearing_scan(const BatchSpectrum& spec, const ArrayGeometry& geom,
                         std::span<const double> bearings_deg, std::span<double> out) {
  if (default_backend() == Backend::openmp)
    bearing_scan_omp(spec, geom, bearings_deg, out);
  else
    bearing_scan_serial(spec, geom, bearings_deg, out);
}

inline void log_lr(const LikelihoodEvaluator& lr, std::span<const TargetState> states,
                   std::span<double> out) {
  if (default_backend() == Backend::openmp)
    log_lr_omp(lr, states, out);
  else
    log_lr_serial(lr, states, out);
}

}  // namespace tkbd::kernels
