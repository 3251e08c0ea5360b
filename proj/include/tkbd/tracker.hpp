#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tkbd/bernoulli_filter.hpp"
#include "tkbd/detect.hpp"
#include "tkbd/eval.hpp"
#include "tkbd/noise.hpp"
#include "tkbd/stats.hpp"

namespace tkbd {

// tvar: VAR(p) whitening, t likelihood.  tvar0: spatial-only whitening, t.
// gvar: VAR(p) whitening, Gaussian.  cfar: raw BTR -> CFAR -> detection likelihood.
enum class Variant { tvar, tvar0, gvar, cfar };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct TrackerConfig {
  Variant variant = Variant::tvar;
  FilterParams filter{};
  double likelihood_dof = 12.0;  // nu of the t likelihood
  BearingGrid grid{};            // birth field and BTR bearings
  double snr_step_db = 1.0;      // birth field SNR cell size
  CfarConfig cfar{};
  ClutterModel clutter{};
};

// Per-batch measurement data for one variant, computed once per dataset so
// that parameter sweeps do not repeat the whitening and beamforming.
struct PreparedMeasurements {
  Variant variant = Variant::tvar;
  std::size_t samples = 0;
  std::size_t channels = 0;
  double batch_period_s = 0.0;
  // Whitened spectra (TkBD variants); null for a warm-up batch.
  std::vector<std::shared_ptr<const BatchSpectrum>> spectra;
  // CFAR detections (cfar variant).
  std::vector<DetectionSet> detections;

  std::size_t size() const noexcept {
    return variant == Variant::cfar ? detections.size() : spectra.size();
  }
};

// Whitening model a variant uses: the model itself, or its spatial-only
// reduction for tvar0. Not used by cfar.
VarModel whitening_model(Variant v, const VarModel& model);

PreparedMeasurements prepare_measurements(std::span<const SampleBatch> batches,
                                          const ArrayGeometry& geom, const VarModel& model,
                                          const TrackerConfig& cfg);

// One likelihood evaluator per batch. The geometry must outlive the result.
std::vector<std::shared_ptr<const LikelihoodEvaluator>> make_evaluators(
    const PreparedMeasurements& m, const ArrayGeometry& geom, const TrackerConfig& cfg);

// Runs the Bernoulli filter over every batch. The birth field at step k comes
// from z_{k-1}; it is uniform at k = 0 and after a non-informative batch.
TrackLog run_tracker(std::span<const std::shared_ptr<const LikelihoodEvaluator>> lrs,
                     double batch_period_s, const TrackerConfig& cfg, std::uint64_t seed);

TrackLog run_tracker(const PreparedMeasurements& m, const ArrayGeometry& geom,
                     const TrackerConfig& cfg, std::uint64_t seed);

// Prior-sensitivity sweep on target-free data. TkBD variants shift a
// fixed-width SNR prior upward, cfar lowers the clutter intensity, one step at
// a time, until any run confirms a track; the last setting without a
// confirmation is returned. If the whole sweep stays clean, the setting whose
// runs came closest to confirming (largest peak q) is returned instead.
struct CalibrationSweep {
  double start_lo_db = -60.0;       // first prior lower bound
  double width_db = 10.0;           // hi - lo
  double start_intensity_db = 10.0; // first 10 log10(lambda) for cfar
  double step_db = 2.0;
  std::size_t max_steps = 40;
};

struct CalibrationStep {
  double setting_db = 0.0;          // prior lower bound, or 10 log10(lambda)
  std::size_t confirming_runs = 0;
  double peak_existence = 0.0;      // max q over all runs and batches
};

struct CalibrationResult {
  Variant variant = Variant::tvar;
  double snr_prior_lo_db = 0.0;
  double snr_prior_hi_db = 0.0;
  double clutter_intensity = 0.0;
  bool found = false;     // a false track appeared within the sweep
  bool feasible = true;   // false if even the first setting produced one
  std::vector<CalibrationStep> trace;

  // cfg with the calibrated prior or intensity applied.
  TrackerConfig apply(TrackerConfig cfg) const;
};

CalibrationResult calibrate_prior(std::span<const PreparedMeasurements> target_free,
                                  const ArrayGeometry& geom, const TrackerConfig& cfg,
                                  const CalibrationSweep& sweep, std::uint64_t seed);

}  // namespace tkbd
