#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tkbd/likelihood.hpp"

namespace tkbd {

struct OspaConfig {
  double cutoff = 30.0;  // rho, degrees
  double order = 1.0;    // f

  void validate() const;
};

// Single-target OSPA between an optional confirmed bearing and an optional
// true bearing. Both empty gives 0; one of them empty gives the cutoff.
double ospa_single(std::optional<double> estimate_deg, std::optional<double> truth_deg,
                   const OspaConfig& cfg = {});

// One row of a track log.
struct TrackPoint {
  std::size_t batch = 0;
  double time_s = 0.0;
  double existence = 0.0;
  std::optional<TargetState> estimate;
  bool confirmed = false;
};

using TrackLog = std::vector<TrackPoint>;

struct DetectionStats {
  std::size_t batch = 0;
  double range_m = 0.0;
  double snr_db = 0.0;
};

struct RunReport {
  std::vector<double> ospa;
  std::vector<double> existence;
  std::optional<std::size_t> first_detection;  // start of the first sustained run
  std::optional<DetectionStats> detection;
  std::size_t flips = 0;                       // gamma crossings after first_detection
  std::size_t confirmed_batches = 0;
};

struct EvalParams {
  OspaConfig ospa{};
  std::size_t sustain = 5;
  double confirm_threshold = 0.9;
};

// First index starting `sustain` consecutive confirmed batches.
std::optional<std::size_t> first_sustained(const std::vector<bool>& confirmed, std::size_t sustain);

// Number of changes in (q > threshold) between consecutive batches from `from` on.
std::size_t count_flips(std::span<const double> existence, double threshold, std::size_t from);

// truth_* are per batch; a NaN bearing or non-positive snr marks "no target".
RunReport evaluate_run(const TrackLog& log, std::span<const double> truth_bearing_deg,
                       std::span<const double> truth_snr, std::span<const double> truth_range_m,
                       const EvalParams& params = {});

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

// Median where missing values count as +infinity; nullopt if at least half are missing.
std::optional<double> median_with_missing(std::span<const std::optional<double>> values);

struct QuantileBand {
  double p10 = 0.0, p50 = 0.0, p90 = 0.0;
};

// Per-batch p10/p50/p90 across runs; every series must have the same length.
std::vector<QuantileBand> quantile_bands(std::span<const std::vector<double>> series);

}  // namespace tkbd
