#include "tkbd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tkbd/error.hpp"

namespace tkbd {

void OspaConfig::validate() const {
  if (!(cutoff > 0.0)) throw Error(ErrorCode::invalid_argument, "OSPA cutoff must be positive");
  if (!(order >= 1.0)) throw Error(ErrorCode::invalid_argument, "OSPA order must be at least 1");
}

double ospa_single(std::optional<double> estimate_deg, std::optional<double> truth_deg,
                   const OspaConfig& cfg) {
  cfg.validate();
  if (!estimate_deg && !truth_deg) return 0.0;
  if (!estimate_deg || !truth_deg) return std::pow(std::pow(cfg.cutoff, cfg.order), 1.0 / cfg.order);
  return std::min(std::abs(*estimate_deg - *truth_deg), cfg.cutoff);
}

std::optional<std::size_t> first_sustained(const std::vector<bool>& confirmed, std::size_t sustain) {
  if (sustain == 0) throw Error(ErrorCode::invalid_argument, "sustain length must be positive");
  std::size_t run = 0;
  for (std::size_t k = 0; k < confirmed.size(); ++k) {
    run = confirmed[k] ? run + 1 : 0;
    if (run == sustain) return k + 1 - sustain;
  }
  return std::nullopt;
}

std::size_t count_flips(std::span<const double> existence, double threshold, std::size_t from) {
  std::size_t flips = 0;
  for (std::size_t k = from + 1; k < existence.size(); ++k)
    if ((existence[k] > threshold) != (existence[k - 1] > threshold)) ++flips;
  return flips;
}

RunReport evaluate_run(const TrackLog& log, std::span<const double> truth_bearing_deg,
                       std::span<const double> truth_snr, std::span<const double> truth_range_m,
                       const EvalParams& params) {
  if (truth_bearing_deg.size() != log.size() || truth_snr.size() != log.size() ||
      truth_range_m.size() != log.size())
    throw Error(ErrorCode::dimension_mismatch, "track log and truth have different lengths");
  RunReport rep;
  std::vector<bool> confirmed(log.size());
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& pt = log[k];
    if (pt.batch != k) throw Error(ErrorCode::format, "track log is not indexed 0..K-1");
    confirmed[k] = pt.confirmed;
    rep.existence.push_back(pt.existence);
    if (pt.confirmed) ++rep.confirmed_batches;
    std::optional<double> est, truth;
    if (pt.confirmed && pt.estimate) est = pt.estimate->bearing_deg;
    if (truth_snr[k] > 0.0 && std::isfinite(truth_bearing_deg[k])) truth = truth_bearing_deg[k];
    rep.ospa.push_back(ospa_single(est, truth, params.ospa));
  }
  rep.first_detection = first_sustained(confirmed, params.sustain);
  if (rep.first_detection) {
    const std::size_t k = *rep.first_detection;
    rep.flips = count_flips(rep.existence, params.confirm_threshold, k);
    if (truth_snr[k] > 0.0)
      rep.detection = DetectionStats{k, truth_range_m[k], 10.0 * std::log10(truth_snr[k])};
  }
  return rep;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::insufficient_data, "quantile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::invalid_argument, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double f = pos - static_cast<double>(lo);
  if (f == 0.0) return values[lo];
  return values[lo] + f * (values[hi] - values[lo]);
}

std::optional<double> median_with_missing(std::span<const std::optional<double>> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> v;
  for (const auto& x : values) v.push_back(x ? *x : std::numeric_limits<double>::infinity());
  const double m = quantile(std::move(v), 0.5);
  if (!std::isfinite(m)) return std::nullopt;
  return m;
}

std::vector<QuantileBand> quantile_bands(std::span<const std::vector<double>> series) {
  if (series.empty()) return {};
  const std::size_t len = series.front().size();
  for (const auto& s : series)
    if (s.size() != len) throw Error(ErrorCode::dimension_mismatch, "runs have different lengths");
  std::vector<QuantileBand> out(len);
  std::vector<double> col(series.size());
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t r = 0; r < series.size(); ++r) col[r] = series[r][k];
    out[k] = {quantile(col, 0.1), quantile(col, 0.5), quantile(col, 0.9)};
  }
  return out;
}

}  // namespace tkbd
