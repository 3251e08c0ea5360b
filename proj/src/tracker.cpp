#include "tkbd/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "tkbd/error.hpp"
#include "tkbd/kernels.hpp"
#include "tkbd/likelihoods.hpp"
#include "tkbd/rng.hpp"

namespace tkbd {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::tvar: return "tvar";
    case Variant::tvar0: return "tvar0";
    case Variant::gvar: return "gvar";
    case Variant::cfar: return "cfar";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::tvar, Variant::tvar0, Variant::gvar, Variant::cfar})
    if (name == to_string(v)) return v;
  throw Error(ErrorCode::config, "unknown tracker variant '" + std::string(name) + "'");
}

VarModel whitening_model(Variant v, const VarModel& model) {
  if (v == Variant::tvar0 && model.order() > 0) return spatial_only(model);
  return model;
}

PreparedMeasurements prepare_measurements(std::span<const SampleBatch> batches,
                                          const ArrayGeometry& geom, const VarModel& model,
                                          const TrackerConfig& cfg) {
  PreparedMeasurements m;
  m.variant = cfg.variant;
  m.batch_period_s = batches.empty()
                         ? 0.0
                         : static_cast<double>(batches.front().samples()) / geom.sample_rate();
  if (!batches.empty()) {
    m.samples = batches.front().samples();
    m.channels = batches.front().channels();
  }
  for (const auto& b : batches)
    if (b.samples() != m.samples || b.channels() != m.channels)
      throw Error(ErrorCode::dimension_mismatch, "batches differ in shape");
  if (m.channels != 0 && m.channels != geom.size())
    throw Error(ErrorCode::dimension_mismatch, "batch channels do not match the array");

  if (cfg.variant == Variant::cfar) {
    // Raw data: the CFAR normalization is the noise compensation.
    CfarConfig cc = cfg.cfar;
    cc.grid = cfg.grid;
    CfarDetector det(cc);
    const auto bearings = cfg.grid.values();
    std::vector<double> row(bearings.size());
    for (const auto& b : batches) {
      const auto spec = spectrum_of(b);
      kernels::bearing_scan(spec, geom, bearings, row);
      m.detections.push_back(det.push(Eigen::Map<const Eigen::RowVectorXd>(
          row.data(), static_cast<Eigen::Index>(row.size()))));
    }
    return m;
  }

  if (model.channels() != geom.size())
    throw Error(ErrorCode::dimension_mismatch, "noise model channels do not match the array");
  const VarModel w = whitening_model(cfg.variant, model);
  WhitenState state(w);
  Eigen::MatrixXd white;
  for (const auto& b : batches) {
    const std::size_t warm = whiten_block(w, state, b.data(), white);
    if (warm > 0)
      m.spectra.push_back(nullptr);
    else
      m.spectra.push_back(std::make_shared<const BatchSpectrum>(spectrum_of(white)));
  }
  return m;
}

std::vector<std::shared_ptr<const LikelihoodEvaluator>> make_evaluators(
    const PreparedMeasurements& m, const ArrayGeometry& geom, const TrackerConfig& cfg) {
  std::vector<std::shared_ptr<const LikelihoodEvaluator>> out;
  out.reserve(m.size());
  if (m.variant == Variant::cfar) {
    for (const auto& z : m.detections)
      out.push_back(std::make_shared<const DetectionLikelihood>(z, cfg.clutter));
    return out;
  }
  const TModelParams tp{cfg.likelihood_dof, m.samples, m.channels};
  tp.validate();
  const auto model = m.variant == Variant::gvar ? BeamLikelihood::Model::gaussian
                                                : BeamLikelihood::Model::student_t;
  for (const auto& s : m.spectra) {
    if (s)
      out.push_back(std::make_shared<const BeamLikelihood>(model, s, geom, tp));
    else
      out.push_back(std::make_shared<const ConstantLikelihood>(0.0, false));
  }
  return out;
}

TrackLog run_tracker(std::span<const std::shared_ptr<const LikelihoodEvaluator>> lrs,
                     double batch_period_s, const TrackerConfig& cfg, std::uint64_t seed) {
  cfg.filter.validate();
  const auto& fp = cfg.filter;
  std::mt19937_64 rng(seed);
  BernoulliBelief belief;
  LikelihoodField birth =
      LikelihoodField::uniform(cfg.grid, fp.snr_prior_lo_db, fp.snr_prior_hi_db, cfg.snr_step_db);
  TrackLog log;
  log.reserve(lrs.size());
  for (std::size_t k = 0; k < lrs.size(); ++k) {
    predict(belief, fp, birth, rng);
    update(belief, *lrs[k], fp, rng);
    TrackPoint pt;
    pt.batch = k;
    pt.time_s = (static_cast<double>(k) + 0.5) * batch_period_s;
    pt.existence = belief.existence;
    if (auto e = extract(belief, fp)) {
      pt.estimate = e->state;
      pt.confirmed = e->confirmed;
    }
    log.push_back(pt);
    birth = LikelihoodField::from(lrs[k], cfg.grid, fp.snr_prior_lo_db, fp.snr_prior_hi_db,
                                  cfg.snr_step_db);
  }
  return log;
}

TrackLog run_tracker(const PreparedMeasurements& m, const ArrayGeometry& geom,
                     const TrackerConfig& cfg, std::uint64_t seed) {
  const auto lrs = make_evaluators(m, geom, cfg);
  return run_tracker(lrs, m.batch_period_s, cfg, seed);
}

TrackerConfig CalibrationResult::apply(TrackerConfig cfg) const {
  if (variant == Variant::cfar) {
    cfg.clutter.intensity = clutter_intensity;
  } else {
    cfg.filter.snr_prior_lo_db = snr_prior_lo_db;
    cfg.filter.snr_prior_hi_db = snr_prior_hi_db;
  }
  return cfg;
}

CalibrationResult calibrate_prior(std::span<const PreparedMeasurements> target_free,
                                  const ArrayGeometry& geom, const TrackerConfig& cfg,
                                  const CalibrationSweep& sweep, std::uint64_t seed) {
  if (target_free.empty()) throw Error(ErrorCode::insufficient_data, "calibration needs at least one dataset");
  if (!(sweep.step_db > 0.0) || !(sweep.width_db > 0.0) || sweep.max_steps == 0)
    throw Error(ErrorCode::invalid_argument, "calibration sweep needs positive step, width and step count");
  for (const auto& m : target_free)
    if (m.variant != cfg.variant)
      throw Error(ErrorCode::invalid_argument, "calibration data prepared for another variant");

  CalibrationResult res;
  res.variant = cfg.variant;
  const bool cfar = cfg.variant == Variant::cfar;
  auto setting_at = [&](std::size_t i) {
    const double d = sweep.step_db * static_cast<double>(i);
    return cfar ? sweep.start_intensity_db - d : sweep.start_lo_db + d;
  };
  auto configure = [&](double setting) {
    TrackerConfig c = cfg;
    if (cfar) {
      c.clutter.intensity = std::pow(10.0, setting / 10.0);
    } else {
      c.filter.snr_prior_lo_db = setting;
      c.filter.snr_prior_hi_db = setting + sweep.width_db;
    }
    return c;
  };

  std::optional<double> last_clean;
  double best_peak = -1.0, most_sensitive = setting_at(0);
  for (std::size_t i = 0; i < sweep.max_steps; ++i) {
    const double setting = setting_at(i);
    const TrackerConfig c = configure(setting);
    CalibrationStep step{setting, 0};
    for (std::size_t r = 0; r < target_free.size(); ++r) {
      const auto log = run_tracker(target_free[r], geom, c, derive_seed(seed, {stream::tracker, i, r}));
      bool confirmed = false;
      for (const auto& pt : log) {
        confirmed = confirmed || pt.confirmed;
        step.peak_existence = std::max(step.peak_existence, pt.existence);
      }
      if (confirmed) ++step.confirming_runs;
    }
    res.trace.push_back(step);
    if (step.confirming_runs > 0) {
      res.found = true;
      break;
    }
    last_clean = setting;
    if (step.peak_existence >= best_peak) {
      best_peak = step.peak_existence;
      most_sensitive = setting;
    }
  }
  res.feasible = last_clean.has_value();
  const double chosen = res.found ? last_clean.value_or(setting_at(0)) : most_sensitive;
  const TrackerConfig c = configure(chosen);
  res.snr_prior_lo_db = c.filter.snr_prior_lo_db;
  res.snr_prior_hi_db = c.filter.snr_prior_hi_db;
  res.clutter_intensity = c.clutter.intensity;
  return res;
}

}  // namespace tkbd
