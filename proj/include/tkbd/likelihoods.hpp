#pragma once

#include <cmath>
#include <memory>

#include "tkbd/array.hpp"
#include "tkbd/detect.hpp"
#include "tkbd/likelihood.hpp"
#include "tkbd/stats.hpp"

namespace tkbd {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Raw-data likelihood ratio through the delay-and-sum beamformer, on a
// whitened batch.
class BeamLikelihood final : public LikelihoodEvaluator {
 public:
  enum class Model { student_t, gaussian };

  BeamLikelihood(Model model, std::shared_ptr<const BatchSpectrum> spectrum,
                 const ArrayGeometry& geom, TModelParams params, bool informative = true);

  double log_lr(const TargetState& x) const override;
  bool informative() const override { return informative_; }
  void log_lr_grid(std::span<const double> bearings_deg, std::span<const double> snr_db,
                   std::span<double> out) const override;

  double log_lr_at(double beam_energy, double snr_linear) const;

 private:
  Model model_;
  std::shared_ptr<const BatchSpectrum> spectrum_;
  const ArrayGeometry* geom_;
  TModelParams params_;
  bool informative_;
};

// Detection-set likelihood ratio used by the CFAR reference tracker. The SNR
// component of the state does not enter.
class DetectionLikelihood final : public LikelihoodEvaluator {
 public:
  DetectionLikelihood(DetectionSet detections, ClutterModel clutter);

  double log_lr(const TargetState& x) const override;
  void log_lr_grid(std::span<const double> bearings_deg, std::span<const double> snr_db,
                   std::span<double> out) const override;

 private:
  DetectionSet detections_;
  ClutterModel clutter_;
};

// Same ln L for every state.
class ConstantLikelihood final : public LikelihoodEvaluator {
 public:
  explicit ConstantLikelihood(double log_value, bool informative = true)
      : value_(log_value), informative_(informative) {}
  double log_lr(const TargetState&) const override { return value_; }
  bool informative() const override { return informative_; }

 private:
  double value_;
  bool informative_;
};

}  // namespace tkbd
