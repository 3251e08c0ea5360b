#include "tkbd/likelihoods.hpp"

#include <vector>

#include "tkbd/error.hpp"
#include "tkbd/kernels.hpp"

namespace tkbd {

void LikelihoodEvaluator::log_lr_grid(std::span<const double> bearings_deg,
                                      std::span<const double> snr_db,
                                      std::span<double> out) const {
  if (out.size() != bearings_deg.size() * snr_db.size())
    throw Error(ErrorCode::dimension_mismatch, "grid output has the wrong size");
  for (std::size_t i = 0; i < bearings_deg.size(); ++i)
    for (std::size_t j = 0; j < snr_db.size(); ++j)
      out[i * snr_db.size() + j] = log_lr({bearings_deg[i], 0.0, snr_db[j]});
}

BeamLikelihood::BeamLikelihood(Model model, std::shared_ptr<const BatchSpectrum> spectrum,
                               const ArrayGeometry& geom, TModelParams params, bool informative)
    : model_(model),
      spectrum_(std::move(spectrum)),
      geom_(&geom),
      params_(params),
      informative_(informative) {
  if (!spectrum_) throw Error(ErrorCode::invalid_argument, "beam likelihood needs a spectrum");
  if (spectrum_->channels != geom.size() || spectrum_->channels != params_.channels ||
      spectrum_->samples != params_.samples)
    throw Error(ErrorCode::dimension_mismatch, "spectrum shape does not match the t-model parameters");
}

double BeamLikelihood::log_lr_at(double beam_energy, double snr_linear) const {
  const LikelihoodInputs in{spectrum_->energy, beam_energy, snr_linear};
  return model_ == Model::student_t ? t_log_lr(in, params_)
                                    : gauss_log_lr(in, params_.samples, params_.channels);
}

double BeamLikelihood::log_lr(const TargetState& x) const {
  return log_lr_at(beam_energy(*spectrum_, *geom_, x.bearing_deg), db_to_linear(x.snr_db));
}

void BeamLikelihood::log_lr_grid(std::span<const double> bearings_deg,
                                 std::span<const double> snr_db, std::span<double> out) const {
  if (out.size() != bearings_deg.size() * snr_db.size())
    throw Error(ErrorCode::dimension_mismatch, "grid output has the wrong size");
  // B(psi, z) does not depend on eta: one beam per bearing.
  std::vector<double> beams(bearings_deg.size());
  kernels::bearing_scan(*spectrum_, *geom_, bearings_deg, beams);
  std::vector<double> eta(snr_db.size());
  for (std::size_t j = 0; j < eta.size(); ++j) eta[j] = db_to_linear(snr_db[j]);
  for (std::size_t i = 0; i < beams.size(); ++i)
    for (std::size_t j = 0; j < eta.size(); ++j)
      out[i * eta.size() + j] = log_lr_at(beams[i], eta[j]);
}

DetectionLikelihood::DetectionLikelihood(DetectionSet detections, ClutterModel clutter)
    : detections_(std::move(detections)), clutter_(clutter) {
  clutter_.validate();
}

double DetectionLikelihood::log_lr(const TargetState& x) const {
  return detection_log_lr(detections_, x.bearing_deg, clutter_);
}

void DetectionLikelihood::log_lr_grid(std::span<const double> bearings_deg,
                                      std::span<const double> snr_db,
                                      std::span<double> out) const {
  if (out.size() != bearings_deg.size() * snr_db.size())
    throw Error(ErrorCode::dimension_mismatch, "grid output has the wrong size");
  for (std::size_t i = 0; i < bearings_deg.size(); ++i) {
    const double v = detection_log_lr(detections_, bearings_deg[i], clutter_);
    for (std::size_t j = 0; j < snr_db.size(); ++j) out[i * snr_db.size() + j] = v;
  }
}

}  // namespace tkbd
