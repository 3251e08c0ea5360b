#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <deque>
#include <vector>

#include "tkbd/array.hpp"

namespace tkbd {

// Cell-averaging CFAR over a bearing-time record.
struct CfarConfig {
  std::size_t guard_cells = 2;   // per side, in bearing
  std::size_t train_cells = 16;  // per side, in bearing
  std::size_t train_rows = 10;   // past BTR rows that also contribute training cells
  double alpha = 1e-3;           // per-cell false-alarm significance
  BearingGrid grid{};

  void validate() const;
};

struct DetectionSet {
  std::vector<double> bearings_deg;
};

// Poisson clutter, uniform over the beamforming interval, and a Gaussian
// bearing likelihood for the target-originated detection.
struct ClutterModel {
  double intensity = 0.2;            // lambda, expected false detections per batch
  double density = 1.0 / 180.0;      // kappa, per degree
  double detection_prob = 0.9;       // p_d
  double bearing_var = 4.0;          // R, degrees^2

  void validate() const;
};

// Detect on the last row of `rows` (time x bearing); earlier rows are history.
DetectionSet cfar_detect(const Eigen::MatrixXd& rows, const CfarConfig& cfg);

// Streaming wrapper that keeps the last train_rows rows.
class CfarDetector {
 public:
  explicit CfarDetector(CfarConfig cfg);

  DetectionSet push(const Eigen::RowVectorXd& row);
  const CfarConfig& config() const noexcept { return cfg_; }

 private:
  CfarConfig cfg_;
  std::deque<Eigen::RowVectorXd> history_;
};

// ln(1 - p_d + (p_d / lambda) sum_d N(psi_d; psi, R) / kappa).
double detection_log_lr(const DetectionSet& z, double bearing_deg, const ClutterModel& clutter);

}  // namespace tkbd
