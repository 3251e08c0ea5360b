#include "tkbd/detect.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tkbd/error.hpp"

namespace tkbd {

void CfarConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::invalid_argument, "CFAR significance must lie in (0, 1)");
  if (train_cells == 0 && train_rows == 0)
    throw Error(ErrorCode::invalid_argument, "CFAR needs at least one training cell");
  if (grid.size() == 0) throw Error(ErrorCode::invalid_argument, "CFAR bearing grid is empty");
}

void ClutterModel::validate() const {
  if (!(intensity > 0.0)) throw Error(ErrorCode::invalid_argument, "clutter intensity must be positive");
  if (!(density > 0.0)) throw Error(ErrorCode::invalid_argument, "clutter density must be positive");
  if (!(detection_prob > 0.0 && detection_prob <= 1.0))
    throw Error(ErrorCode::invalid_argument, "detection probability must lie in (0, 1]");
  if (!(bearing_var > 0.0)) throw Error(ErrorCode::invalid_argument, "bearing variance must be positive");
}

DetectionSet cfar_detect(const Eigen::MatrixXd& rows, const CfarConfig& cfg) {
  cfg.validate();
  DetectionSet out;
  if (rows.rows() == 0) return out;
  const auto cells = rows.cols();
  if (static_cast<std::size_t>(cells) != cfg.grid.size())
    throw Error(ErrorCode::dimension_mismatch, "BTR width does not match the CFAR bearing grid");

  const Eigen::Index cur = rows.rows() - 1;
  const Eigen::Index first_row =
      std::max<Eigen::Index>(0, cur - static_cast<Eigen::Index>(cfg.train_rows));
  const auto guard = static_cast<Eigen::Index>(cfg.guard_cells);
  const auto train = static_cast<Eigen::Index>(cfg.train_cells);
  const double z_alpha =
      boost::math::quantile(boost::math::complement(boost::math::normal(), cfg.alpha));

  std::vector<char> hit(static_cast<std::size_t>(cells), 0);
  std::vector<double> train_values;
  for (Eigen::Index j = 0; j < cells; ++j) {
    train_values.clear();
    for (Eigen::Index r = first_row; r <= cur; ++r) {
      for (Eigen::Index off = guard + 1; off <= guard + train; ++off) {
        if (j - off >= 0) train_values.push_back(rows(r, j - off));
        if (j + off < cells) train_values.push_back(rows(r, j + off));
      }
    }
    if (train_values.empty()) continue;
    const double count = static_cast<double>(train_values.size());
    double mean = 0.0;
    for (double v : train_values) mean += v;
    mean /= count;
    double var = 0.0;
    if (train_values.size() > 1) {
      for (double v : train_values) var += (v - mean) * (v - mean);
      var /= count - 1.0;
    }
    const double threshold = mean + z_alpha * std::sqrt(var);
    if (rows(cur, j) > threshold) hit[static_cast<std::size_t>(j)] = 1;
  }

  // Keep the peak of each contiguous run of threshold crossings.
  for (Eigen::Index j = 0; j < cells;) {
    if (!hit[static_cast<std::size_t>(j)]) {
      ++j;
      continue;
    }
    Eigen::Index best = j;
    Eigen::Index k = j;
    for (; k < cells && hit[static_cast<std::size_t>(k)]; ++k)
      if (rows(cur, k) > rows(cur, best)) best = k;
    out.bearings_deg.push_back(cfg.grid.at(static_cast<std::size_t>(best)));
    j = k;
  }
  return out;
}

CfarDetector::CfarDetector(CfarConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

DetectionSet CfarDetector::push(const Eigen::RowVectorXd& row) {
  history_.push_back(row);
  while (history_.size() > cfg_.train_rows + 1) history_.pop_front();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(history_.size()), row.size());
  for (std::size_t i = 0; i < history_.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = history_[i];
  return cfar_detect(rows, cfg_);
}

double detection_log_lr(const DetectionSet& z, double bearing_deg, const ClutterModel& clutter) {
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * clutter.bearing_var);
  double sum = 0.0;
  for (double d : z.bearings_deg) {
    const double r = d - bearing_deg;
    sum += norm * std::exp(-0.5 * r * r / clutter.bearing_var) / clutter.density;
  }
  return std::log(1.0 - clutter.detection_prob + clutter.detection_prob / clutter.intensity * sum);
}

}  // namespace tkbd
