#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "tkbd/array.hpp"
#include "tkbd/noise.hpp"

namespace tkbd {

// Target moving along a polyline at constant speed in the array frame
// (array axis = x, broadside = +y).
struct Scenario {
  std::vector<Position> waypoints;
  double speed = 2.5;               // m/s
  double duration_s = 0.0;          // 0: time to traverse the path
  double reference_range = 200.0;   // m, range where eta_dB = 0
  double loss_exponent = 1.8;
  double dof = 12.0;                // nu of the generated data; infinity disables the chi2 scaling
  bool target_free = false;

  // Straight track from (bearing, range) to (bearing, range).
  static Scenario straight(double start_bearing_deg, double start_range_m,
                           double end_bearing_deg, double end_range_m, double speed);

  double path_length() const;
  double effective_duration() const;
  void validate() const;
};

struct ScenarioTruth {
  std::vector<double> time_s;       // batch midpoint
  std::vector<double> bearing_deg;
  std::vector<double> snr;          // linear eta; 0 when no target
  std::vector<double> range_m;

  std::size_t size() const noexcept { return bearing_deg.size(); }
  double snr_db(std::size_t k) const { return 10.0 * std::log10(snr[k]); }
  bool has_target(std::size_t k) const { return snr[k] > 0.0; }
};

// eta_dB = -10 log10((r / ref)^exponent): SNR falls with range.
double snr_db_from_range(double range_m, double reference_range, double exponent);

// Per-batch truth for batches of `samples` samples at the geometry's rate.
ScenarioTruth truth_from_path(const Scenario& scenario, const ArrayGeometry& geom,
                              std::size_t samples);

// Generates consecutive batches: continuous VAR noise stream, white target
// signal delayed to each element, one chi-square scale per batch.
class BatchGenerator {
 public:
  BatchGenerator(const VarModel& model, const ArrayGeometry& geom, std::size_t samples,
                 double dof, std::uint64_t seed);

  SampleBatch next(double bearing_deg, double snr);

  // sigma_e^2 = det(E[e e^T])^(1/M) of the noise model.
  double noise_power() const noexcept { return noise_power_; }

 private:
  ArrayGeometry geom_;
  std::size_t samples_;
  double dof_;
  double noise_power_;
  VarStream noise_;
  std::mt19937_64 rng_;
  std::size_t index_ = 0;
};

// One batch from a freshly started noise stream.
SampleBatch generate_batch(double bearing_deg, double snr, const VarModel& model, double dof,
                           const ArrayGeometry& geom, std::size_t samples, std::uint64_t seed);

struct Dataset {
  ArrayGeometry geometry;
  std::size_t batch_samples = 0;
  std::vector<SampleBatch> batches;
  ScenarioTruth truth;
};

Dataset generate_dataset(const Scenario& scenario, const ArrayGeometry& geom,
                         const VarModel& model, std::size_t samples, std::uint64_t seed);

// Stacks batches into one T x M matrix.
Eigen::MatrixXd concatenate(const std::vector<SampleBatch>& batches);

// Splits a T x M matrix into contiguous batches of `samples` rows; a trailing
// partial batch is dropped.
std::vector<SampleBatch> split_batches(const Eigen::MatrixXd& data, std::size_t samples);

// Synthetic stand-in for a learned ambient-noise model: VAR(order) fitted to a
// target-free field with spatially correlated colored background, a sector of
// weak directional colored sources and sensor self-noise.
VarModel reference_ambient_model(const ArrayGeometry& geom, std::size_t order,
                                 std::uint64_t seed);

// The field reference_ambient_model is fitted to; exposed for tests.
Eigen::MatrixXd reference_ambient_field(const ArrayGeometry& geom, std::size_t rows,
                                        std::uint64_t seed);

}  // namespace tkbd
