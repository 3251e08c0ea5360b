#include "tkbd/sim.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

#include "tkbd/error.hpp"
#include "tkbd/fft.hpp"
#include "tkbd/rng.hpp"

namespace tkbd {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Position point_along(const std::vector<Position>& path, double distance) {
  if (path.size() == 1) return path.front();
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double dx = path[i + 1].x - path[i].x, dy = path[i + 1].y - path[i].y;
    const double len = std::hypot(dx, dy);
    if (distance <= len || i + 2 == path.size()) {
      const double f = len > 0.0 ? std::min(distance / len, 1.0) : 0.0;
      return {path[i].x + f * dx, path[i].y + f * dy};
    }
    distance -= len;
  }
  return path.back();
}

}  // namespace

Scenario Scenario::straight(double start_bearing_deg, double start_range_m,
                            double end_bearing_deg, double end_range_m, double speed) {
  Scenario s;
  s.waypoints = {{start_range_m * std::sin(start_bearing_deg * kDeg),
                  start_range_m * std::cos(start_bearing_deg * kDeg)},
                 {end_range_m * std::sin(end_bearing_deg * kDeg),
                  end_range_m * std::cos(end_bearing_deg * kDeg)}};
  s.speed = speed;
  return s;
}

double Scenario::path_length() const {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
    len += std::hypot(waypoints[i + 1].x - waypoints[i].x, waypoints[i + 1].y - waypoints[i].y);
  return len;
}

double Scenario::effective_duration() const {
  if (duration_s > 0.0) return duration_s;
  return speed > 0.0 ? path_length() / speed : 0.0;
}

void Scenario::validate() const {
  if (waypoints.empty() && !target_free)
    throw Error(ErrorCode::invalid_argument, "scenario with a target needs waypoints");
  if (!(speed > 0.0)) throw Error(ErrorCode::invalid_argument, "target speed must be positive");
  if (!(duration_s >= 0.0)) throw Error(ErrorCode::invalid_argument, "duration must be non-negative");
  if (!(reference_range > 0.0)) throw Error(ErrorCode::invalid_argument, "reference range must be positive");
  if (!(dof > 2.0)) throw Error(ErrorCode::invalid_argument, "generation dof must exceed 2");
}

double snr_db_from_range(double range_m, double reference_range, double exponent) {
  return -10.0 * exponent * std::log10(range_m / reference_range);
}

ScenarioTruth truth_from_path(const Scenario& scenario, const ArrayGeometry& geom,
                              std::size_t samples) {
  scenario.validate();
  if (samples == 0) throw Error(ErrorCode::unsupported_batch_length, "batch length must be positive");
  const double batch_s = static_cast<double>(samples) / geom.sample_rate();
  const auto count = static_cast<std::size_t>(std::floor(scenario.effective_duration() / batch_s + 1e-9));
  ScenarioTruth truth;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < count; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * batch_s;
    truth.time_s.push_back(t);
    if (scenario.target_free || scenario.waypoints.empty()) {
      truth.bearing_deg.push_back(nan);
      truth.range_m.push_back(nan);
      truth.snr.push_back(0.0);
      continue;
    }
    const Position p = point_along(scenario.waypoints, scenario.speed * t);
    const double r = std::hypot(p.x, p.y);
    if (!(r > 0.0)) throw Error(ErrorCode::undefined_bearing, "target at the array origin has no bearing");
    truth.bearing_deg.push_back(std::atan2(p.x, p.y) / kDeg);
    truth.range_m.push_back(r);
    truth.snr.push_back(
        std::pow(10.0, snr_db_from_range(r, scenario.reference_range, scenario.loss_exponent) / 10.0));
  }
  return truth;
}

BatchGenerator::BatchGenerator(const VarModel& model, const ArrayGeometry& geom,
                               std::size_t samples, double dof, std::uint64_t seed)
    : geom_(geom),
      samples_(samples),
      dof_(dof),
      noise_power_(0.0),
      noise_(model, derive_seed(seed, {stream::noise})),
      rng_(derive_seed(seed, {stream::signal})) {
  if (model.channels() != geom.size())
    throw Error(ErrorCode::dimension_mismatch, "noise model channels do not match the array");
  if (samples == 0 || samples % 2 != 0)
    throw Error(ErrorCode::unsupported_batch_length, "batch length must be even");
  if (!(dof > 2.0)) throw Error(ErrorCode::invalid_argument, "generation dof must exceed 2");
  // det^(1/M) through the Cholesky factor to stay clear of under/overflow.
  const Eigen::LLT<Eigen::MatrixXd> llt(stationary_covariance(model));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::not_positive_definite, "stationary noise covariance is not positive definite");
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  noise_power_ = std::exp(2.0 * diag.array().log().sum() / static_cast<double>(model.channels()));
}

SampleBatch BatchGenerator::next(double bearing_deg, double snr) {
  Eigen::MatrixXd y = noise_.next(samples_);
  if (snr > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(snr * noise_power_));
    std::vector<double> s(samples_);
    for (auto& v : s) v = normal(rng_);
    y += make_steering(geom_, bearing_deg, samples_).apply(s);
  }
  if (std::isfinite(dof_)) {
    const double c = std::chi_squared_distribution<double>(dof_)(rng_);
    y *= std::sqrt(dof_ / c);
  }
  return SampleBatch(std::move(y), index_++);
}

SampleBatch generate_batch(double bearing_deg, double snr, const VarModel& model, double dof,
                           const ArrayGeometry& geom, std::size_t samples, std::uint64_t seed) {
  BatchGenerator gen(model, geom, samples, dof, seed);
  return gen.next(bearing_deg, snr);
}

Dataset generate_dataset(const Scenario& scenario, const ArrayGeometry& geom,
                         const VarModel& model, std::size_t samples, std::uint64_t seed) {
  Dataset ds{geom, samples, {}, truth_from_path(scenario, geom, samples)};
  if (ds.truth.size() == 0) return ds;
  BatchGenerator gen(model, geom, samples, scenario.dof, seed);
  ds.batches.reserve(ds.truth.size());
  for (std::size_t k = 0; k < ds.truth.size(); ++k)
    ds.batches.push_back(gen.next(ds.truth.bearing_deg[k], ds.truth.snr[k]));
  return ds;
}

Eigen::MatrixXd concatenate(const std::vector<SampleBatch>& batches) {
  if (batches.empty()) return {};
  const auto n = static_cast<Eigen::Index>(batches.front().samples());
  const auto m = static_cast<Eigen::Index>(batches.front().channels());
  Eigen::MatrixXd out(n * static_cast<Eigen::Index>(batches.size()), m);
  for (std::size_t k = 0; k < batches.size(); ++k)
    out.middleRows(static_cast<Eigen::Index>(k) * n, n) = batches[k].data();
  return out;
}

std::vector<SampleBatch> split_batches(const Eigen::MatrixXd& data, std::size_t samples) {
  if (samples == 0 || samples % 2 != 0)
    throw Error(ErrorCode::unsupported_batch_length, "batch length must be even");
  const auto n = static_cast<Eigen::Index>(samples);
  std::vector<SampleBatch> out;
  for (Eigen::Index k = 0; (k + 1) * n <= data.rows(); ++k)
    out.emplace_back(data.middleRows(k * n, n), static_cast<std::size_t>(k));
  return out;
}

// ---- reference ambient model ------------------------------------------------

namespace {

// AR(2) resonance with poles at radius r, angle theta; unit sample variance.
Eigen::VectorXd colored_source(std::size_t rows, double r, double theta, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a1 = 2.0 * r * std::cos(theta), a2 = -r * r;
  const std::size_t skip = 2000;
  Eigen::VectorXd x(static_cast<Eigen::Index>(rows));
  double x1 = 0.0, x2 = 0.0;
  for (std::size_t n = 0; n < rows + skip; ++n) {
    const double v = a1 * x1 + a2 * x2 + normal(rng);
    x2 = x1;
    x1 = v;
    if (n >= skip) x[static_cast<Eigen::Index>(n - skip)] = v;
  }
  const double sd = std::sqrt(x.squaredNorm() / static_cast<double>(rows));
  return x / sd;
}

// Delay a long record to every element with the circular fractional-delay filter.
Eigen::MatrixXd plane_wave(const Eigen::VectorXd& src, const ArrayGeometry& geom, double bearing_deg) {
  const auto n = static_cast<std::size_t>(src.size());
  RealFft fft(n);
  std::vector<Complex> spec(fft.bins()), shifted(fft.bins());
  fft.forward(std::span<const double>(src.data(), n), spec);
  const auto tau = steering_delays(geom, bearing_deg);
  Eigen::MatrixXd out(src.size(), static_cast<Eigen::Index>(geom.size()));
  std::vector<double> col(n);
  for (std::size_t m = 0; m < geom.size(); ++m) {
    const double d = tau[m] * geom.sample_rate();
    for (std::size_t k = 0; k < spec.size(); ++k) shifted[k] = spec[k] * fractional_delay_gain(k, n, d);
    fft.inverse(shifted, col);
    out.col(static_cast<Eigen::Index>(m)) = Eigen::Map<const Eigen::VectorXd>(col.data(), src.size());
  }
  return out;
}

}  // namespace

Eigen::MatrixXd reference_ambient_field(const ArrayGeometry& geom, std::size_t rows,
                                        std::uint64_t seed) {
  if (rows == 0 || rows % 2 != 0)
    throw Error(ErrorCode::invalid_argument, "ambient field length must be even and positive");
  std::mt19937_64 rng(seed);
  const auto m = static_cast<Eigen::Index>(geom.size());
  const auto t = static_cast<Eigen::Index>(rows);

  // Background: resonant colored noise with exponentially decaying coherence
  // between neighbouring elements.
  Eigen::MatrixXd coherence(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) coherence(i, j) = std::pow(0.5, std::abs(i - j));
  const Eigen::MatrixXd mix = Eigen::LLT<Eigen::MatrixXd>(coherence).matrixL();
  Eigen::MatrixXd background(t, m);
  for (Eigen::Index j = 0; j < m; ++j)
    background.col(j) = colored_source(rows, 0.5, 0.3 * std::numbers::pi, rng);
  Eigen::MatrixXd field = background * mix.transpose();

  // Distant shipping: a sector of weak independent sources, so no single
  // bearing stands out as a point target.
  const int sector = 9;
  for (int i = 0; i < sector; ++i) {
    const double bearing = -80.0 + 5.0 * i;
    const double theta = (0.08 + 0.04 * i) * std::numbers::pi;
    field += std::sqrt(0.5 / sector) * plane_wave(colored_source(rows, 0.6, theta, rng), geom, bearing);
  }

  std::normal_distribution<double> normal(0.0, std::sqrt(0.1));
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < m; ++j) field(i, j) += normal(rng);
  return field;
}

VarModel reference_ambient_model(const ArrayGeometry& geom, std::size_t order,
                                 std::uint64_t seed) {
  const auto field = reference_ambient_field(geom, 40000, seed);
  auto model = fit_var(field, static_cast<int>(order));
  if (!model.is_stable())
    throw Error(ErrorCode::unstable_model, "reference ambient fit produced an unstable model");
  return model;
}

}  // namespace tkbd
