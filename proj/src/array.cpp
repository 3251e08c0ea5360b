#include "tkbd/array.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tkbd/error.hpp"
#include "tkbd/fft.hpp"
#include "tkbd/kernels.hpp"

namespace tkbd {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

ArrayGeometry::ArrayGeometry(std::vector<Position> elements, double speed_of_sound,
                             double sample_rate)
    : elements_(std::move(elements)),
      speed_of_sound_(speed_of_sound),
      sample_rate_(sample_rate) {
  if (elements_.empty())
    throw Error(ErrorCode::invalid_geometry, "array needs at least one element");
  if (!(speed_of_sound_ > 0.0) || !std::isfinite(speed_of_sound_))
    throw Error(ErrorCode::invalid_geometry, "speed of sound must be positive and finite");
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw Error(ErrorCode::invalid_geometry, "sample rate must be positive and finite");
  for (const auto& p : elements_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorCode::invalid_geometry, "element positions must be finite");
}

ArrayGeometry ArrayGeometry::uniform_linear(std::size_t elements, double spacing,
                                            double speed_of_sound, double sample_rate) {
  std::vector<Position> pos(elements);
  for (std::size_t m = 0; m < elements; ++m) pos[m] = {spacing * static_cast<double>(m), 0.0};
  return ArrayGeometry(std::move(pos), speed_of_sound, sample_rate);
}

std::size_t BearingGrid::size() const {
  if (!(step > 0.0) || stop < start) return 0;
  return static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
}

std::vector<double> BearingGrid::values() const {
  std::vector<double> v(size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i);
  return v;
}

SampleBatch::SampleBatch(Eigen::MatrixXd data, std::size_t batch_index)
    : data_(std::move(data)), index_(batch_index) {
  if (data_.rows() == 0 || data_.rows() % 2 != 0)
    throw Error(ErrorCode::unsupported_batch_length,
                "batch length must be even, got " + std::to_string(data_.rows()));
  if (data_.cols() == 0)
    throw Error(ErrorCode::dimension_mismatch, "batch has no channels");
  if (!all_finite(data_))
    throw Error(ErrorCode::invalid_argument, "batch contains non-finite samples");
}

std::vector<double> steering_delays(const ArrayGeometry& geom, double bearing_deg) {
  const double ux = std::sin(bearing_deg * kDegToRad);
  const double uy = std::cos(bearing_deg * kDegToRad);
  const auto& el = geom.elements();
  std::vector<double> tau(el.size());
  for (std::size_t m = 0; m < el.size(); ++m) {
    const double dx = el[m].x - el[0].x;
    const double dy = el[m].y - el[0].y;
    tau[m] = (dx * ux + dy * uy) / geom.speed_of_sound();
  }
  return tau;
}

Complex fractional_delay_gain(std::size_t bin, std::size_t n, double delay_samples) {
  const double nn = static_cast<double>(n);
  if (2 * bin < n)
    return std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(bin) * delay_samples / nn);
  if (2 * bin == n) return {std::cos(delay_samples * std::numbers::pi), 0.0};
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(n - bin) * delay_samples / nn);
}

SteeringOperator::SteeringOperator(std::vector<std::vector<Complex>> spectra,
                                   double bearing_deg)
    : spectra_(std::move(spectra)), bearing_(bearing_deg) {}

namespace {

// Multiply the spectrum of x by g (or conj(g)) and transform back.
std::vector<double> filter_real(std::span<const double> x, const std::vector<Complex>& g,
                                bool conjugate) {
  const std::size_t n = g.size();
  if (x.size() != n)
    throw Error(ErrorCode::dimension_mismatch, "signal length does not match steering length");
  RealFft fft(n);
  std::vector<Complex> spec(fft.bins());
  fft.forward(x, spec);
  for (std::size_t k = 0; k < spec.size(); ++k)
    spec[k] *= conjugate ? std::conj(g[k]) : g[k];
  std::vector<double> out(n);
  fft.inverse(spec, out);
  return out;
}

}  // namespace

std::vector<double> SteeringOperator::delay(std::size_t channel,
                                            std::span<const double> x) const {
  return filter_real(x, spectra_.at(channel), false);
}

std::vector<double> SteeringOperator::undelay(std::size_t channel,
                                              std::span<const double> x) const {
  return filter_real(x, spectra_.at(channel), true);
}

Eigen::MatrixXd SteeringOperator::apply(std::span<const double> s) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(samples()),
                      static_cast<Eigen::Index>(channels()));
  for (std::size_t m = 0; m < channels(); ++m) {
    auto col = delay(m, s);
    out.col(static_cast<Eigen::Index>(m)) = Eigen::Map<const Eigen::VectorXd>(col.data(), col.size());
  }
  return out;
}

std::vector<double> SteeringOperator::apply_transpose(const Eigen::MatrixXd& y) const {
  if (static_cast<std::size_t>(y.rows()) != samples() ||
      static_cast<std::size_t>(y.cols()) != channels())
    throw Error(ErrorCode::dimension_mismatch, "batch shape does not match steering operator");
  std::vector<double> sum(samples(), 0.0);
  for (std::size_t m = 0; m < channels(); ++m) {
    const Eigen::VectorXd col = y.col(static_cast<Eigen::Index>(m));
    auto back = undelay(m, std::span<const double>(col.data(), col.size()));
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += back[i];
  }
  return sum;
}

SteeringOperator make_steering(const ArrayGeometry& geom, double bearing_deg,
                               std::size_t samples) {
  if (samples == 0 || samples % 2 != 0)
    throw Error(ErrorCode::unsupported_batch_length,
                "steering needs an even batch length, got " + std::to_string(samples));
  const auto tau = steering_delays(geom, bearing_deg);
  std::vector<std::vector<Complex>> spectra(tau.size(), std::vector<Complex>(samples));
  for (std::size_t m = 0; m < tau.size(); ++m) {
    const double d = tau[m] * geom.sample_rate();
    for (std::size_t k = 0; k < samples; ++k)
      spectra[m][k] = fractional_delay_gain(k, samples, d);
  }
  return SteeringOperator(std::move(spectra), bearing_deg);
}

double beamform(const SteeringOperator& op, const SampleBatch& y) {
  if (op.samples() != y.samples() || op.channels() != y.channels())
    throw Error(ErrorCode::dimension_mismatch, "batch shape does not match steering operator");
  const auto sum = op.apply_transpose(y.data());
  double e = 0.0;
  for (double v : sum) e += v * v;
  return e;
}

BatchSpectrum spectrum_of(const Eigen::MatrixXd& y) {
  const auto n = static_cast<std::size_t>(y.rows());
  RealFft fft(n);
  BatchSpectrum spec;
  spec.samples = n;
  spec.channels = static_cast<std::size_t>(y.cols());
  spec.bins.resize(spec.channels * fft.bins());
  spec.energy = y.squaredNorm();
  std::vector<double> col(n);
  for (std::size_t m = 0; m < spec.channels; ++m) {
    for (std::size_t i = 0; i < n; ++i)
      col[i] = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
    fft.forward(col, std::span<Complex>(spec.bins.data() + m * fft.bins(), fft.bins()));
  }
  return spec;
}

BatchSpectrum spectrum_of(const SampleBatch& y) { return spectrum_of(y.data()); }

double beam_energy(const BatchSpectrum& spec, const ArrayGeometry& geom,
                   double bearing_deg) {
  if (spec.channels != geom.size())
    throw Error(ErrorCode::dimension_mismatch, "spectrum channels do not match geometry");
  const std::size_t n = spec.samples;
  const std::size_t half = n / 2;
  const auto tau = steering_delays(geom, bearing_deg);

  // Split real/imaginary accumulators: std::complex products go through the
  // slow IEEE-checked path without -ffast-math.
  thread_local std::vector<double> ar, ai, pr, pi;
  ar.assign(half + 1, 0.0);
  ai.assign(half + 1, 0.0);
  pr.resize(half);
  pi.resize(half);
  for (std::size_t m = 0; m < spec.channels; ++m) {
    const double d = tau[m] * geom.sample_rate();
    const Complex* y = spec.channel(m);
    // conj(gamma^k) = exp(+2 pi i k d / N) below Nyquist.
    const double a = 2.0 * std::numbers::pi * d / static_cast<double>(n);
    const double sr = std::cos(a), si = std::sin(a);
    double cr = 1.0, ci = 0.0;
    for (std::size_t k = 0; k < half; ++k) {
      pr[k] = cr;
      pi[k] = ci;
      const double t = cr * sr - ci * si;
      ci = cr * si + ci * sr;
      cr = t;
    }
    for (std::size_t k = 0; k < half; ++k) {
      const double yr = y[k].real(), yi = y[k].imag();
      ar[k] += pr[k] * yr - pi[k] * yi;
      ai[k] += pr[k] * yi + pi[k] * yr;
    }
    const double g = std::cos(d * std::numbers::pi);
    ar[half] += g * y[half].real();
    ai[half] += g * y[half].imag();
  }
  // Parseval over the half spectrum of a real signal.
  auto norm = [&](std::size_t k) { return ar[k] * ar[k] + ai[k] * ai[k]; };
  double e = norm(0) + norm(half);
  for (std::size_t k = 1; k < half; ++k) e += 2.0 * norm(k);
  return e / static_cast<double>(n);
}

Eigen::MatrixXd btr(std::span<const SampleBatch> batches, const ArrayGeometry& geom,
                    const BearingGrid& grid, bool normalize) {
  const auto bearings = grid.values();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(batches.size()),
                      static_cast<Eigen::Index>(bearings.size()));
  if (batches.empty() || bearings.empty()) return out;
  std::vector<double> row(bearings.size());
  for (std::size_t k = 0; k < batches.size(); ++k) {
    const auto spec = spectrum_of(batches[k]);
    kernels::bearing_scan(spec, geom, bearings, row);
    for (std::size_t j = 0; j < row.size(); ++j)
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = row[j];
  }
  const double peak = out.maxCoeff();
  if (normalize && peak > 0.0) out /= peak;
  return out;
}

}  // namespace tkbd
