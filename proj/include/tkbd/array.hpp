#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tkbd {

using Complex = std::complex<double>;

struct Position {
  double x = 0.0;  // meters, along the array axis
  double y = 0.0;  // meters, towards broadside
};

// Hydrophone layout plus the propagation and sampling constants needed to
// turn a bearing into per-element delays.
class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<Position> elements, double speed_of_sound,
                double sample_rate);

  // M elements on the x axis at x = m * spacing.
  static ArrayGeometry uniform_linear(std::size_t elements, double spacing,
                                      double speed_of_sound, double sample_rate);

  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<Position>& elements() const noexcept { return elements_; }
  double speed_of_sound() const noexcept { return speed_of_sound_; }
  double sample_rate() const noexcept { return sample_rate_; }

 private:
  std::vector<Position> elements_;
  double speed_of_sound_;
  double sample_rate_;
};

// Bearings in degrees, start + i * step for i in [0, size).
struct BearingGrid {
  double start = -90.0;
  double stop = 90.0;
  double step = 1.0;

  std::size_t size() const;
  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  std::vector<double> values() const;
};

// One batch of N samples from M hydrophones, stored N x M (column = channel).
class SampleBatch {
 public:
  SampleBatch(Eigen::MatrixXd data, std::size_t batch_index);

  std::size_t samples() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  std::size_t index() const noexcept { return index_; }
  const Eigen::MatrixXd& data() const noexcept { return data_; }

 private:
  Eigen::MatrixXd data_;
  std::size_t index_;
};

// Plane-wave delay of each element relative to element 0, in seconds:
// tau_m = ((p_m - p_0) . u(psi)) / c with u(psi) = (sin psi, cos psi).
std::vector<double> steering_delays(const ArrayGeometry& geom, double bearing_deg);

// gamma^n(tau) of the fractional-delay filter; delay_samples = tau * f_s.
Complex fractional_delay_gain(std::size_t bin, std::size_t n, double delay_samples);

// Fractional-delay operator H(psi), kept as one length-N diagonal spectrum per
// channel: H_m = W* diag(gamma^0..gamma^{N-1}) W.
class SteeringOperator {
 public:
  SteeringOperator(std::vector<std::vector<Complex>> spectra, double bearing_deg);

  std::size_t samples() const noexcept { return spectra_.empty() ? 0 : spectra_.front().size(); }
  std::size_t channels() const noexcept { return spectra_.size(); }
  double bearing() const noexcept { return bearing_; }
  const std::vector<Complex>& spectrum(std::size_t channel) const { return spectra_.at(channel); }

  // H_m x: delay a length-N signal as seen on one channel.
  std::vector<double> delay(std::size_t channel, std::span<const double> x) const;
  // H_m^T x: undo that delay.
  std::vector<double> undelay(std::size_t channel, std::span<const double> x) const;
  // H s, an N x M batch of the delayed copies.
  Eigen::MatrixXd apply(std::span<const double> s) const;
  // H^T y, the delay-compensated channel sum.
  std::vector<double> apply_transpose(const Eigen::MatrixXd& y) const;

 private:
  std::vector<std::vector<Complex>> spectra_;
  double bearing_;
};

SteeringOperator make_steering(const ArrayGeometry& geom, double bearing_deg,
                               std::size_t samples);

// B(psi, y) = ||H^T(psi) y||^2.
double beamform(const SteeringOperator& op, const SampleBatch& y);

// Per-channel half spectra of a batch and its total energy. Computing this once
// lets the beamformer be evaluated at any bearing without further FFTs.
struct BatchSpectrum {
  std::size_t samples = 0;               // N
  std::size_t channels = 0;              // M
  std::vector<Complex> bins;             // channel-major, channels * (N/2 + 1)
  double energy = 0.0;                   // ||y||^2

  std::size_t bin_count() const noexcept { return samples / 2 + 1; }
  const Complex* channel(std::size_t m) const { return bins.data() + m * bin_count(); }
};

BatchSpectrum spectrum_of(const SampleBatch& y);
BatchSpectrum spectrum_of(const Eigen::MatrixXd& y);

// B(psi, y) from a precomputed spectrum, using only the geometry delays.
double beam_energy(const BatchSpectrum& spec, const ArrayGeometry& geom,
                   double bearing_deg);

// Bearing-time record: rows are batches, columns bearings of the grid.
// With normalize, scaled so the largest entry is 1 (skipped when all zero).
Eigen::MatrixXd btr(std::span<const SampleBatch> batches, const ArrayGeometry& geom,
                    const BearingGrid& grid, bool normalize = true);

}  // namespace tkbd
