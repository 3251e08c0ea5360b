#include <doctest.h>

#include <memory>
#include <random>

#include "tkbd/kernels.hpp"
#include "tkbd/likelihoods.hpp"

using namespace tkbd;

namespace {

std::shared_ptr<const BatchSpectrum> random_spectrum(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd y(64, 8);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = g(rng);
  return std::make_shared<const BatchSpectrum>(spectrum_of(y));
}

}  // namespace

TEST_CASE("parallel bearing scan equals the serial reference") {
  const auto geom = ArrayGeometry::uniform_linear(8, 0.93, 1500, 375);
  const auto spec = random_spectrum(1);
  const auto bearings = BearingGrid{-90, 90, 0.25}.values();
  std::vector<double> a(bearings.size()), b(bearings.size());
  kernels::bearing_scan_serial(*spec, geom, bearings, a);
  kernels::bearing_scan_omp(*spec, geom, bearings, b);
  CHECK(a == b);
  std::vector<double> wrong(3);
  CHECK_THROWS(kernels::bearing_scan_omp(*spec, geom, bearings, wrong));
}

TEST_CASE("parallel particle likelihoods equal the serial reference") {
  const auto geom = ArrayGeometry::uniform_linear(8, 0.93, 1500, 375);
  const BeamLikelihood lr(BeamLikelihood::Model::student_t, random_spectrum(2), geom, {12.0, 64, 8});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<TargetState> xs(2500);
  for (auto& x : xs) x = {-90 + 180 * u(rng), 0.0, -30 + 25 * u(rng)};
  std::vector<double> a(xs.size()), b(xs.size());
  kernels::log_lr_serial(lr, xs, a);
  kernels::log_lr_omp(lr, xs, b);
  CHECK(a == b);
}

TEST_CASE("backend switch") {
  const auto old = kernels::default_backend();
  kernels::set_default_backend(kernels::Backend::serial);
  CHECK(kernels::default_backend() == kernels::Backend::serial);
  kernels::set_default_backend(old);
}

TEST_CASE("grid evaluation agrees with point evaluation") {
  const auto geom = ArrayGeometry::uniform_linear(8, 0.93, 1500, 375);
  for (auto model : {BeamLikelihood::Model::student_t, BeamLikelihood::Model::gaussian}) {
    const BeamLikelihood lr(model, random_spectrum(4), geom, {12.0, 64, 8});
    const std::vector<double> bearings{-40, 0, 33};
    const std::vector<double> snr{-20, -10, -3};
    std::vector<double> out(9);
    lr.log_lr_grid(bearings, snr, out);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(out[i * 3 + j] == doctest::Approx(lr.log_lr({bearings[i], 0.0, snr[j]})).epsilon(1e-13));
  }
  const DetectionLikelihood det({{10.0}}, ClutterModel{});
  std::vector<double> out(2);
  det.log_lr_grid(std::vector<double>{10.0}, std::vector<double>{-20, -10}, out);
  CHECK(out[0] == out[1]);
  CHECK(out[0] == doctest::Approx(detection_log_lr({{10.0}}, 10.0, ClutterModel{})));
}
