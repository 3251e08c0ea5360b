// Serial vs OpenMP kernels on one batch of the default shape (N = 64, M = 8).

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tkbd/array.hpp"
#include "tkbd/kernels.hpp"
#include "tkbd/likelihoods.hpp"

namespace {

using namespace tkbd;

struct Fixture {
  ArrayGeometry geom = ArrayGeometry::uniform_linear(8, 0.93, 1500.0, 375.0);
  std::shared_ptr<const BatchSpectrum> spec;
  std::vector<double> bearings = BearingGrid{}.values();
  std::vector<TargetState> states;

  Fixture() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd y(64, 8);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = n(rng);
    spec = std::make_shared<const BatchSpectrum>(spectrum_of(y));
    std::uniform_real_distribution<double> b(-90.0, 90.0), s(-25.0, -5.0);
    for (int i = 0; i < 2500; ++i) states.push_back({b(rng), 0.0, s(rng)});
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <bool Omp>
void BM_BearingScan(benchmark::State& st) {
  const auto& f = fixture();
  std::vector<double> out(f.bearings.size());
  for (auto _ : st) {
    if constexpr (Omp) kernels::bearing_scan_omp(*f.spec, f.geom, f.bearings, out);
    else kernels::bearing_scan_serial(*f.spec, f.geom, f.bearings, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.bearings.size()));
}

template <bool Omp>
void BM_ParticleLogLr(benchmark::State& st) {
  const auto& f = fixture();
  const BeamLikelihood lr(BeamLikelihood::Model::student_t, f.spec, f.geom, TModelParams{12.0, 64, 8});
  std::vector<double> out(f.states.size());
  for (auto _ : st) {
    if constexpr (Omp) kernels::log_lr_omp(lr, f.states, out);
    else kernels::log_lr_serial(lr, f.states, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.states.size()));
}

BENCHMARK(BM_BearingScan<false>)->Name("bearing_scan/serial");
BENCHMARK(BM_BearingScan<true>)->Name("bearing_scan/openmp");
BENCHMARK(BM_ParticleLogLr<false>)->Name("particle_log_lr/serial");
BENCHMARK(BM_ParticleLogLr<true>)->Name("particle_log_lr/openmp");

}  // namespace

BENCHMARK_MAIN();
