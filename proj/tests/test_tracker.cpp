#include <doctest.h>

#include <cmath>

#include "tkbd/config.hpp"
#include "tkbd/error.hpp"
#include "tkbd/eval.hpp"
#include "tkbd/rng.hpp"
#include "tkbd/sim.hpp"
#include "tkbd/tracker.hpp"

using namespace tkbd;

namespace {

struct Fixture {
  PipelineConfig cfg = PipelineConfig::simulation_profile();
  ArrayGeometry geom = cfg.geometry();
  VarModel model = reference_ambient_model(geom, 14, 99);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_CASE("variant names") {
  for (auto v : {Variant::tvar, Variant::tvar0, Variant::gvar, Variant::cfar})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK_THROWS_AS(parse_variant("TVAR"), Error);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, {stream::noise}) != derive_seed(1, {stream::signal}));
  CHECK(derive_seed(1, {stream::tracker, 0}) != derive_seed(1, {stream::tracker, 1}));
  CHECK(derive_seed(1, {stream::tracker, 0}) == derive_seed(1, {stream::tracker, 0}));
  CHECK(derive_seed(1, {}) != derive_seed(2, {}));
}

TEST_CASE("measurement preparation per variant") {
  const auto& f = fixture();
  Scenario sc;
  sc.target_free = true;
  sc.duration_s = 3.0;
  const auto ds = generate_dataset(sc, f.geom, f.model, 64, 5);
  auto tc = f.cfg.tracker;

  tc.variant = Variant::tvar;
  const auto tvar = prepare_measurements(ds.batches, f.geom, f.model, tc);
  REQUIRE(tvar.size() == ds.batches.size());
  // p = 14 < N = 64: only the first batch contains warm-up rows.
  CHECK(tvar.spectra[0] == nullptr);
  CHECK(tvar.spectra[1] != nullptr);
  CHECK(tvar.batch_period_s == doctest::Approx(64.0 / 375.0));

  tc.variant = Variant::tvar0;
  const auto tvar0 = prepare_measurements(ds.batches, f.geom, f.model, tc);
  CHECK(tvar0.spectra[0] != nullptr);
  CHECK(whitening_model(Variant::tvar0, f.model).order() == 0);
  CHECK(whitening_model(Variant::gvar, f.model).order() == 14);

  tc.variant = Variant::cfar;
  const auto cfar = prepare_measurements(ds.batches, f.geom, f.model, tc);
  CHECK(cfar.detections.size() == ds.batches.size());
  CHECK(cfar.spectra.empty());

  // Whitened target-free data has unit per-sample power on average.
  double e = 0.0;
  for (std::size_t k = 1; k < tvar.spectra.size(); ++k) e += tvar.spectra[k]->energy;
  e /= static_cast<double>((tvar.spectra.size() - 1) * 64 * 8);
  CHECK(e == doctest::Approx(12.0 / 10.0).epsilon(0.15));
}

TEST_CASE("tracker run is reproducible and well formed") {
  const auto& f = fixture();
  Scenario sc = Scenario::straight(20, 400, 25, 380, 2.0);
  sc.duration_s = 8.0;
  const auto ds = generate_dataset(sc, f.geom, f.model, 64, 9);
  auto tc = f.cfg.tracker;
  tc.filter.persistent_particles = 500;
  tc.filter.birth_particles = 200;
  const auto m = prepare_measurements(ds.batches, f.geom, f.model, tc);
  const auto a = run_tracker(m, f.geom, tc, 3);
  const auto b = run_tracker(m, f.geom, tc, 3);
  REQUIRE(a.size() == ds.batches.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].batch == k);
    CHECK(a[k].existence == b[k].existence);
    CHECK(a[k].existence >= 0.0);
    CHECK(a[k].existence <= 1.0);
    CHECK(a[k].confirmed == (a[k].existence > tc.filter.confirm_threshold));
  }
}

TEST_CASE("strong close target is confirmed near its bearing") {
  const auto& f = fixture();
  Scenario sc = Scenario::straight(20, 150, 22, 150, 1.0);
  sc.duration_s = 15.0;
  const auto ds = generate_dataset(sc, f.geom, f.model, 64, 21);
  auto tc = f.cfg.tracker;
  tc.filter.snr_prior_lo_db = -5;
  tc.filter.snr_prior_hi_db = 5;
  const auto m = prepare_measurements(ds.batches, f.geom, f.model, tc);
  const auto log = run_tracker(m, f.geom, tc, 4);
  const auto rep = evaluate_run(log, ds.truth.bearing_deg, ds.truth.snr, ds.truth.range_m);
  REQUIRE(rep.first_detection);
  const auto& last = log.back();
  CHECK(last.confirmed);
  CHECK(std::abs(last.estimate->bearing_deg - ds.truth.bearing_deg.back()) < 10.0);
}

TEST_CASE("calibration stops at the first confirming setting") {
  const auto& f = fixture();
  Scenario sc;
  sc.target_free = true;
  sc.duration_s = 30.0;
  const auto ds = generate_dataset(sc, f.geom, f.model, 64, 5000);
  auto tc = f.cfg.tracker;
  tc.variant = Variant::gvar;
  std::vector<PreparedMeasurements> data{prepare_measurements(ds.batches, f.geom, f.model, tc)};
  CalibrationSweep sweep;
  sweep.start_lo_db = -50;
  sweep.step_db = 4;
  sweep.max_steps = 6;
  const auto res = calibrate_prior(data, f.geom, tc, sweep, 11);
  REQUIRE_FALSE(res.trace.empty());
  // The Gaussian model on heavy-tailed data confirms false tracks well before 0 dB.
  CHECK(res.found);
  CHECK(res.trace.back().confirming_runs > 0);
  for (std::size_t i = 0; i + 1 < res.trace.size(); ++i) CHECK(res.trace[i].confirming_runs == 0);
  if (res.trace.size() > 1) {
    CHECK(res.snr_prior_lo_db == res.trace[res.trace.size() - 2].setting_db);
    CHECK(res.feasible);
  }
  CHECK(res.snr_prior_hi_db - res.snr_prior_lo_db == doctest::Approx(10.0));
  const auto applied = res.apply(tc);
  CHECK(applied.filter.snr_prior_lo_db == res.snr_prior_lo_db);

  tc.variant = Variant::tvar;
  CHECK_THROWS_AS(calibrate_prior(data, f.geom, tc, sweep, 1), Error);
  CHECK_THROWS_AS(calibrate_prior({}, f.geom, tc, sweep, 1), Error);
}
