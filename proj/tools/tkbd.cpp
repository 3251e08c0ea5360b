// tkbd: simulate, fit, track and evaluate broadband passive-sonar data.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tkbd/config.hpp"
#include "tkbd/error.hpp"
#include "tkbd/eval.hpp"
#include "tkbd/io.hpp"
#include "tkbd/noise.hpp"
#include "tkbd/rng.hpp"
#include "tkbd/sim.hpp"
#include "tkbd/tracker.hpp"

namespace fs = std::filesystem;
using namespace tkbd;

namespace {

struct Common {
  std::string config;
  bool sim_profile = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_flag("--sim-profile", c.sim_profile, "use the simulation parameter profile");
  cmd->add_option("--seed", c.seed, "master seed (overrides run.seed)");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty()
                           ? (c.sim_profile ? PipelineConfig::simulation_profile()
                                            : PipelineConfig::real_profile())
                           : load_config(c.config, c.sim_profile);
  if (c.seed) cfg.seed = *c.seed;
  if (c.variant) cfg.tracker.variant = parse_variant(*c.variant);
  cfg.validate();
  return cfg;
}

VarModel model_for(const std::string& model_path, const fs::path& data_dir,
                   const std::optional<VarModel>& bundled) {
  if (!model_path.empty()) return load_var_model(model_path);
  if (bundled) return *bundled;
  throw Error(ErrorCode::config, "no noise model: pass --model or include noise_model.var in " +
                                     data_dir.string());
}

void check_shape(const Dataset& ds, const PipelineConfig& cfg) {
  if (ds.geometry.size() != cfg.elements || ds.batch_samples != cfg.batch_samples)
    throw Error(ErrorCode::config, "dataset shape (M=" + std::to_string(ds.geometry.size()) +
                                       ", N=" + std::to_string(ds.batch_samples) +
                                       ") differs from the configuration");
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string out;
  std::string model;
  bool target_free = false;
};

void cmd_simulate(const SimulateArgs& a) {
  PipelineConfig cfg = resolve(a.common);
  if (a.target_free) cfg.scenario.target_free = true;
  const auto geom = cfg.geometry();
  const VarModel model =
      a.model.empty()
          ? reference_ambient_model(geom, cfg.noise_order, derive_seed(cfg.seed, {stream::ambient_model}))
          : load_var_model(a.model);
  const Scenario sc = cfg.make_scenario();
  const auto ds = generate_dataset(sc, geom, model, cfg.batch_samples,
                                   derive_seed(cfg.seed, {stream::dataset}));
  save_dataset(a.out, ds, DatasetMeta{cfg.seed, sc, true}, &model);
  save_config(fs::path(a.out) / "config.ini", cfg);
  std::printf("wrote %zu batches (%zu x %zu) to %s\n", ds.batches.size(), ds.batch_samples,
              geom.size(), a.out.c_str());
}

// ---- fit-noise --------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string out;
  std::optional<int> order;
  std::optional<int> auto_order;
};

void cmd_fit_noise(const FitArgs& a) {
  const auto loaded = load_dataset(a.data);
  const Eigen::MatrixXd samples = concatenate(loaded.dataset.batches);
  int p = 14;
  if (a.auto_order) {
    const auto sel = select_order(samples, *a.auto_order);
    p = static_cast<int>(sel.order);
    std::printf("order,aic\n");
    for (std::size_t i = 0; i < sel.aic.size(); ++i) std::printf("%zu,%s\n", i, format_double(sel.aic[i]).c_str());
    std::printf("selected order %d\n", p);
  } else if (a.order) {
    p = *a.order;
  }
  VarModel model = [&] {
    try {
      return fit_var(samples, p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::singular_fit)
        throw Error(e.code(), std::string(e.what()) +
                                  "; use more data, a lower order, or remove constant channels");
      throw;
    }
  }();
  save_var_model(model, a.out);
  const double rho = model.spectral_radius();
  std::printf("order %zu, channels %zu\n", model.order(), model.channels());
  std::printf("spectral radius %s, stability margin %s\n", format_double(rho).c_str(),
              format_double(1.0 - rho).c_str());
  std::printf("residual covariance:\n");
  const auto& s = model.innovation_cov();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) std::printf("%s%.6g", j ? " " : "  ", s(i, j));
    std::printf("\n");
  }
}

// ---- track ------------------------------------------------------------------

struct TrackArgs {
  Common common;
  std::string data;
  std::string model;
  std::string out;
  std::string detections;
};

void cmd_track(const TrackArgs& a) {
  const PipelineConfig cfg = resolve(a.common);
  const auto loaded = load_dataset(a.data);
  check_shape(loaded.dataset, cfg);
  const auto& geom = loaded.dataset.geometry;
  const bool cfar = cfg.tracker.variant == Variant::cfar;
  const VarModel model = cfar && a.model.empty() && !loaded.model
                             ? VarModel({}, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(geom.size()),
                                                                      static_cast<Eigen::Index>(geom.size())))
                             : model_for(a.model, a.data, loaded.model);
  if (model.channels() != geom.size())
    throw Error(ErrorCode::config, "noise model has " + std::to_string(model.channels()) +
                                       " channels, dataset has " + std::to_string(geom.size()));
  const auto prepared = prepare_measurements(loaded.dataset.batches, geom, model, cfg.tracker);
  const auto log = run_tracker(prepared, geom, cfg.tracker, derive_seed(cfg.seed, {stream::tracker}));
  write_track_log(a.out, log);
  if (!a.detections.empty()) {
    if (!cfar) throw Error(ErrorCode::config, "--detections needs the cfar variant");
    write_detections_csv(a.detections, prepared.detections);
  }
  std::size_t confirmed = 0;
  for (const auto& p : log) confirmed += p.confirmed ? 1 : 0;
  std::printf("%s: %zu batches, %zu confirmed\n", std::string(to_string(cfg.tracker.variant)).c_str(),
              log.size(), confirmed);
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::vector<std::string> logs;
  std::string truth;
  std::string out_dir;
};

void cmd_eval(const EvalArgs& a) {
  const PipelineConfig cfg = resolve(a.common);
  const auto truth = read_truth_csv(a.truth);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + a.out_dir + ": " + ec.message());

  std::vector<std::vector<double>> ospa, q;
  std::vector<std::optional<double>> det_snr, det_range;
  for (std::size_t r = 0; r < a.logs.size(); ++r) {
    const auto log = read_track_log(a.logs[r]);
    const auto rep = evaluate_run(log, truth.bearing_deg, truth.snr, truth.range_m, cfg.eval_params());
    write_run_metrics(fs::path(a.out_dir) / ("metrics_" + std::to_string(r) + ".csv"), rep);
    ospa.push_back(rep.ospa);
    q.push_back(rep.existence);
    det_snr.push_back(rep.detection ? std::optional(rep.detection->snr_db) : std::nullopt);
    det_range.push_back(rep.detection ? std::optional(rep.detection->range_m) : std::nullopt);
  }
  write_quantile_csv(fs::path(a.out_dir) / "aggregate.csv", quantile_bands(ospa), quantile_bands(q));
  const auto ms = median_with_missing(det_snr);
  const auto mr = median_with_missing(det_range);
  std::printf("runs %zu, median detection snr_db %s, median detection range_m %s\n", a.logs.size(),
              ms ? format_double(*ms).c_str() : "none", mr ? format_double(*mr).c_str() : "none");
}

// ---- calibrate-prior --------------------------------------------------------

struct CalibrateArgs {
  Common common;
  std::vector<std::string> data;
  std::string model;
  std::string out;
};

void cmd_calibrate(const CalibrateArgs& a) {
  PipelineConfig cfg = resolve(a.common);
  std::vector<PreparedMeasurements> runs;
  std::optional<ArrayGeometry> geom;
  std::vector<LoadedDataset> loaded;
  for (const auto& d : a.data) loaded.push_back(load_dataset(d));
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    check_shape(loaded[i].dataset, cfg);
    if (!geom) geom = loaded[i].dataset.geometry;
    const bool cfar = cfg.tracker.variant == Variant::cfar;
    const VarModel model = cfar && a.model.empty() && !loaded[i].model
                               ? VarModel({}, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(geom->size()),
                                                                        static_cast<Eigen::Index>(geom->size())))
                               : model_for(a.model, a.data[i], loaded[i].model);
    runs.push_back(prepare_measurements(loaded[i].dataset.batches, *geom, model, cfg.tracker));
  }
  const auto res = calibrate_prior(runs, *geom, cfg.tracker, cfg.sweep, derive_seed(cfg.seed, {stream::tracker}));
  std::printf("setting_db,confirming_runs\n");
  for (const auto& s : res.trace) std::printf("%s,%zu\n", format_double(s.setting_db).c_str(), s.confirming_runs);
  if (!res.feasible) std::printf("warning: the first sweep setting already produced false tracks\n");
  if (!res.found) std::printf("note: no false track within the sweep; returning its last setting\n");
  if (cfg.tracker.variant == Variant::cfar)
    std::printf("clutter_intensity %s\n", format_double(res.clutter_intensity).c_str());
  else
    std::printf("snr_prior_lo_db %s\nsnr_prior_hi_db %s\n", format_double(res.snr_prior_lo_db).c_str(),
                format_double(res.snr_prior_hi_db).c_str());
  cfg.tracker = res.apply(cfg.tracker);
  if (!a.out.empty()) save_config(a.out, cfg);
}

// ---- btr --------------------------------------------------------------------

struct BtrArgs {
  Common common;
  std::string data;
  std::string model;
  std::string out;
  bool raw = false;
  bool no_normalize = false;
};

void cmd_btr(const BtrArgs& a) {
  const PipelineConfig cfg = resolve(a.common);
  const auto loaded = load_dataset(a.data);
  const auto& geom = loaded.dataset.geometry;
  std::vector<SampleBatch> batches = loaded.dataset.batches;
  if (!a.raw) {
    const VarModel model = whitening_model(cfg.tracker.variant, model_for(a.model, a.data, loaded.model));
    WhitenState state(model);
    Eigen::MatrixXd white;
    for (auto& b : batches) {
      whiten_block(model, state, b.data(), white);
      b = SampleBatch(white, b.index());
    }
  }
  const auto m = btr(batches, geom, cfg.tracker.grid, !a.no_normalize);
  write_matrix_csv(a.out, m, cfg.tracker.grid.values());
  std::printf("wrote %ld x %ld BTR to %s\n", static_cast<long>(m.rows()), static_cast<long>(m.cols()),
              a.out.c_str());
}

std::string quoted(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Track-before-detect for broadband passive sonar"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(c_sim, sim.common);
  c_sim->add_option("--out", sim.out, "output dataset directory")->required();
  c_sim->add_option("--model", sim.model, "VAR model file for the ambient noise (default: built-in reference)");
  c_sim->add_flag("--target-free", sim.target_free, "no target (calibration data)");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit-noise", "fit a VAR ambient-noise model");
  c_fit->add_option("--data", fit.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  c_fit->add_option("--out", fit.out, "model file")->required();
  auto* o_order = c_fit->add_option("--order", fit.order, "VAR order (default 14)")->check(CLI::NonNegativeNumber);
  c_fit->add_option("--auto-order", fit.auto_order, "select the order by AIC up to this value")
      ->check(CLI::NonNegativeNumber)
      ->excludes(o_order);

  TrackArgs trk;
  auto* c_trk = app.add_subcommand("track", "run a tracker over a dataset");
  add_common(c_trk, trk.common);
  c_trk->add_option("--variant", trk.common.variant, "tvar, tvar0, gvar or cfar");
  c_trk->add_option("--data", trk.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  c_trk->add_option("--model", trk.model, "VAR model file (default: the dataset's)");
  c_trk->add_option("--out", trk.out, "track log CSV")->required();
  c_trk->add_option("--detections", trk.detections, "also write CFAR detections CSV");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "OSPA and detection statistics for track logs");
  add_common(c_ev, ev.common);
  c_ev->add_option("--track-log", ev.logs, "track log CSV, repeatable")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--truth", ev.truth, "truth CSV")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--out", ev.out_dir, "output directory")->required();

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate-prior", "sweep the SNR prior (or clutter intensity) on target-free data");
  add_common(c_cal, cal.common);
  c_cal->add_option("--variant", cal.common.variant, "tvar, tvar0, gvar or cfar");
  c_cal->add_option("--data", cal.data, "target-free dataset directory, repeatable")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_cal->add_option("--model", cal.model, "VAR model file (default: each dataset's)");
  c_cal->add_option("--out", cal.out, "write the calibrated configuration here");

  BtrArgs bt;
  auto* c_bt = app.add_subcommand("btr", "bearing-time record as CSV");
  add_common(c_bt, bt.common);
  c_bt->add_option("--variant", bt.common.variant, "whitening of this variant (tvar, tvar0, gvar)");
  c_bt->add_option("--data", bt.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  c_bt->add_option("--model", bt.model, "VAR model file (default: the dataset's)");
  c_bt->add_option("--out", bt.out, "output CSV")->required();
  c_bt->add_flag("--raw", bt.raw, "skip whitening");
  c_bt->add_flag("--no-normalize", bt.no_normalize, "keep absolute beam energies");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_sim->parsed()) cmd_simulate(sim);
    else if (c_fit->parsed()) cmd_fit_noise(fit);
    else if (c_trk->parsed()) cmd_track(trk);
    else if (c_ev->parsed()) cmd_eval(ev);
    else if (c_cal->parsed()) cmd_calibrate(cal);
    else if (c_bt->parsed()) cmd_btr(bt);
  } catch (const Error& e) {
    std::cerr << "error: code=" << to_string(e.code()) << " message=\"" << quoted(e.what()) << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal message=\"" << quoted(e.what()) << "\"\n";
    return 1;
  }
  return 0;
}
