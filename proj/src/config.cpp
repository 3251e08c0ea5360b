#include "tkbd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tkbd/error.hpp"
#include "tkbd/io.hpp"

namespace tkbd {
namespace {

struct Binding {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

[[noreturn]] void bad_value(const Binding& b, const std::string& v) {
  throw Error(ErrorCode::config, "bad value '" + v + "' for " + b.section + "." + b.key);
}

// Table of every configurable value. Order is the order of format_config.
std::vector<Binding> bindings(PipelineConfig& c) {
  std::vector<Binding> out;
  auto real = [&](const char* s, const char* k, double& ref) {
    Binding b{s, k, [&ref] { return format_double(ref); }, nullptr};
    b.set = [&ref, b](const std::string& v) {
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (v.empty() || end != v.c_str() + v.size() || std::isnan(x)) bad_value(b, v);
      ref = x;
    };
    out.push_back(std::move(b));
  };
  auto count = [&](const char* s, const char* k, auto& ref) {
    Binding b{s, k, [&ref] { return std::to_string(ref); }, nullptr};
    b.set = [&ref, b](const std::string& v) {
      char* end = nullptr;
      if (v.empty() || v.front() == '-') bad_value(b, v);
      const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
      if (end != v.c_str() + v.size()) bad_value(b, v);
      ref = static_cast<std::remove_reference_t<decltype(ref)>>(x);
    };
    out.push_back(std::move(b));
  };
  auto flag = [&](const char* s, const char* k, bool& ref) {
    Binding b{s, k, [&ref] { return std::string(ref ? "true" : "false"); }, nullptr};
    b.set = [&ref, b](const std::string& v) {
      if (v == "true" || v == "1") ref = true;
      else if (v == "false" || v == "0") ref = false;
      else bad_value(b, v);
    };
    out.push_back(std::move(b));
  };

  real("array", "spacing_m", c.spacing_m);
  count("array", "elements", c.elements);
  real("array", "sound_speed", c.sound_speed);
  real("array", "sample_rate", c.sample_rate);
  count("batch", "samples", c.batch_samples);

  auto& f = c.tracker.filter;
  real("filter", "birth_prob", f.birth_prob);
  real("filter", "survival_prob", f.survival_prob);
  real("filter", "period_s", f.period_s);
  real("filter", "accel_noise", f.accel_noise);
  real("filter", "snr_noise", f.snr_noise);
  real("filter", "rate_var", f.rate_var);
  real("filter", "confirm_threshold", f.confirm_threshold);
  count("filter", "persistent_particles", f.persistent_particles);
  count("filter", "birth_particles", f.birth_particles);
  real("filter", "snr_prior_lo_db", f.snr_prior_lo_db);
  real("filter", "snr_prior_hi_db", f.snr_prior_hi_db);
  real("filter", "likelihood_dof", c.tracker.likelihood_dof);
  real("filter", "snr_step_db", c.tracker.snr_step_db);
  real("filter", "bearing_start", c.tracker.grid.start);
  real("filter", "bearing_stop", c.tracker.grid.stop);
  real("filter", "bearing_step", c.tracker.grid.step);

  count("noise", "order", c.noise_order);

  auto& cf = c.tracker.cfar;
  count("cfar", "guard_cells", cf.guard_cells);
  count("cfar", "train_cells", cf.train_cells);
  count("cfar", "train_rows", cf.train_rows);
  real("cfar", "alpha", cf.alpha);
  auto& cl = c.tracker.clutter;
  real("cfar", "clutter_intensity", cl.intensity);
  real("cfar", "clutter_density", cl.density);
  real("cfar", "detection_prob", cl.detection_prob);
  real("cfar", "bearing_var", cl.bearing_var);

  real("scenario", "start_bearing_deg", c.start_bearing_deg);
  real("scenario", "start_range_m", c.start_range_m);
  real("scenario", "end_bearing_deg", c.end_bearing_deg);
  real("scenario", "end_range_m", c.end_range_m);
  real("scenario", "speed", c.scenario.speed);
  real("scenario", "duration_s", c.scenario.duration_s);
  real("scenario", "reference_range", c.scenario.reference_range);
  real("scenario", "loss_exponent", c.scenario.loss_exponent);
  real("scenario", "dof", c.scenario.dof);
  flag("scenario", "target_free", c.scenario.target_free);

  real("eval", "ospa_cutoff", c.ospa.cutoff);
  real("eval", "ospa_order", c.ospa.order);
  count("eval", "sustain", c.sustain);

  real("calibrate", "start_lo_db", c.sweep.start_lo_db);
  real("calibrate", "width_db", c.sweep.width_db);
  real("calibrate", "start_intensity_db", c.sweep.start_intensity_db);
  real("calibrate", "step_db", c.sweep.step_db);
  count("calibrate", "max_steps", c.sweep.max_steps);

  count("run", "seed", c.seed);
  count("run", "runs", c.runs);
  {
    Binding b{"run", "variant", [&c] { return std::string(to_string(c.tracker.variant)); }, nullptr};
    b.set = [&c](const std::string& v) { c.tracker.variant = parse_variant(v); };
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::real_profile() {
  PipelineConfig c;
  c.tracker.likelihood_dof = 3.0;
  return c;
}

PipelineConfig PipelineConfig::simulation_profile() {
  PipelineConfig c;
  c.tracker.filter = FilterParams::simulation();
  c.tracker.likelihood_dof = 12.0;
  return c;
}

ArrayGeometry PipelineConfig::geometry() const {
  return ArrayGeometry::uniform_linear(elements, spacing_m, sound_speed, sample_rate);
}

Scenario PipelineConfig::make_scenario() const {
  Scenario s = Scenario::straight(start_bearing_deg, start_range_m, end_bearing_deg, end_range_m,
                                  scenario.speed);
  s.duration_s = scenario.duration_s;
  s.reference_range = scenario.reference_range;
  s.loss_exponent = scenario.loss_exponent;
  s.dof = scenario.dof;
  s.target_free = scenario.target_free;
  return s;
}

EvalParams PipelineConfig::eval_params() const {
  return EvalParams{ospa, sustain, tracker.filter.confirm_threshold};
}

void PipelineConfig::validate() const {
  (void)geometry();
  if (batch_samples == 0 || batch_samples % 2 != 0)
    throw Error(ErrorCode::unsupported_batch_length, "batch.samples must be even and positive");
  tracker.filter.validate();
  TModelParams{tracker.likelihood_dof, batch_samples, elements}.validate();
  if (tracker.grid.size() == 0) throw Error(ErrorCode::config, "empty bearing grid");
  tracker.cfar.validate();
  tracker.clutter.validate();
  make_scenario().validate();
  ospa.validate();
  if (sustain == 0) throw Error(ErrorCode::config, "eval.sustain must be positive");
  if (runs == 0) throw Error(ErrorCode::config, "run.runs must be positive");
}

PipelineConfig parse_config(const std::string& text, bool simulation_profile) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  PipelineConfig cfg = simulation_profile ? PipelineConfig::simulation_profile()
                                          : PipelineConfig::real_profile();
  auto table = bindings(cfg);

  const auto meta = tree.get_child_optional("meta");
  if (!meta || !meta->get_optional<int>("schema_version"))
    throw Error(ErrorCode::config, "missing [meta] schema_version");
  if (meta->get<int>("schema_version") != kConfigSchemaVersion)
    throw Error(ErrorCode::config, "unsupported schema_version " + meta->get<std::string>("schema_version"));

  for (const auto& [section, keys] : tree) {
    if (!keys.data().empty()) throw Error(ErrorCode::config, "key '" + section + "' outside a section");
    for (const auto& [key, value] : keys) {
      if (section == "meta" && key == "schema_version") continue;
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Binding& b) { return b.section == section && b.key == key; });
      if (it == table.end()) throw Error(ErrorCode::config, "unknown key " + section + "." + key);
      it->set(value.data());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, bool simulation_profile) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), simulation_profile);
}

std::string format_config(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  std::ostringstream os;
  os << "[meta]\nschema_version=" << kConfigSchemaVersion << '\n';
  std::string section;
  for (const auto& b : bindings(copy)) {
    if (b.section != section) {
      section = b.section;
      os << "\n[" << section << "]\n";
    }
    os << b.key << '=' << b.get() << '\n';
  }
  return os.str();
}

void save_config(const std::filesystem::path& path, const PipelineConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
  os << format_config(cfg);
  if (!os) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace tkbd
