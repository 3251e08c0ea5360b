#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "tkbd/array.hpp"
#include "tkbd/eval.hpp"
#include "tkbd/sim.hpp"
#include "tkbd/tracker.hpp"

namespace tkbd {

inline constexpr int kConfigSchemaVersion = 1;

// Everything a pipeline run needs. Defaults are the real-data profile;
// simulation_profile() switches p_s, p_b and nu to the simulation values.
struct PipelineConfig {
  std::size_t elements = 8;
  double spacing_m = 0.93;
  double sound_speed = 1500.0;
  double sample_rate = 375.0;
  std::size_t batch_samples = 64;
  std::size_t noise_order = 14;

  TrackerConfig tracker{};
  Scenario scenario{};
  double start_bearing_deg = -50.0;
  double start_range_m = 2000.0;
  double end_bearing_deg = 50.0;
  double end_range_m = 300.0;

  OspaConfig ospa{};
  std::size_t sustain = 5;
  CalibrationSweep sweep{};

  std::uint64_t seed = 1;
  std::size_t runs = 1;

  static PipelineConfig real_profile();
  static PipelineConfig simulation_profile();

  ArrayGeometry geometry() const;
  // Straight-track scenario from the start/end fields and scenario settings.
  Scenario make_scenario() const;
  EvalParams eval_params() const;
  void validate() const;
};

// INI text with [meta] schema_version; unspecified keys keep the profile
// defaults, unknown sections or keys are rejected.
PipelineConfig parse_config(const std::string& text, bool simulation_profile);
PipelineConfig load_config(const std::filesystem::path& path, bool simulation_profile);

// Complete effective configuration, re-readable by parse_config.
std::string format_config(const PipelineConfig& cfg);
void save_config(const std::filesystem::path& path, const PipelineConfig& cfg);

}  // namespace tkbd
