#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tkbd/detect.hpp"
#include "tkbd/eval.hpp"
#include "tkbd/sim.hpp"

namespace tkbd {

// %.17g, enough digits to round-trip a double.
std::string format_double(double v);

// Dataset directory: meta.json, samples.f32, truth.csv and optionally
// noise_model.var. See docs/formats.md.
struct DatasetMeta {
  std::uint64_t seed = 0;
  Scenario scenario{};
  bool has_scenario = false;
};

void save_dataset(const std::filesystem::path& dir, const Dataset& ds, const DatasetMeta& meta,
                  const VarModel* model = nullptr);

struct LoadedDataset {
  Dataset dataset;
  DatasetMeta meta;
  std::optional<VarModel> model;
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

void write_truth_csv(const std::filesystem::path& path, const ScenarioTruth& truth);
ScenarioTruth read_truth_csv(const std::filesystem::path& path);

void write_track_log(const std::filesystem::path& path, const TrackLog& log);
TrackLog read_track_log(const std::filesystem::path& path);

void write_detections_csv(const std::filesystem::path& path,
                          std::span<const DetectionSet> detections);

// Per-batch OSPA and q plus the run summary as comment-free CSV sections.
void write_run_metrics(const std::filesystem::path& path, const RunReport& report);

void write_quantile_csv(const std::filesystem::path& path, std::span<const QuantileBand> ospa,
                        std::span<const QuantileBand> existence);

// Plain matrix as CSV, optionally with a header row.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      std::span<const double> header = {});

}  // namespace tkbd
