#include "tkbd/io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tkbd/error.hpp"

namespace tkbd {
namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "sample files are little-endian");

namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw Error(ErrorCode::io, "cannot read " + path.string());
  return is;
}

void close_checked(std::ofstream& os, const fs::path& path) {
  os.close();
  if (!os) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorCode::format, "bad number '" + s + "' in " + path.string());
  return v;
}

std::size_t parse_index(const std::string& s, const fs::path& path) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorCode::format, "bad index '" + s + "' in " + path.string());
  return static_cast<std::size_t>(v);
}

// Reads a CSV with the expected header; returns the data rows.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line != header)
    throw Error(ErrorCode::format, path.string() + ": expected header '" + header + "'");
  const std::size_t cols = split(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != cols)
      throw Error(ErrorCode::format, path.string() + ": wrong column count on line " +
                                         std::to_string(rows.size() + 2));
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- dataset ----------------------------------------------------------------

void save_dataset(const fs::path& dir, const Dataset& ds, const DatasetMeta& meta,
                  const VarModel* model) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());

  const auto& g = ds.geometry;
  json j;
  j["format"] = "tkbd-dataset";
  j["version"] = 1;
  j["sample_rate"] = g.sample_rate();
  j["speed_of_sound"] = g.speed_of_sound();
  j["channels"] = g.size();
  j["batch_samples"] = ds.batch_samples;
  j["batches"] = ds.batches.size();
  j["rows"] = ds.batches.size() * ds.batch_samples;
  j["seed"] = meta.seed;
  json elems = json::array();
  for (const auto& p : g.elements()) elems.push_back({p.x, p.y});
  j["elements"] = elems;
  if (meta.has_scenario) {
    const auto& s = meta.scenario;
    json wp = json::array();
    for (const auto& p : s.waypoints) wp.push_back({p.x, p.y});
    j["scenario"] = {{"waypoints", wp},
                     {"speed", s.speed},
                     {"duration_s", s.duration_s},
                     {"reference_range", s.reference_range},
                     {"loss_exponent", s.loss_exponent},
                     {"dof", std::isfinite(s.dof) ? json(s.dof) : json("inf")},
                     {"target_free", s.target_free}};
  }
  {
    const auto path = dir / "meta.json";
    auto os = open_out(path);
    os << j.dump(2) << '\n';
    close_checked(os, path);
  }
  {
    const auto path = dir / "samples.f32";
    auto os = open_out(path, true);
    std::vector<float> row(g.size());
    for (const auto& b : ds.batches) {
      for (Eigen::Index n = 0; n < b.data().rows(); ++n) {
        for (Eigen::Index m = 0; m < b.data().cols(); ++m)
          row[static_cast<std::size_t>(m)] = static_cast<float>(b.data()(n, m));
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size() * sizeof(float)));
      }
    }
    close_checked(os, path);
  }
  write_truth_csv(dir / "truth.csv", ds.truth);
  if (model) save_var_model(*model, dir / "noise_model.var");
}

LoadedDataset load_dataset(const fs::path& dir) {
  const auto meta_path = dir / "meta.json";
  json j;
  try {
    auto is = open_in(meta_path);
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, meta_path.string() + ": " + e.what());
  }
  try {
    if (j.at("format") != "tkbd-dataset" || j.at("version") != 1)
      throw Error(ErrorCode::format, meta_path.string() + ": unsupported dataset format");
    std::vector<Position> elems;
    for (const auto& e : j.at("elements")) elems.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    ArrayGeometry geom(std::move(elems), j.at("speed_of_sound").get<double>(),
                       j.at("sample_rate").get<double>());
    const auto n = j.at("batch_samples").get<std::size_t>();
    const auto rows = j.at("rows").get<std::size_t>();
    const std::size_t m = geom.size();
    if (j.at("channels").get<std::size_t>() != m)
      throw Error(ErrorCode::format, meta_path.string() + ": channel count disagrees with elements");

    const auto sp = dir / "samples.f32";
    std::error_code ec;
    const auto bytes = fs::file_size(sp, ec);
    if (ec) throw Error(ErrorCode::io, "cannot read " + sp.string());
    if (bytes != rows * m * sizeof(float))
      throw Error(ErrorCode::format, sp.string() + ": size does not match meta.json");
    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
    {
      auto is = open_in(sp, true);
      std::vector<float> row(m);
      for (Eigen::Index r = 0; r < data.rows(); ++r) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(m * sizeof(float)));
        if (!is) throw Error(ErrorCode::io, "short read in " + sp.string());
        for (std::size_t c = 0; c < m; ++c) data(r, static_cast<Eigen::Index>(c)) = row[c];
      }
    }

    LoadedDataset out{Dataset{geom, n, split_batches(data, n), read_truth_csv(dir / "truth.csv")}, {}, {}};
    if (out.dataset.truth.size() != out.dataset.batches.size())
      throw Error(ErrorCode::format, dir.string() + ": truth.csv and samples disagree on batch count");
    for (std::size_t k = 0; k < out.dataset.truth.size(); ++k)
      out.dataset.truth.time_s[k] = (static_cast<double>(k) + 0.5) * static_cast<double>(n) / geom.sample_rate();
    out.meta.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("scenario")) {
      const auto& s = j["scenario"];
      auto& sc = out.meta.scenario;
      for (const auto& p : s.at("waypoints")) sc.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      sc.speed = s.at("speed").get<double>();
      sc.duration_s = s.at("duration_s").get<double>();
      sc.reference_range = s.at("reference_range").get<double>();
      sc.loss_exponent = s.at("loss_exponent").get<double>();
      sc.dof = s.at("dof").is_string() ? std::numeric_limits<double>::infinity() : s.at("dof").get<double>();
      sc.target_free = s.at("target_free").get<bool>();
      out.meta.has_scenario = true;
    }
    if (fs::exists(dir / "noise_model.var")) out.model = load_var_model(dir / "noise_model.var");
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, meta_path.string() + ": " + e.what());
  }
}

// ---- CSV files --------------------------------------------------------------

static const char* kTruthHeader = "batch_index,psi_deg,eta_dB,range_m";
static const char* kTrackHeader = "batch_index,time_s,q,psi_est_deg,psidot_est,eta_dB_est,confirmed";

void write_truth_csv(const fs::path& path, const ScenarioTruth& truth) {
  auto os = open_out(path);
  os << kTruthHeader << '\n';
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double db = truth.snr[k] > 0.0 ? truth.snr_db(k) : -std::numeric_limits<double>::infinity();
    os << k << ',' << format_double(truth.bearing_deg[k]) << ',' << format_double(db) << ','
       << format_double(truth.range_m[k]) << '\n';
  }
  close_checked(os, path);
}

ScenarioTruth read_truth_csv(const fs::path& path) {
  ScenarioTruth t;
  const auto rows = read_csv(path, kTruthHeader);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (parse_index(rows[k][0], path) != k) throw Error(ErrorCode::format, path.string() + ": batch indices not consecutive");
    t.bearing_deg.push_back(parse_double(rows[k][1], path));
    const double db = parse_double(rows[k][2], path);
    t.snr.push_back(std::isinf(db) && db < 0 ? 0.0 : std::pow(10.0, db / 10.0));
    t.range_m.push_back(parse_double(rows[k][3], path));
    t.time_s.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  return t;
}

void write_track_log(const fs::path& path, const TrackLog& log) {
  auto os = open_out(path);
  os << kTrackHeader << '\n';
  for (const auto& p : log) {
    os << p.batch << ',' << format_double(p.time_s) << ',' << format_double(p.existence) << ',';
    if (p.estimate)
      os << format_double(p.estimate->bearing_deg) << ',' << format_double(p.estimate->bearing_rate_dps)
         << ',' << format_double(p.estimate->snr_db);
    else
      os << ",,";
    os << ',' << (p.confirmed ? 1 : 0) << '\n';
  }
  close_checked(os, path);
}

TrackLog read_track_log(const fs::path& path) {
  TrackLog log;
  for (const auto& r : read_csv(path, kTrackHeader)) {
    TrackPoint p;
    p.batch = parse_index(r[0], path);
    p.time_s = parse_double(r[1], path);
    p.existence = parse_double(r[2], path);
    if (!r[3].empty())
      p.estimate = TargetState{parse_double(r[3], path), parse_double(r[4], path), parse_double(r[5], path)};
    if (r[6] != "0" && r[6] != "1") throw Error(ErrorCode::format, path.string() + ": confirmed must be 0 or 1");
    p.confirmed = r[6] == "1";
    log.push_back(p);
  }
  return log;
}

void write_detections_csv(const fs::path& path, std::span<const DetectionSet> detections) {
  auto os = open_out(path);
  os << "batch_index,bearing_deg\n";
  for (std::size_t k = 0; k < detections.size(); ++k)
    for (double b : detections[k].bearings_deg) os << k << ',' << format_double(b) << '\n';
  close_checked(os, path);
}

void write_run_metrics(const fs::path& path, const RunReport& report) {
  auto os = open_out(path);
  std::optional<double> range, snr, batch;
  if (report.detection) {
    range = report.detection->range_m;
    snr = report.detection->snr_db;
  }
  if (report.first_detection) batch = static_cast<double>(*report.first_detection);
  os << "first_detection_batch,detection_range_m,detection_snr_db,flips,confirmed_batches\n"
     << optional_cell(batch) << ',' << optional_cell(range) << ',' << optional_cell(snr) << ','
     << report.flips << ',' << report.confirmed_batches << "\n\n";
  os << "batch_index,ospa_deg,q\n";
  for (std::size_t k = 0; k < report.ospa.size(); ++k)
    os << k << ',' << format_double(report.ospa[k]) << ',' << format_double(report.existence[k]) << '\n';
  close_checked(os, path);
}

void write_quantile_csv(const fs::path& path, std::span<const QuantileBand> ospa,
                        std::span<const QuantileBand> existence) {
  if (ospa.size() != existence.size())
    throw Error(ErrorCode::dimension_mismatch, "quantile series differ in length");
  auto os = open_out(path);
  os << "batch_index,ospa_p10,ospa_p50,ospa_p90,q_p10,q_p50,q_p90\n";
  for (std::size_t k = 0; k < ospa.size(); ++k)
    os << k << ',' << format_double(ospa[k].p10) << ',' << format_double(ospa[k].p50) << ','
       << format_double(ospa[k].p90) << ',' << format_double(existence[k].p10) << ','
       << format_double(existence[k].p50) << ',' << format_double(existence[k].p90) << '\n';
  close_checked(os, path);
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m, std::span<const double> header) {
  auto os = open_out(path);
  auto row_out = [&](auto get, Eigen::Index n) {
    for (Eigen::Index c = 0; c < n; ++c) os << (c ? "," : "") << format_double(get(c));
    os << '\n';
  };
  if (!header.empty()) row_out([&](Eigen::Index c) { return header[static_cast<std::size_t>(c)]; },
                               static_cast<Eigen::Index>(header.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) row_out([&](Eigen::Index c) { return m(r, c); }, m.cols());
  close_checked(os, path);
}

}  // namespace tkbd
