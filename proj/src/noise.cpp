#include "tkbd/noise.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "tkbd/error.hpp"

namespace tkbd {
namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd companion(const VarModel& model) {
  const auto m = static_cast<Eigen::Index>(model.channels());
  const auto p = static_cast<Eigen::Index>(model.order());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m * p, m * p);
  for (Eigen::Index i = 0; i < p; ++i) c.block(0, i * m, m, m) = model.coeff(static_cast<std::size_t>(i));
  if (p > 1) c.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
  return c;
}

double log_det_spd(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::not_positive_definite, "matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

VarModel::VarModel(std::vector<Eigen::MatrixXd> coeffs, Eigen::MatrixXd innovation_cov)
    : coeffs_(std::move(coeffs)), innovation_cov_(std::move(innovation_cov)) {
  const auto m = innovation_cov_.rows();
  if (m == 0 || innovation_cov_.cols() != m)
    throw Error(ErrorCode::dimension_mismatch, "innovation covariance must be square and non-empty");
  for (const auto& a : coeffs_)
    if (a.rows() != m || a.cols() != m)
      throw Error(ErrorCode::dimension_mismatch, "VAR coefficient has the wrong shape");
  if (!innovation_cov_.allFinite())
    throw Error(ErrorCode::not_positive_definite, "innovation covariance is not finite");
  innovation_cov_ = symmetrized(innovation_cov_);
  Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov_);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::not_positive_definite, "innovation covariance is not positive definite");
  factor_ = llt.matrixL();
  if ((factor_.diagonal().array() <= 0.0).any())
    throw Error(ErrorCode::not_positive_definite, "innovation covariance is singular");
}

double VarModel::spectral_radius() const {
  if (coeffs_.empty()) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion(*this), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

VarModel fit_var(const Eigen::MatrixXd& data, int order) {
  if (order < 0) throw Error(ErrorCode::invalid_order, "VAR order must be non-negative");
  const auto t = data.rows();
  const auto m = data.cols();
  const auto p = static_cast<Eigen::Index>(order);
  if (m == 0) throw Error(ErrorCode::dimension_mismatch, "data has no channels");
  if (t <= p * m + p + 1)
    throw Error(ErrorCode::insufficient_data,
                "VAR(" + std::to_string(order) + ") fit needs more than " +
                    std::to_string(p * m + p + 1) + " rows, got " + std::to_string(t));
  if (!data.allFinite()) throw Error(ErrorCode::invalid_argument, "data contains non-finite samples");

  const Eigen::Index rows = t - p;
  std::vector<Eigen::MatrixXd> coeffs;
  Eigen::MatrixXd resid;
  if (p == 0) {
    resid = data;
  } else {
    const Eigen::Index k = m * p;
    // Normal equations assembled from lagged block products; the regressor
    // matrix itself is never formed.
    Eigen::MatrixXd gram(k, k);
    Eigen::MatrixXd cross(k, m);
    for (Eigen::Index i = 1; i <= p; ++i) {
      const auto yi = data.middleRows(p - i, rows);
      cross.block((i - 1) * m, 0, m, m).noalias() = yi.transpose() * data.middleRows(p, rows);
      for (Eigen::Index j = i; j <= p; ++j) {
        Eigen::MatrixXd blk = yi.transpose() * data.middleRows(p - j, rows);
        gram.block((i - 1) * m, (j - 1) * m, m, m) = blk;
        gram.block((j - 1) * m, (i - 1) * m, m, m) = blk.transpose();
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const bool singular = ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14);
    if (singular) {
      const double lambda = 1e-10 * gram.trace();
      if (!(lambda > 0.0))
        throw Error(ErrorCode::singular_fit, "regressor matrix is identically zero");
      gram.diagonal().array() += lambda;
      ldlt.compute(gram);
      if (ldlt.info() != Eigen::Success)
        throw Error(ErrorCode::singular_fit, "regularized normal equations failed");
    }
    const Eigen::MatrixXd stacked = ldlt.solve(cross);  // (mp) x m, = [A_1^T; ...; A_p^T]
    resid = data.middleRows(p, rows);
    for (Eigen::Index i = 1; i <= p; ++i) {
      Eigen::MatrixXd a = stacked.middleRows((i - 1) * m, m).transpose();
      resid.noalias() -= data.middleRows(p - i, rows) * a.transpose();
      coeffs.push_back(std::move(a));
    }
  }
  Eigen::MatrixXd sigma = resid.transpose() * resid / static_cast<double>(t - p - 1);
  try {
    return VarModel(std::move(coeffs), symmetrized(sigma));
  } catch (const Error& e) {
    throw Error(ErrorCode::singular_fit,
                std::string("residual covariance is singular (") + e.what() +
                    "); check for constant or duplicated channels");
  }
}

OrderSelection select_order(const Eigen::MatrixXd& data, int max_order) {
  if (max_order < 0) throw Error(ErrorCode::invalid_order, "maximum order must be non-negative");
  const double t = static_cast<double>(data.rows());
  const double m = static_cast<double>(data.cols());
  OrderSelection sel;
  double best = 0.0;
  for (int p = 0; p <= max_order; ++p) {
    const auto model = fit_var(data, p);
    const double aic = t * log_det_spd(model.innovation_cov()) + 2.0 * p * m * m;
    sel.aic.push_back(aic);
    if (p == 0 || aic < best) {
      best = aic;
      sel.order = static_cast<std::size_t>(p);
    }
  }
  return sel;
}

WhitenState::WhitenState(const VarModel& model) : order_(model.order()) {}

void WhitenState::push(const Eigen::VectorXd& y) {
  ++seen_;
  if (order_ == 0) return;
  history_.push_front(y);
  if (history_.size() > order_) history_.pop_back();
}

WhitenedSample whiten(const VarModel& model, WhitenState& state, const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(y.size()) != model.channels())
    throw Error(ErrorCode::dimension_mismatch, "sample width does not match VAR model");
  Eigen::VectorXd r = y;
  const auto& hist = state.history();
  for (std::size_t i = 0; i < hist.size() && i < model.order(); ++i)
    r.noalias() -= model.coeff(i) * hist[i];
  WhitenedSample out;
  out.value = model.whitener_factor().triangularView<Eigen::Lower>().solve(r);
  out.warm_up = !state.warmed_up();
  state.push(y);
  return out;
}

std::size_t whiten_block(const VarModel& model, WhitenState& state,
                         const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
  out.resize(in.rows(), in.cols());
  std::size_t warm = 0;
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    auto w = whiten(model, state, in.row(r).transpose());
    out.row(r) = w.value.transpose();
    if (w.warm_up) ++warm;
  }
  return warm;
}

std::size_t burn_in_length(const VarModel& model) {
  return std::max<std::size_t>(10 * model.order(), 1000);
}

VarStream::VarStream(const VarModel& model, std::uint64_t seed) : model_(model), rng_(seed) {
  if (!model.is_stable())
    throw Error(ErrorCode::unstable_model,
                "VAR model is unstable (spectral radius " + std::to_string(model.spectral_radius()) + ")");
  next(burn_in_length(model));
}

Eigen::MatrixXd VarStream::next(std::size_t rows) {
  const auto m = static_cast<Eigen::Index>(model_.channels());
  const std::size_t p = model_.order();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), m);
  Eigen::VectorXd w(m);
  for (std::size_t r = 0; r < rows; ++r) {
    for (Eigen::Index i = 0; i < m; ++i) w[i] = normal_(rng_);
    Eigen::VectorXd e = model_.whitener_factor() * w;
    for (std::size_t i = 0; i < history_.size(); ++i) e.noalias() += model_.coeff(i) * history_[i];
    out.row(static_cast<Eigen::Index>(r)) = e.transpose();
    if (p > 0) {
      history_.push_front(std::move(e));
      if (history_.size() > p) history_.pop_back();
    }
  }
  return out;
}

Eigen::MatrixXd simulate_var(const VarModel& model, std::size_t rows, std::uint64_t seed) {
  VarStream stream(model, seed);
  return stream.next(rows);
}

Eigen::MatrixXd stationary_covariance(const VarModel& model) {
  if (model.order() == 0) return model.innovation_cov();
  if (!model.is_stable())
    throw Error(ErrorCode::unstable_model, "stationary covariance needs a stable VAR model");
  const auto m = static_cast<Eigen::Index>(model.channels());
  Eigen::MatrixXd a = companion(model);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  p.topLeftCorner(m, m) = model.innovation_cov();
  // Doubling iteration for P = A P A^T + Q: after j steps P sums 2^j terms.
  for (int it = 0; it < 200; ++it) {
    p += a * p * a.transpose();
    a = a * a;
    if (a.cwiseAbs().maxCoeff() < 1e-15) break;
  }
  return symmetrized(p.topLeftCorner(m, m));
}

VarModel spatial_only(const VarModel& model) { return VarModel({}, stationary_covariance(model)); }

// ---- model file -----------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic{'T', 'K', 'B', 'D', 'V', 'A', 'R', '\0'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(b.data(), b.size());
}

template <typename T>
T read_le(std::istream& is) {
  std::array<char, sizeof(T)> b;
  if (!is.read(b.data(), b.size())) throw Error(ErrorCode::format, "model file is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& a) {
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) write_le<double>(os, a(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& is, Eigen::Index m) {
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) = read_le<double>(is);
  return a;
}

}  // namespace

void save_var_model(const VarModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  write_le<std::uint8_t>(os, kVersion);
  write_le<std::uint8_t>(os, 0);
  write_le<std::uint16_t>(os, 0);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.order()));
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.channels()));
  for (const auto& a : model.coeffs()) write_matrix(os, a);
  write_matrix(os, model.innovation_cov());
  if (!os) throw Error(ErrorCode::io, "failed writing " + path.string());
}

VarModel load_var_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorCode::format, path.string() + " is not a VAR model file");
  const auto version = read_le<std::uint8_t>(is);
  if (version != kVersion)
    throw Error(ErrorCode::format, "unsupported VAR model file version " + std::to_string(version));
  read_le<std::uint8_t>(is);
  read_le<std::uint16_t>(is);
  const auto p = read_le<std::uint32_t>(is);
  const auto m = static_cast<Eigen::Index>(read_le<std::uint32_t>(is));
  if (m == 0 || m > 4096 || p > 4096) throw Error(ErrorCode::format, "implausible VAR model dimensions");
  std::vector<Eigen::MatrixXd> coeffs;
  for (std::uint32_t i = 0; i < p; ++i) coeffs.push_back(read_matrix(is, m));
  Eigen::MatrixXd sigma = read_matrix(is, m);
  return VarModel(std::move(coeffs), std::move(sigma));
}

}  // namespace tkbd
