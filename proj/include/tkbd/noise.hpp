#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <vector>

namespace tkbd {

// VAR(p) ambient-noise model
//   e_n = A_1 e_{n-1} + ... + A_p e_{n-p} + F w_n,   cov(w_n) = I,  F F^T = Sigma_w,
// with F the lower Cholesky factor of Sigma_w.
class VarModel {
 public:
  VarModel(std::vector<Eigen::MatrixXd> coeffs, Eigen::MatrixXd innovation_cov);

  std::size_t order() const noexcept { return coeffs_.size(); }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(innovation_cov_.rows()); }
  const std::vector<Eigen::MatrixXd>& coeffs() const noexcept { return coeffs_; }
  const Eigen::MatrixXd& coeff(std::size_t i) const { return coeffs_.at(i); }
  const Eigen::MatrixXd& innovation_cov() const noexcept { return innovation_cov_; }
  const Eigen::MatrixXd& whitener_factor() const noexcept { return factor_; }

  // Largest eigenvalue modulus of the companion matrix.
  double spectral_radius() const;
  bool is_stable() const { return spectral_radius() < 1.0; }

 private:
  std::vector<Eigen::MatrixXd> coeffs_;
  Eigen::MatrixXd innovation_cov_;
  Eigen::MatrixXd factor_;
};

// Least-squares VAR(p) fit on a T x M sample matrix (rows are time).
// Sigma_w is normalized by 1/(T - p - 1).
VarModel fit_var(const Eigen::MatrixXd& data, int order);

struct OrderSelection {
  std::size_t order = 0;
  std::vector<double> aic;  // aic[p] for p = 0..p_max
};

// argmin over p in [0, p_max] of T ln det Sigma_w(p) + 2 p M^2.
OrderSelection select_order(const Eigen::MatrixXd& data, int max_order);

// Causal streaming inverse of the VAR recursion. Holds the last p inputs.
class WhitenState {
 public:
  WhitenState() = default;
  explicit WhitenState(const VarModel& model);

  std::size_t seen() const noexcept { return seen_; }
  bool warmed_up() const noexcept { return seen_ >= order_; }
  const std::deque<Eigen::VectorXd>& history() const noexcept { return history_; }
  void push(const Eigen::VectorXd& y);

 private:
  std::size_t order_ = 0;
  std::size_t seen_ = 0;
  std::deque<Eigen::VectorXd> history_;  // front = y_{n-1}
};

struct WhitenedSample {
  Eigen::VectorXd value;
  bool warm_up = false;  // produced before p inputs were available
};

// w_n = F^{-1}(y_n - sum_i A_i y_{n-i}); missing history counts as zero.
WhitenedSample whiten(const VarModel& model, WhitenState& state, const Eigen::VectorXd& y);

// Whiten a block of rows, advancing the state. Returns the number of leading
// rows that were produced during warm-up.
std::size_t whiten_block(const VarModel& model, WhitenState& state,
                         const Eigen::MatrixXd& in, Eigen::MatrixXd& out);

// Forward VAR recursion driven by standard-normal innovations; keeps its state
// so consecutive calls form one continuous stream.
class VarStream {
 public:
  VarStream(const VarModel& model, std::uint64_t seed);

  // Next T x M block of samples.
  Eigen::MatrixXd next(std::size_t rows);

  std::mt19937_64& rng() noexcept { return rng_; }

 private:
  VarModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::deque<Eigen::VectorXd> history_;
};

// T samples of a stable model, after discarding max(10p, 1000) burn-in rows.
Eigen::MatrixXd simulate_var(const VarModel& model, std::size_t rows, std::uint64_t seed);

// Burn-in length used by simulate_var and VarStream.
std::size_t burn_in_length(const VarModel& model);

// Stationary lag-0 covariance E[e_n e_n^T] of a stable model.
Eigen::MatrixXd stationary_covariance(const VarModel& model);

// p = 0 model with Sigma_w equal to the stationary covariance: whitens the
// spatial correlation only.
VarModel spatial_only(const VarModel& model);

// Binary model file; layout documented in docs/formats.md.
void save_var_model(const VarModel& model, const std::filesystem::path& path);
VarModel load_var_model(const std::filesystem::path& path);

}  // namespace tkbd
