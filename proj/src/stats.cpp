#include "tkbd/stats.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

#include "tkbd/error.hpp"

namespace tkbd {

void TModelParams::validate() const {
  if (!(dof > 2.0)) throw Error(ErrorCode::invalid_argument, "t degrees of freedom must exceed 2");
  if (samples == 0 || channels == 0)
    throw Error(ErrorCode::invalid_argument, "t model needs positive N and M");
}

double t_log_lr(const LikelihoodInputs& in, const TModelParams& params) {
  const double n = static_cast<double>(params.samples);
  const double m = static_cast<double>(params.channels);
  const double eta = in.snr;
  if (!(eta >= 0.0)) throw Error(ErrorCode::invalid_argument, "SNR must be non-negative");
  if (eta == 0.0) return 0.0;
  const double c = eta / ((params.dof + in.energy) * (1.0 + m * eta));
  const double cb = c * in.beam_energy;
  if (!(cb < 1.0))
    throw Error(ErrorCode::numerical_domain,
                "c*B = " + std::to_string(cb) + " outside the t likelihood domain");
  return -0.5 * n * std::log1p(m * eta) - 0.5 * (params.dof + n * m) * std::log1p(-cb);
}

double gauss_log_lr(const LikelihoodInputs& in, std::size_t samples, std::size_t channels) {
  const double n = static_cast<double>(samples);
  const double m = static_cast<double>(channels);
  const double eta = in.snr;
  if (!(eta >= 0.0)) throw Error(ErrorCode::invalid_argument, "SNR must be non-negative");
  return -0.5 * n * std::log1p(m * eta) + eta * in.beam_energy / (2.0 * (1.0 + m * eta));
}

double t_logpdf_full(const Eigen::VectorXd& z, double dof, const Eigen::MatrixXd& scale) {
  if (!(dof > 0.0)) throw Error(ErrorCode::invalid_argument, "t degrees of freedom must be positive");
  const auto d = z.size();
  if (scale.rows() != d || scale.cols() != d)
    throw Error(ErrorCode::dimension_mismatch, "scale matrix shape does not match z");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::not_positive_definite, "t scale matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const Eigen::VectorXd u = l.triangularView<Eigen::Lower>().solve(z);
  const double maha = u.squaredNorm();
  const double dd = static_cast<double>(d);
  return std::lgamma(0.5 * (dof + dd)) - std::lgamma(0.5 * dof) -
         0.5 * dd * std::log(dof * std::numbers::pi) - 0.5 * log_det -
         0.5 * (dof + dd) * std::log1p(maha / dof);
}

}  // namespace tkbd
