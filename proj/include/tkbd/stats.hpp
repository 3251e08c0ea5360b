#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace tkbd {

// Multivariate-t measurement model on a whitened N x M batch.
struct TModelParams {
  double dof = 12.0;        // nu, must exceed 2
  std::size_t samples = 64;  // N
  std::size_t channels = 8;  // M

  void validate() const;
};

struct LikelihoodInputs {
  double energy = 0.0;       // ||z||^2
  double beam_energy = 0.0;  // B(psi, z)
  double snr = 0.0;          // eta, linear
};

// ln L(z|x) = -(N/2) ln(M eta + 1) - ((nu + NM)/2) ln(1 - c B),
// c = eta / ((nu + ||z||^2)(1 + M eta)).
// Throws numerical_domain when c B >= 1.
double t_log_lr(const LikelihoodInputs& in, const TModelParams& params);

// Gaussian (nu -> infinity) limit:
// -(N/2) ln(M eta + 1) + eta B / (2 (1 + M eta)).
double gauss_log_lr(const LikelihoodInputs& in, std::size_t samples, std::size_t channels);

// Exact log-density of t_d(z; nu, 0, S), d = z.size(). Used as a test oracle.
double t_logpdf_full(const Eigen::VectorXd& z, double dof, const Eigen::MatrixXd& scale);

}  // namespace tkbd
