#pragma once

#include <span>

namespace tkbd {

// Bearing-only target state with a log-scale SNR.
struct TargetState {
  double bearing_deg = 0.0;       // psi
  double bearing_rate_dps = 0.0;  // psi-dot, degrees per second
  double snr_db = 0.0;            // eta in dB
};

// Log-likelihood ratio ln L(z_k | x) of one measurement, as seen by the
// Bernoulli filter. Concrete evaluators differ only in the measurement model.
class LikelihoodEvaluator {
 public:
  virtual ~LikelihoodEvaluator() = default;

  virtual double log_lr(const TargetState& x) const = 0;

  // False when the measurement carries no information (e.g. whitener warm-up);
  // the filter then skips the update.
  virtual bool informative() const { return true; }

  // ln L over a bearing x SNR grid, out[i * snr.size() + j]. Evaluators whose
  // cost is dominated by an SNR-independent term override this to share it.
  virtual void log_lr_grid(std::span<const double> bearings_deg,
                           std::span<const double> snr_db,
                           std::span<double> out) const;
};

}  // namespace tkbd
