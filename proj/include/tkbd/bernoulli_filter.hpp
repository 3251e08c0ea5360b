#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tkbd/array.hpp"
#include "tkbd/likelihood.hpp"

namespace tkbd {

struct Particle {
  TargetState state;
  double weight = 0.0;
};

// Bernoulli posterior: existence probability q and a weighted particle
// approximation of the state density given existence.
struct BernoulliBelief {
  double existence = 0.0;
  std::vector<Particle> particles;
};

struct FilterParams {
  double birth_prob = 2e-10;          // p_b
  double survival_prob = 1.0 - 1e-6;  // p_s
  double period_s = 0.17;             // T
  double accel_noise = 0.13;          // q_CV, deg/s^2
  double snr_noise = 0.05;            // q_dBSNR, dB/s
  double rate_var = 0.001;            // P_psidot, deg^2/s^2
  double confirm_threshold = 0.9;     // gamma
  std::size_t persistent_particles = 2000;
  std::size_t birth_particles = 500;
  double snr_prior_lo_db = -20.0;
  double snr_prior_hi_db = -10.0;
  double bearing_min = -90.0;
  double bearing_max = 90.0;

  // Defaults for simulated data.
  static FilterParams simulation();

  void validate() const;
};

// ln L(z_{k-1} | psi, eta_dB) tabulated on cells of a bearing x SNR grid,
// together with the evaluator it was built from (absent for uniform fields).
class LikelihoodField {
 public:
  // Cell centers on the bearing grid and 1 dB SNR cells covering [lo, hi].
  static LikelihoodField uniform(const BearingGrid& bearings, double snr_lo_db, double snr_hi_db,
                                 double snr_step_db = 1.0);
  static LikelihoodField from(std::shared_ptr<const LikelihoodEvaluator> lr,
                              const BearingGrid& bearings, double snr_lo_db, double snr_hi_db,
                              double snr_step_db = 1.0);

  std::size_t bearing_cells() const noexcept { return bearing_lo_.size(); }
  std::size_t snr_cells() const noexcept { return snr_lo_.size(); }
  double log_value(std::size_t i, std::size_t j) const { return log_values_[i * snr_cells() + j]; }
  std::span<const double> log_values() const noexcept { return log_values_; }

  // Cell extents, [lo, hi).
  double bearing_lo(std::size_t i) const { return bearing_lo_[i]; }
  double bearing_hi(std::size_t i) const { return bearing_hi_[i]; }
  double snr_lo(std::size_t j) const { return snr_lo_[j]; }
  double snr_hi(std::size_t j) const { return snr_hi_[j]; }

  // ln L at an arbitrary state; 0 for a uniform field.
  double evaluate(const TargetState& x) const { return source_ ? source_->log_lr(x) : 0.0; }

  // Replace the tabulated values; used to build fields in tests.
  void set_log_values(std::vector<double> values);

 private:
  LikelihoodField(const BearingGrid& bearings, double snr_lo_db, double snr_hi_db, double step);

  std::vector<double> bearing_lo_, bearing_hi_, bearing_mid_;
  std::vector<double> snr_lo_, snr_hi_, snr_mid_;
  std::vector<double> log_values_;
  std::shared_ptr<const LikelihoodEvaluator> source_;
};

// Constant-velocity bearing, random-walk SNR; bearing reflected into
// [bearing_min, bearing_max].
TargetState motion_step(const TargetState& x, const FilterParams& params, std::mt19937_64& rng);

// Draw n newborn states: (psi, eta_dB) proportional to exp(ln L) * cell area
// with uniform jitter inside the cell, psi-dot ~ N(0, P_psidot).
std::vector<TargetState> sample_birth(const LikelihoodField& field, const FilterParams& params,
                                      std::size_t n, std::mt19937_64& rng);

// Time update.
void predict(BernoulliBelief& belief, const FilterParams& params, const LikelihoodField& birth,
             std::mt19937_64& rng);

struct UpdateInfo {
  double log_mean_lr = 0.0;  // ln sum_i w_i l_i
  bool skipped = false;      // uninformative measurement
  bool collapsed = false;    // every l_i was zero
  bool resampled = false;
};

// Measurement update followed by systematic resampling to the persistent
// particle count.
UpdateInfo update(BernoulliBelief& belief, const LikelihoodEvaluator& lr,
                  const FilterParams& params, std::mt19937_64& rng);

struct Estimate {
  TargetState state;
  double existence = 0.0;
  bool confirmed = false;
};

std::optional<Estimate> extract(const BernoulliBelief& belief, const FilterParams& params);

// Indices of n draws by systematic resampling (single uniform offset).
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n,
                                             std::mt19937_64& rng);

double effective_sample_size(std::span<const Particle> particles);

}  // namespace tkbd
