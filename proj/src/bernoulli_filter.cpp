#include "tkbd/bernoulli_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tkbd/error.hpp"
#include "tkbd/kernels.hpp"

namespace tkbd {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize(std::vector<Particle>& ps) {
  double sum = 0.0;
  for (const auto& p : ps) sum += p.weight;
  if (!(sum > 0.0)) return;
  for (auto& p : ps) p.weight /= sum;
}

}  // namespace

FilterParams FilterParams::simulation() {
  FilterParams p;
  p.survival_prob = 0.99347;
  p.birth_prob = 4.56e-8;
  return p;
}

void FilterParams::validate() const {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(birth_prob) || !prob(survival_prob) || !prob(confirm_threshold))
    throw Error(ErrorCode::invalid_argument, "filter probabilities must lie in [0, 1]");
  if (!(period_s > 0.0)) throw Error(ErrorCode::invalid_argument, "batch period must be positive");
  if (!(accel_noise >= 0.0) || !(snr_noise >= 0.0) || !(rate_var >= 0.0))
    throw Error(ErrorCode::invalid_argument, "process noise must be non-negative");
  if (persistent_particles == 0 || birth_particles == 0)
    throw Error(ErrorCode::invalid_argument, "particle counts must be positive");
  if (!(snr_prior_lo_db < snr_prior_hi_db))
    throw Error(ErrorCode::invalid_argument, "SNR prior needs lo < hi");
  if (!(bearing_min < bearing_max))
    throw Error(ErrorCode::invalid_argument, "bearing interval is empty");
}

// ---- likelihood field -------------------------------------------------------

LikelihoodField::LikelihoodField(const BearingGrid& bearings, double snr_lo_db,
                                 double snr_hi_db, double step) {
  const std::size_t nb = bearings.size();
  if (nb == 0) throw Error(ErrorCode::invalid_argument, "birth field needs a non-empty bearing grid");
  if (!(snr_lo_db < snr_hi_db) || !(step > 0.0))
    throw Error(ErrorCode::invalid_argument, "birth field needs lo < hi and a positive SNR step");
  const double half = 0.5 * bearings.step;
  const double lo_edge = bearings.start, hi_edge = bearings.at(nb - 1);
  for (std::size_t i = 0; i < nb; ++i) {
    const double c = bearings.at(i);
    bearing_mid_.push_back(c);
    bearing_lo_.push_back(std::max(lo_edge, c - half));
    bearing_hi_.push_back(std::min(hi_edge, c + half));
  }
  const auto ns = static_cast<std::size_t>(std::ceil((snr_hi_db - snr_lo_db) / step - 1e-9));
  for (std::size_t j = 0; j < ns; ++j) {
    const double lo = snr_lo_db + step * static_cast<double>(j);
    const double hi = std::min(snr_hi_db, lo + step);
    snr_lo_.push_back(lo);
    snr_hi_.push_back(hi);
    snr_mid_.push_back(0.5 * (lo + hi));
  }
  log_values_.assign(nb * ns, 0.0);
}

LikelihoodField LikelihoodField::uniform(const BearingGrid& bearings, double snr_lo_db,
                                         double snr_hi_db, double snr_step_db) {
  return LikelihoodField(bearings, snr_lo_db, snr_hi_db, snr_step_db);
}

LikelihoodField LikelihoodField::from(std::shared_ptr<const LikelihoodEvaluator> lr,
                                      const BearingGrid& bearings, double snr_lo_db,
                                      double snr_hi_db, double snr_step_db) {
  LikelihoodField f(bearings, snr_lo_db, snr_hi_db, snr_step_db);
  if (lr && lr->informative()) {
    lr->log_lr_grid(f.bearing_mid_, f.snr_mid_, f.log_values_);
    f.source_ = std::move(lr);
  }
  return f;
}

void LikelihoodField::set_log_values(std::vector<double> values) {
  if (values.size() != log_values_.size())
    throw Error(ErrorCode::dimension_mismatch, "field value count does not match the grid");
  log_values_ = std::move(values);
}

// ---- motion and birth -------------------------------------------------------

TargetState motion_step(const TargetState& x, const FilterParams& params, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double t = params.period_s;
  const double accel = params.accel_noise * normal(rng);
  const double drift = params.snr_noise * normal(rng);
  TargetState out;
  out.bearing_deg = x.bearing_deg + t * x.bearing_rate_dps + 0.5 * t * t * accel;
  out.bearing_rate_dps = x.bearing_rate_dps + t * accel;
  out.snr_db = x.snr_db + t * drift;
  for (int guard = 0; guard < 8; ++guard) {
    if (out.bearing_deg > params.bearing_max) {
      out.bearing_deg = 2.0 * params.bearing_max - out.bearing_deg;
      out.bearing_rate_dps = -out.bearing_rate_dps;
    } else if (out.bearing_deg < params.bearing_min) {
      out.bearing_deg = 2.0 * params.bearing_min - out.bearing_deg;
      out.bearing_rate_dps = -out.bearing_rate_dps;
    } else {
      break;
    }
  }
  out.bearing_deg = std::clamp(out.bearing_deg, params.bearing_min, params.bearing_max);
  return out;
}

std::vector<TargetState> sample_birth(const LikelihoodField& field, const FilterParams& params,
                                      std::size_t n, std::mt19937_64& rng) {
  const std::size_t nb = field.bearing_cells(), ns = field.snr_cells();
  const auto logs = field.log_values();
  double peak = kNegInf;
  for (double v : logs)
    if (std::isfinite(v)) peak = std::max(peak, v);

  std::vector<double> cdf(nb * ns);
  double total = 0.0;
  const bool flat = !std::isfinite(peak);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      const double area = (field.bearing_hi(i) - field.bearing_lo(i)) *
                          (field.snr_hi(j) - field.snr_lo(j));
      const double v = logs[i * ns + j];
      const double w = flat ? area : (std::isnan(v) ? 0.0 : std::exp(v - peak) * area);
      total += w;
      cdf[i * ns + j] = total;
    }
  }
  if (!(total > 0.0)) {
    // Degenerate field: fall back to uniform cell weights.
    total = 0.0;
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t j = 0; j < ns; ++j) {
        total += (field.bearing_hi(i) - field.bearing_lo(i)) * (field.snr_hi(j) - field.snr_lo(j));
        cdf[i * ns + j] = total;
      }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> rate(0.0, std::sqrt(params.rate_var));
  std::vector<TargetState> out(n);
  for (auto& x : out) {
    const double u = unit(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto cell = static_cast<std::size_t>(it - cdf.begin());
    const std::size_t i = cell / ns, j = cell % ns;
    x.bearing_deg = field.bearing_lo(i) + unit(rng) * (field.bearing_hi(i) - field.bearing_lo(i));
    x.snr_db = field.snr_lo(j) + unit(rng) * (field.snr_hi(j) - field.snr_lo(j));
    x.bearing_rate_dps = rate(rng);
  }
  return out;
}

// ---- recursion --------------------------------------------------------------

void predict(BernoulliBelief& belief, const FilterParams& params, const LikelihoodField& birth,
             std::mt19937_64& rng) {
  const double q0 = std::clamp(belief.existence, 0.0, 1.0);
  const double qn = params.birth_prob * (1.0 - q0) + params.survival_prob * q0;
  if (!(qn > 0.0)) {
    belief.existence = 0.0;
    belief.particles.clear();
    return;
  }
  const double survive_share = params.survival_prob * q0 / qn;
  const double birth_share = params.birth_prob * (1.0 - q0) / qn;

  std::vector<Particle> next;
  next.reserve(belief.particles.size() + params.birth_particles);
  if (survive_share > 0.0)
    for (const auto& p : belief.particles)
      next.push_back({motion_step(p.state, params, rng), p.weight * survive_share});
  if (birth_share > 0.0) {
    const double w = birth_share / static_cast<double>(params.birth_particles);
    for (const auto& x : sample_birth(birth, params, params.birth_particles, rng))
      next.push_back({x, w});
  }
  normalize(next);
  belief.particles = std::move(next);
  belief.existence = std::min(qn, 1.0);
}

double effective_sample_size(std::span<const Particle> particles) {
  double s = 0.0, s2 = 0.0;
  for (const auto& p : particles) {
    s += p.weight;
    s2 += p.weight * p.weight;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n,
                                             std::mt19937_64& rng) {
  std::vector<std::size_t> idx;
  if (weights.empty() || n == 0) return idx;
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw Error(ErrorCode::numerical_domain, "cannot resample zero weights");
  idx.reserve(n);
  const double step = total / static_cast<double>(n);
  double u = std::uniform_real_distribution<double>(0.0, step)(rng);
  double cum = weights[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (u > cum && i + 1 < weights.size()) cum += weights[++i];
    idx.push_back(i);
    u += step;
  }
  return idx;
}

UpdateInfo update(BernoulliBelief& belief, const LikelihoodEvaluator& lr,
                  const FilterParams& params, std::mt19937_64& rng) {
  UpdateInfo info;
  if (!lr.informative() || belief.particles.empty()) {
    info.skipped = true;
    return info;
  }
  auto& ps = belief.particles;
  std::vector<TargetState> states(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) states[i] = ps[i].state;
  std::vector<double> log_l(ps.size());
  kernels::log_lr(lr, states, log_l);

  // Work in log space: l_i spans many orders of magnitude at high SNR.
  double peak = kNegInf;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (std::isnan(log_l[i])) throw Error(ErrorCode::numerical_domain, "likelihood ratio is NaN");
    log_l[i] += ps[i].weight > 0.0 ? std::log(ps[i].weight) : kNegInf;
    peak = std::max(peak, log_l[i]);
  }
  if (!std::isfinite(peak)) {
    info.collapsed = true;
    info.log_mean_lr = kNegInf;
    belief.existence = 0.0;
    ps.clear();
    return info;
  }
  double acc = 0.0;
  for (double v : log_l) acc += std::exp(v - peak);
  const double log_i = peak + std::log(acc);
  info.log_mean_lr = log_i;

  const double q = belief.existence;
  if (q > 0.0 && q < 1.0) {
    const double logit = std::log(q) - std::log1p(-q) + log_i;
    belief.existence = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit))
                                    : std::exp(logit) / (1.0 + std::exp(logit));
  }
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].weight = std::exp(log_l[i] - log_i);
  normalize(ps);

  const std::size_t target = params.persistent_particles;
  if (ps.size() > target ||
      effective_sample_size(ps) < 0.5 * static_cast<double>(target)) {
    std::vector<double> w(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) w[i] = ps[i].weight;
    const auto idx = systematic_resample(w, target, rng);
    std::vector<Particle> next(idx.size());
    const double uw = 1.0 / static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) next[k] = {ps[idx[k]].state, uw};
    ps = std::move(next);
    info.resampled = true;
  }
  return info;
}

std::optional<Estimate> extract(const BernoulliBelief& belief, const FilterParams& params) {
  if (belief.particles.empty()) return std::nullopt;
  Estimate e;
  double wsum = 0.0;
  for (const auto& p : belief.particles) {
    e.state.bearing_deg += p.weight * p.state.bearing_deg;
    e.state.bearing_rate_dps += p.weight * p.state.bearing_rate_dps;
    e.state.snr_db += p.weight * p.state.snr_db;
    wsum += p.weight;
  }
  if (wsum > 0.0) {
    e.state.bearing_deg /= wsum;
    e.state.bearing_rate_dps /= wsum;
    e.state.snr_db /= wsum;
  }
  e.existence = belief.existence;
  e.confirmed = belief.existence > params.confirm_threshold;
  return e;
}

}  // namespace tkbd
