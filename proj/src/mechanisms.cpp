#include "dpsur/mechanisms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dpsur/normal.hpp"

namespace dpsur {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinWindowMass = 1e-12;
constexpr long kMaxReleaseDraws = 1'000'000;
}  // namespace

void ValidationMechanismSpec::validate() const {
  if (!(clip_bound > 0.0) || !std::isfinite(clip_bound))
    throw std::invalid_argument("ValidationMechanismSpec: C_v must be > 0");
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier))
    throw std::invalid_argument(
        "ValidationMechanismSpec: sigma_v must be >= 0");
  if (threshold_beta != threshold_beta)
    throw std::invalid_argument("ValidationMechanismSpec: beta is NaN");
}

double minimal_clip(double delta_e, double c_v) {
  if (!(c_v > 0.0)) throw std::invalid_argument("minimal_clip: C_v must be > 0");
  if (!std::isfinite(delta_e))
    throw std::invalid_argument("minimal_clip: non-finite loss difference");
  return delta_e < 0.0 ? -c_v : c_v;
}

double clip_loss_diff(double delta_e, double c_v, LossClipMode mode) {
  if (mode == LossClipMode::sign_discretize) return minimal_clip(delta_e, c_v);
  if (!(c_v > 0.0))
    throw std::invalid_argument("clip_loss_diff: C_v must be > 0");
  if (!std::isfinite(delta_e))
    throw std::invalid_argument("clip_loss_diff: non-finite loss difference");
  return std::min(std::max(delta_e, -c_v), c_v);
}

ThresholdTestResult noisy_threshold_test(double delta_e,
                                         const ValidationMechanismSpec& spec,
                                         RngStream& rng) {
  spec.validate();
  const double clipped = clip_loss_diff(delta_e, spec.clip_bound, spec.clip_mode);
  const double noisy =
      clipped + spec.sensitivity() * spec.noise_multiplier * rng.gaussian();
  return {noisy < spec.threshold(), noisy};
}

double acceptance_probability(LossSign sign, double beta, double sigma_v) {
  if (!(sigma_v > 0.0))
    throw std::invalid_argument("acceptance_probability: sigma_v must be > 0");
  if (beta != beta)
    throw std::invalid_argument("acceptance_probability: beta is NaN");
  const double offset = sign == LossSign::negative ? 1.0 : -1.0;
  return std_normal_cdf((beta + offset) / (2.0 * sigma_v));
}

void TruncatedGaussianSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("TruncatedGaussianSpec: scale must be > 0");
  if (!(lower < upper))
    throw std::invalid_argument("TruncatedGaussianSpec: requires lower < upper");
  if (!std::isfinite(mean))
    throw std::invalid_argument("TruncatedGaussianSpec: mean must be finite");
}

double TruncatedGaussianSpec::log_window_mass() const {
  return log_phi_interval((lower - mean) / scale, (upper - mean) / scale);
}

double TruncatedGaussianSpec::pdf(double x) const {
  if (x < lower || x > upper) return 0.0;
  const double z = (x - mean) / scale;
  return std::exp(-0.5 * z * z - log_window_mass()) /
         (scale * std::sqrt(2.0 * std::numbers::pi));
}

double TruncatedGaussianSpec::cdf(double x) const {
  if (x <= lower) return 0.0;
  if (x >= upper) return 1.0;
  const double lo = (lower - mean) / scale;
  const double hi = (x - mean) / scale;
  return std::exp(log_phi_interval(lo, hi) - log_window_mass());
}

double TruncatedGaussianSpec::mean_value() const {
  const double a = (lower - mean) / scale;
  const double b = (upper - mean) / scale;
  const double pa = std::isfinite(a) ? std_normal_pdf(a) : 0.0;
  const double pb = std::isfinite(b) ? std_normal_pdf(b) : 0.0;
  return mean + scale * (pa - pb) / std::exp(log_window_mass());
}

double TruncatedGaussianSpec::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("TruncatedGaussianSpec: p must be in (0,1)");
  const double lo_cdf =
      std::isfinite(lower) ? std_normal_cdf((lower - mean) / scale) : 0.0;
  const double hi_cdf =
      std::isfinite(upper) ? std_normal_cdf((upper - mean) / scale) : 1.0;
  const double target = lo_cdf + p * (hi_cdf - lo_cdf);
  return mean + scale * inverse_std_normal_cdf(target);
}

double selective_release(double true_value, double sensitivity, double sigma,
                         double lower, double upper, RngStream& rng) {
  if (!(sensitivity > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("selective_release: sensitivity and sigma > 0");
  if (!(true_value >= 0.0 && true_value <= sensitivity))
    throw std::invalid_argument(
        "selective_release: value must be pre-clipped to [0, sensitivity]");
  if (!(lower < upper))
    throw std::invalid_argument("selective_release: requires lower < upper");
  const double sd = sensitivity * sigma;
  const double log_mass =
      log_phi_interval((lower - true_value) / sd, (upper - true_value) / sd);
  if (!(log_mass > std::log(kMinWindowMass)))
    throw std::runtime_error(
        "selective_release: window mass below 1e-12, redraw loop would not "
        "terminate (log mass " + std::to_string(log_mass) + ")");
  for (long i = 0; i < kMaxReleaseDraws; ++i) {
    const double draw = true_value + sd * rng.gaussian();
    if (draw >= lower && draw <= upper) return draw;
  }
  throw std::runtime_error("selective_release: draw cap exhausted");
}

double truncated_renyi_divergence(DivergenceDirection direction, double mu,
                                  double sigma, double lower, double upper,
                                  double alpha) {
  if (!(mu > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("truncated_renyi_divergence: mu, sigma > 0");
  if (!(alpha > 1.0))
    throw std::invalid_argument("truncated_renyi_divergence: alpha > 1");
  if (!(lower < upper))
    throw std::invalid_argument("truncated_renyi_divergence: lower < upper");
  const double sd = mu * sigma;
  const double mean_first =
      direction == DivergenceDirection::zero_vs_mu ? 0.0 : mu;
  const double mean_second =
      direction == DivergenceDirection::zero_vs_mu ? mu : 0.0;
  const double shift = alpha * mean_first + (1.0 - alpha) * mean_second;
  const auto window = [&](double m) {
    const double lo = lower == -kInf ? -kInf : (lower - m) / sd;
    const double hi = upper == kInf ? kInf : (upper - m) / sd;
    return log_phi_interval(lo, hi);
  };
  const double log_second = window(mean_second);
  const double log_first = window(mean_first);
  const double log_shifted = window(shift);
  if (log_second == -kInf || log_first == -kInf)
    throw std::runtime_error(
        "truncated_renyi_divergence: numerically empty truncation window");
  return alpha / (2.0 * sigma * sigma) +
         ((alpha - 1.0) * log_second - alpha * log_first + log_shifted) /
             (alpha - 1.0);
}

TruncationBoundTerms truncation_bound_terms(double mu, double sigma, double b,
                                            double alpha) {
  if (!(mu > 0.0) || !(sigma > 0.0) || !(alpha > 1.0))
    throw std::invalid_argument(
        "truncation_bound_terms: mu, sigma > 0 and alpha > 1");
  const double sd = mu * sigma;
  const double log_phi_b = log_std_normal_cdf(b / sd);
  const double log_phi_b_mu = log_std_normal_cdf((b - mu) / sd);
  const double log_a = (alpha - 1.0) * log_phi_b_mu +
                       log_std_normal_cdf((b + (alpha - 1.0) * mu) / sd) -
                       alpha * log_phi_b;
  const double log_b = (alpha - 1.0) * log_phi_b +
                       log_std_normal_cdf((b - alpha * mu) / sd) -
                       alpha * log_phi_b_mu;
  return {log_a, log_b};
}

}  // namespace dpsur
