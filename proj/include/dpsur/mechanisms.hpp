#pragma once

#include "dpsur/rng.hpp"

namespace dpsur {

// Loss-difference clipping. sign_discretize maps the difference to
// {-C_v, +C_v} by sign (the default); clamp keeps interior values.
enum class LossClipMode { sign_discretize, clamp };

// Parameters of the noisy validation test: the loss difference is clipped
// with bound C_v, perturbed with N(0, (2 C_v sigma_v)^2), and the candidate
// is accepted when the noisy value falls below Z = beta * C_v.
struct ValidationMechanismSpec {
  double clip_bound = 1e-3;        // C_v
  double noise_multiplier = 1.0;   // sigma_v
  double threshold_beta = -1.0;    // beta (Z = beta * C_v)
  LossClipMode clip_mode = LossClipMode::sign_discretize;

  double sensitivity() const { return 2.0 * clip_bound; }
  double threshold() const { return threshold_beta * clip_bound; }
  void validate() const;
};

// Sign-discretizing clip: -C_v for negative differences, +C_v otherwise.
// A difference of exactly 0 maps to +C_v, the rejection-favoring branch.
double minimal_clip(double delta_e, double c_v);

double clip_loss_diff(double delta_e, double c_v, LossClipMode mode);

struct ThresholdTestResult {
  bool accepted;
  double noisy_value;
};

ThresholdTestResult noisy_threshold_test(double delta_e,
                                         const ValidationMechanismSpec& spec,
                                         RngStream& rng);

enum class LossSign { negative, positive };

// Analytic acceptance probability of the threshold test under
// sign-discretizing clipping: Phi((beta+1)/(2 sigma_v)) for a negative
// difference, Phi((beta-1)/(2 sigma_v)) for a positive one. The clipping
// bound cancels and does not appear.
double acceptance_probability(LossSign sign, double beta, double sigma_v);

// A normal distribution restricted to [lower, upper] (either endpoint may
// be infinite); the output distribution of the selective-release mechanism.
struct TruncatedGaussianSpec {
  double mean = 0.0;
  double scale = 1.0;   // standard deviation of the parent normal
  double lower = 0.0;
  double upper = 0.0;

  void validate() const;
  double pdf(double x) const;
  double cdf(double x) const;
  double mean_value() const;  // analytic first moment
  double quantile(double p) const;
  double log_window_mass() const;  // ln parent-normal mass on [lower, upper]
};

// Gaussian mechanism with selective release: redraws
// true_value + N(0, (sensitivity*sigma)^2) until the draw lands in
// [lower, upper] and returns that draw. The number of internal redraws is
// not part of the result. Aborts when the window mass is below 1e-12 or
// after 1e6 draws.
double selective_release(double true_value, double sensitivity, double sigma,
                         double lower, double upper, RngStream& rng);

enum class DivergenceDirection { zero_vs_mu, mu_vs_zero };

// Closed-form Renyi divergence of order alpha between the two truncated
// normals N(0, (mu sigma)^2) and N(mu, (mu sigma)^2) restricted to
// [lower, upper]. zero_vs_mu is D_alpha(trunc(0) || trunc(mu)),
// mu_vs_zero the reverse. alpha may be any real > 1.
double truncated_renyi_divergence(DivergenceDirection direction, double mu,
                                  double sigma, double lower, double upper,
                                  double alpha);

// Log of the two bound expressions certifying that one-sided truncation
// (lower -> -inf, finite upper) never increases the divergence beyond the
// untruncated alpha/(2 sigma^2). Both are <= 0 analytically.
struct TruncationBoundTerms {
  double log_a;
  double log_b;
};
TruncationBoundTerms truncation_bound_terms(double mu, double sigma, double b,
                                            double alpha);

}  // namespace dpsur
