#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpsur {

// Raised when a privacy budget cannot be met even before the first update
// (the target epsilon lies below the RDP-to-DP conversion floor).
class InfeasibleBudget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Poisson-subsampled Gaussian mechanism: each record participates with
// probability q, noise multiplier sigma relative to the query sensitivity.
struct SubsampledGaussianSpec {
  double sampling_rate = 0.0;  // q in (0, 1]
  double noise_multiplier = 0.0;  // sigma > 0

  void validate() const;
};

// RDP guarantee evaluated on a fixed grid of integer orders. Values are in
// nats and compose additively across mechanism invocations.
class RdpCurve {
 public:
  RdpCurve(std::vector<int> orders, std::vector<double> values);

  static const std::vector<int>& default_orders();  // {2, ..., 64}
  static RdpCurve zero(std::span<const int> orders);

  const std::vector<int>& orders() const { return orders_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return orders_.size(); }

 private:
  std::vector<int> orders_;
  std::vector<double> values_;
};

// RDP of the plain Gaussian mechanism: alpha / (2 sigma^2).
double gaussian_rdp(double sigma, double alpha);

// RDP of one subsampled-Gaussian release at integer order alpha >= 2,
// log-sum-exp over the binomial expansion so no term overflows for
// alpha up to 64 and sigma down to 0.3.
double sgm_rdp(const SubsampledGaussianSpec& spec, int alpha);

RdpCurve sgm_rdp_curve(const SubsampledGaussianSpec& spec,
                       std::span<const int> orders);

// Sequential composition (pointwise sum; grids must match).
RdpCurve compose(const RdpCurve& a, const RdpCurve& b);

// t-fold self-composition.
RdpCurve compose_repeated(const RdpCurve& curve, long times);

struct DpBound {
  double epsilon;
  int best_alpha;
};

// Convert an RDP curve to an (epsilon, delta)-DP bound, minimizing over the
// order grid. The reported epsilon is clamped at 0.
DpBound rdp_to_dp(const RdpCurve& curve, double delta);

// Composed privacy state of a selective-update run: t accepted updates,
// each charging one training release and (optionally) one validation
// release.
struct PrivacyLedger {
  long accepted_updates = 0;
  SubsampledGaussianSpec train_spec;
  std::optional<SubsampledGaussianSpec> valid_spec;
  double delta = 1e-5;

  void validate() const;
};

DpBound ledger_epsilon(const PrivacyLedger& ledger);

// Largest t such that the ledger epsilon at t stays within epsilon_target
// (0 if even one update overshoots). Throws InfeasibleBudget when the
// target lies below the t = 0 conversion floor. Search capped at t = 1e7.
long calibrate_max_updates(const SubsampledGaussianSpec& train_spec,
                           const std::optional<SubsampledGaussianSpec>& valid_spec,
                           double epsilon_target, double delta);

}  // namespace dpsur
