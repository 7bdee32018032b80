#include "dpsur/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dpsur {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kMaxCalibrationUpdates = 10'000'000;

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0);
}
}  // namespace

void SubsampledGaussianSpec::validate() const {
  if (!(sampling_rate > 0.0) || sampling_rate > 1.0)
    throw std::invalid_argument(
        "SubsampledGaussianSpec: sampling rate must be in (0, 1]");
  if (!(noise_multiplier > 0.0) || !std::isfinite(noise_multiplier))
    throw std::invalid_argument(
        "SubsampledGaussianSpec: noise multiplier must be > 0");
}

RdpCurve::RdpCurve(std::vector<int> orders, std::vector<double> values)
    : orders_(std::move(orders)), values_(std::move(values)) {
  if (orders_.empty() || orders_.size() != values_.size())
    throw std::invalid_argument("RdpCurve: orders/values size mismatch");
  int prev = 1;
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    if (orders_[i] < 2 || orders_[i] <= prev)
      throw std::invalid_argument(
          "RdpCurve: orders must be strictly increasing integers >= 2");
    prev = orders_[i];
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw std::invalid_argument("RdpCurve: values must be finite and >= 0");
  }
}

const std::vector<int>& RdpCurve::default_orders() {
  static const std::vector<int> orders = [] {
    std::vector<int> v(63);
    std::iota(v.begin(), v.end(), 2);
    return v;
  }();
  return orders;
}

RdpCurve RdpCurve::zero(std::span<const int> orders) {
  return RdpCurve(std::vector<int>(orders.begin(), orders.end()),
                  std::vector<double>(orders.size(), 0.0));
}

double gaussian_rdp(double sigma, double alpha) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_rdp: sigma > 0");
  if (!(alpha > 1.0)) throw std::invalid_argument("gaussian_rdp: alpha > 1");
  return alpha / (2.0 * sigma * sigma);
}

double sgm_rdp(const SubsampledGaussianSpec& spec, int alpha) {
  spec.validate();
  if (alpha < 2) throw std::invalid_argument("sgm_rdp: alpha must be >= 2");
  const double q = spec.sampling_rate;
  const double sigma = spec.noise_multiplier;
  // q = 1 collapses the binomial sum to its k = alpha term, recovering the
  // plain Gaussian mechanism exactly.
  if (q == 1.0) return gaussian_rdp(sigma, alpha);

  // log-sum-exp over log[C(alpha,k) (1-q)^{alpha-k} q^k] + (k^2-k)/(2 sigma^2)
  std::vector<double> log_terms(alpha + 1);
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  double max_term = -kInf;
  for (int k = 0; k <= alpha; ++k) {
    double t = log_binomial(alpha, k) + (alpha - k) * log_1mq + k * log_q +
               (static_cast<double>(k) * k - k) / (2.0 * sigma * sigma);
    log_terms[k] = t;
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (double t : log_terms) sum += std::exp(t - max_term);
  const double log_a_alpha = max_term + std::log(sum);
  // A_alpha >= 1 analytically; clamp away negative rounding residue.
  return std::max(0.0, log_a_alpha / (alpha - 1));
}

RdpCurve sgm_rdp_curve(const SubsampledGaussianSpec& spec,
                       std::span<const int> orders) {
  std::vector<double> values;
  values.reserve(orders.size());
  for (int a : orders) values.push_back(sgm_rdp(spec, a));
  return RdpCurve(std::vector<int>(orders.begin(), orders.end()),
                  std::move(values));
}

RdpCurve compose(const RdpCurve& a, const RdpCurve& b) {
  if (a.orders() != b.orders())
    throw std::invalid_argument("compose: order grids differ");
  std::vector<double> values(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    values[i] = a.values()[i] + b.values()[i];
  return RdpCurve(a.orders(), std::move(values));
}

RdpCurve compose_repeated(const RdpCurve& curve, long times) {
  if (times < 0)
    throw std::invalid_argument("compose_repeated: times must be >= 0");
  std::vector<double> values(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i)
    values[i] = curve.values()[i] * static_cast<double>(times);
  return RdpCurve(curve.orders(), std::move(values));
}

DpBound rdp_to_dp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("rdp_to_dp: delta must be in (0, 1)");
  double best_eps = kInf;
  int best_alpha = 0;
  const double log_delta = std::log(delta);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double alpha = curve.orders()[i];
    const double eps = curve.values()[i] + std::log((alpha - 1.0) / alpha) -
                       (log_delta + std::log(alpha)) / (alpha - 1.0);
    if (eps < best_eps) {
      best_eps = eps;
      best_alpha = curve.orders()[i];
    }
  }
  return {std::max(0.0, best_eps), best_alpha};
}

void PrivacyLedger::validate() const {
  if (accepted_updates < 0)
    throw std::invalid_argument("PrivacyLedger: negative update count");
  train_spec.validate();
  if (valid_spec) valid_spec->validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("PrivacyLedger: delta must be in (0, 1)");
}

DpBound ledger_epsilon(const PrivacyLedger& ledger) {
  ledger.validate();
  const auto& orders = RdpCurve::default_orders();
  RdpCurve total = compose_repeated(sgm_rdp_curve(ledger.train_spec, orders),
                                    ledger.accepted_updates);
  if (ledger.valid_spec) {
    total = compose(total,
                    compose_repeated(sgm_rdp_curve(*ledger.valid_spec, orders),
                                     ledger.accepted_updates));
  }
  return rdp_to_dp(total, ledger.delta);
}

long calibrate_max_updates(
    const SubsampledGaussianSpec& train_spec,
    const std::optional<SubsampledGaussianSpec>& valid_spec,
    double epsilon_target, double delta) {
  if (!(epsilon_target > 0.0))
    throw std::invalid_argument("calibrate_max_updates: target must be > 0");
  PrivacyLedger ledger{0, train_spec, valid_spec, delta};
  ledger.validate();
  const auto eps_at = [&](long t) {
    ledger.accepted_updates = t;
    return ledger_epsilon(ledger).epsilon;
  };
  if (eps_at(0) > epsilon_target)
    throw InfeasibleBudget(
        "privacy budget below the RDP-to-DP conversion floor (epsilon " +
        std::to_string(epsilon_target) + " < floor " +
        std::to_string(eps_at(0)) + ")");
  if (eps_at(1) > epsilon_target) return 0;
  // Exponential bracket, then binary search on the monotone epsilon(t).
  long lo = 1, hi = 2;
  while (hi < kMaxCalibrationUpdates && eps_at(hi) <= epsilon_target) {
    lo = hi;
    hi *= 2;
  }
  hi = std::min(hi, kMaxCalibrationUpdates);
  if (eps_at(hi) <= epsilon_target) return hi;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (eps_at(mid) <= epsilon_target ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace dpsur
