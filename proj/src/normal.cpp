#include "dpsur/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dpsur {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const double kSqrtPi = std::sqrt(std::numbers::pi);
}  // namespace

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double std_normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double erfcx(double z) {
  if (z < 0) throw std::invalid_argument("erfcx: z must be >= 0");
  if (z <= 25.0) return std::exp(z * z) * std::erfc(z);
  // Asymptotic expansion; at z = 25 the first omitted term is ~1e-17 rel.
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2 * k - 1) * inv2z2;
    sum += term;
  }
  return sum / (z * kSqrtPi);
}

double log_std_normal_cdf(double x) {
  if (x != x) return x;  // NaN passthrough
  if (x == kInf) return 0.0;
  if (x == -kInf) return -kInf;
  if (x >= 0.0) {
    // ln(1 - Phi(-x)); Phi(-x) <= 0.5 here so log1p is exact
    return std::log1p(-std_normal_cdf(-x));
  }
  if (x > -1.0) return std::log(std_normal_cdf(x));
  // Phi(x) = 0.5 * erfcx(z) * exp(-z^2), z = -x/sqrt(2)
  const double z = -x * std::numbers::sqrt2 / 2.0;
  return std::log(0.5 * erfcx(z)) - z * z;
}

double log_phi_interval(double lo, double hi) {
  if (lo != lo || hi != hi)
    throw std::invalid_argument("log_phi_interval: NaN endpoint");
  if (!(lo < hi))
    throw std::invalid_argument("log_phi_interval: requires lo < hi");
  if (lo == -kInf && hi == kInf) return 0.0;
  if (lo == -kInf) return log_std_normal_cdf(hi);
  if (hi == kInf) return log_std_normal_cdf(-lo);
  // Mirror so the interval sits in the left half, where ln Phi is stable.
  if (lo + hi > 0.0) {
    const double t = lo;
    lo = -hi;
    hi = -t;
  }
  const double la = log_std_normal_cdf(hi);
  const double lb = log_std_normal_cdf(lo);
  const double ratio = lb - la;  // <= 0
  if (ratio >= 0.0) return -kInf;
  return la + std::log1p(-std::exp(ratio));
}

namespace {

// Acklam's rational approximation for the inverse normal CDF.
double inverse_cdf_estimate(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
            1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double inverse_std_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("inverse_std_normal_cdf: p must be in (0,1)");
  // Work in the lower half, where the CDF keeps full relative precision;
  // 1 - p is exact for p >= 0.5.
  if (p > 0.5) return -inverse_std_normal_cdf(1.0 - p);
  double x = inverse_cdf_estimate(p);
  // One Halley step against the true CDF.
  const double err = std_normal_cdf(x) - p;
  const double u = err / std_normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace dpsur
