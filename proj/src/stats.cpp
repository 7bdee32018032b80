#include "dpsur/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpsur {

namespace {

// log prefactor exp(-x + a ln x - lgamma(a)), shared by both branches
double log_prefactor(double a, double x) {
  return -x + a * std::log(x) - std::lgamma(a);
}

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1
double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(log_prefactor(a, x));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0) || x < 0 || x != x)
    throw std::invalid_argument("gamma_p: requires a > 0 and x >= 0");
  if (x == 0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0) || x < 0 || x != x)
    throw std::invalid_argument("gamma_q: requires a > 0 and x >= 0");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_pvalue(double statistic, double df) {
  if (!(df > 0)) throw std::invalid_argument("chi_square_pvalue: df > 0");
  if (statistic <= 0) return 1.0;
  return gamma_q(df / 2.0, statistic / 2.0);
}

GofResult chi_square_gof(std::span<const double> observed,
                         std::span<const double> expected,
                         int extra_constraints) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: bin count mismatch");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0))
      throw std::invalid_argument("chi_square_gof: expected counts must be positive");
    const double diff = observed[i] - expected[i];
    stat += diff * diff / expected[i];
  }
  const double df =
      static_cast<double>(observed.size()) - 1.0 - extra_constraints;
  if (!(df > 0)) throw std::invalid_argument("chi_square_gof: df <= 0");
  return {stat, df, chi_square_pvalue(stat, df)};
}

}  // namespace dpsur
