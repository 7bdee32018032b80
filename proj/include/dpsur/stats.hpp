#pragma once

#include <span>

namespace dpsur {

// Regularized lower incomplete gamma P(a, x); series/continued-fraction
// split at x = a + 1.
double gamma_p(double a, double x);
// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed on the
// continued-fraction side directly so small tail probabilities keep
// relative accuracy.
double gamma_q(double a, double x);

// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
double chi_square_pvalue(double statistic, double df);

struct GofResult {
  double statistic;
  double df;
  double p_value;
};

// Pearson goodness-of-fit against expected bin counts.
GofResult chi_square_gof(std::span<const double> observed,
                         std::span<const double> expected,
                         int extra_constraints = 0);

}  // namespace dpsur
