#pragma once

namespace dpsur {

// Standard normal CDF. Absolute error well under 1e-12 everywhere;
// saturates to exactly 0 / 1 in the extreme tails (|x| beyond ~38).
double std_normal_cdf(double x);

double std_normal_pdf(double x);

// ln Phi(x), finite and accurate far into the left tail (x ~ -1e5) where
// Phi itself underflows. Uses the scaled complementary error function.
double log_std_normal_cdf(double x);

// Scaled complementary error function exp(z^2) * erfc(z) for z >= 0.
double erfcx(double z);

// ln(Phi(hi) - Phi(lo)) for lo < hi, either endpoint may be infinite.
// Evaluated through complementary-CDF forms so that intervals deep in one
// tail do not suffer catastrophic cancellation. Returns -inf when the
// interval carries no representable mass.
double log_phi_interval(double lo, double hi);

// Inverse of std_normal_cdf for p in (0, 1). Rational initial guess
// polished with one Halley step; relative error ~1e-15.
double inverse_std_normal_cdf(double p);

}  // namespace dpsur
