#include "dpsur/verify.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <limits>
#include <sstream>

#include "dpsur/accountant.hpp"
#include "dpsur/mechanisms.hpp"
#include "dpsur/normal.hpp"
#include "dpsur/rng.hpp"
#include "dpsur/stats.hpp"

namespace dpsur {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kMinStatisticalBudget = 100000;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void analytic_operating_points(VerificationReport& report) {
  struct Point {
    const char* label;
    LossSign sign;
    double beta;
    double expected;
  };
  // published operating points of the threshold test at sigma_v = 1
  const Point points[] = {
      {"negative beta=0", LossSign::negative, 0.0, 0.6915},
      {"positive beta=0", LossSign::positive, 0.0, 0.3085},
      {"negative beta=-1", LossSign::negative, -1.0, 0.5},
      {"positive beta=-1", LossSign::positive, -1.0, 0.159},
  };
  for (const auto& p : points) {
    const double got = acceptance_probability(p.sign, p.beta, 1.0);
    report.rows.push_back({"analytic-acceptance", p.label, p.expected, got,
                           5e-4, std::abs(got - p.expected) <= 5e-4, false});
  }
}

void monte_carlo_frequencies(VerificationReport& report, long n,
                             RngStream& rng) {
  const bool power_ok = n >= kMinStatisticalBudget;
  for (double beta : {-3.0, -1.0, 0.0, 0.5}) {
    for (double sigma_v : {0.8, 1.0, 1.3}) {
      for (int sign = 0; sign < 2; ++sign) {
        const ValidationMechanismSpec spec{0.001, sigma_v, beta,
                                           LossClipMode::sign_discretize};
        const double delta_e = sign == 0 ? -0.42 : 0.42;
        long hits = 0;
        for (long i = 0; i < n; ++i)
          if (noisy_threshold_test(delta_e, spec, rng).accepted) ++hits;
        const double p = acceptance_probability(
            sign == 0 ? LossSign::negative : LossSign::positive, beta,
            sigma_v);
        const double freq = static_cast<double>(hits) / n;
        const double band = 3.0 * std::sqrt(p * (1.0 - p) / n);
        std::ostringstream label;
        label << (sign == 0 ? "negative" : "positive") << " beta=" << beta
              << " sigma_v=" << sigma_v;
        report.rows.push_back({"mc-acceptance", label.str(), p, freq, band,
                               std::abs(freq - p) <= band, !power_ok});
      }
    }
  }
}

void clip_bound_invariance(VerificationReport& report) {
  for (double beta : {-1.0, 0.0}) {
    for (int sign = 0; sign < 2; ++sign) {
      const LossSign s = sign == 0 ? LossSign::negative : LossSign::positive;
      const double canceled = acceptance_probability(s, beta, 1.0);
      bool identical = true;
      double worst_uncanceled = canceled;
      for (double c_v : {1e-1, 1e-3, 1e-5}) {
        identical &= acceptance_probability(s, beta, 1.0) == canceled;
        const double offset = sign == 0 ? 1.0 : -1.0;
        const double uncanceled =
            std_normal_cdf((beta * c_v + offset * c_v) / (2.0 * c_v));
        if (std::abs(uncanceled - canceled) >
            std::abs(worst_uncanceled - canceled))
          worst_uncanceled = uncanceled;
      }
      std::ostringstream label;
      label << (sign == 0 ? "negative" : "positive") << " beta=" << beta;
      report.rows.push_back(
          {"clip-bound-invariance", label.str(), canceled, worst_uncanceled,
           1e-12,
           identical && std::abs(worst_uncanceled - canceled) <= 1e-12,
           false});
    }
  }
}

void truncation_bound_grid(VerificationReport& report) {
  double worst_a = -kInf, worst_b = -kInf;
  for (double mu : {0.5, 1.0, 2.0})
    for (double sigma : {0.5, 1.0, 2.0})
      for (double b : {-2.0, 0.0, 2.0})
        for (double alpha : {2.0, 4.0, 16.0, 64.0}) {
          const auto terms = truncation_bound_terms(mu, sigma, b, alpha);
          worst_a = std::max(worst_a, terms.log_a);
          worst_b = std::max(worst_b, terms.log_b);
        }
  const double limit = std::log1p(1e-12);
  report.rows.push_back({"truncation-bound", "max log A over grid", 0.0,
                         worst_a, 1e-12, worst_a <= limit, false});
  report.rows.push_back({"truncation-bound", "max log B over grid", 0.0,
                         worst_b, 1e-12, worst_b <= limit, false});
}

void one_sided_divergence_cap(VerificationReport& report) {
  double worst_excess = -kInf;
  for (double mu : {0.5, 1.0, 2.0})
    for (double sigma : {0.5, 1.0, 2.0})
      for (double b : {-2.0, 0.0, 2.0})
        for (double alpha : {2.0, 4.0, 16.0, 64.0})
          for (auto dir : {DivergenceDirection::zero_vs_mu,
                           DivergenceDirection::mu_vs_zero}) {
            const double d = truncated_renyi_divergence(dir, mu, sigma, -kInf,
                                                        b, alpha);
            worst_excess =
                std::max(worst_excess, d - gaussian_rdp(sigma, alpha));
          }
  report.rows.push_back({"one-sided-cap", "max excess over alpha/(2 sigma^2)",
                         0.0, worst_excess, 1e-10, worst_excess <= 1e-10,
                         false});
}

void selective_release_distribution(VerificationReport& report, long n,
                                    std::uint64_t seed) {
  const bool power_ok = n >= kMinStatisticalBudget;
  // released values for a one-sided window follow the half-normal
  {
    RngStream rng = RngStream::derive(seed, 900);
    double sum = 0.0;
    const long draws = std::max<long>(n, 1000);
    for (long i = 0; i < draws; ++i)
      sum += selective_release(0.0, 1.0, 1.0, -kInf, 0.0, rng);
    const double mean = sum / static_cast<double>(draws);
    const double expected = -std::sqrt(2.0 / std::numbers::pi);
    const double band = 3.0 * 0.61 / std::sqrt(static_cast<double>(draws));
    report.rows.push_back({"selective-release", "half-normal mean", expected,
                           mean, band, std::abs(mean - expected) <= band,
                           !power_ok});
  }
  // chi-square goodness of fit against the analytic truncated normal,
  // repeated at two seeds
  const TruncatedGaussianSpec target{0.4, 0.6, -0.5, 0.9};
  const int bins = 50;
  for (int run = 0; run < 2; ++run) {
    RngStream rng = RngStream::derive(seed, 901 + run);
    std::vector<double> edges(bins + 1);
    edges[0] = target.lower;
    edges[bins] = target.upper;
    for (int i = 1; i < bins; ++i)
      edges[i] = target.quantile(static_cast<double>(i) / bins);
    std::vector<double> observed(bins, 0.0);
    const long draws = std::max<long>(n, 1000);
    for (long i = 0; i < draws; ++i) {
      const double v = selective_release(0.4, 0.6, 1.0, target.lower,
                                         target.upper, rng);
      int lo = 0, hi = bins;
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (v >= edges[mid] ? lo : hi) = mid;
      }
      observed[lo] += 1.0;
    }
    const std::vector<double> expected(bins,
                                       static_cast<double>(draws) / bins);
    const auto gof = chi_square_gof(observed, expected);
    report.rows.push_back({"selective-release",
                           "chi-square p-value seed " + std::to_string(run),
                           0.01, gof.p_value, 0.0, gof.p_value > 0.01,
                           !power_ok});
  }
}

}  // namespace

bool VerificationReport::all_passed() const {
  for (const auto& row : rows)
    if (!row.power_limited && !row.passed) return false;
  return true;
}

std::string VerificationReport::summary() const {
  std::ostringstream out;
  long passed = 0, failed = 0, limited = 0;
  for (const auto& row : rows) {
    const char* status = row.power_limited ? "POWER-LIMITED"
                         : row.passed      ? "PASS"
                                           : "FAIL";
    (row.power_limited ? limited : (row.passed ? passed : failed)) += 1;
    out << "[" << status << "] " << row.suite << ": " << row.label
        << " (analytic " << fmt(row.analytic) << ", empirical "
        << fmt(row.empirical) << ", tolerance " << fmt(row.tolerance) << ")\n";
  }
  out << passed << " passed, " << failed << " failed";
  if (limited > 0)
    out << ", " << limited
        << " skipped for insufficient statistical power (budget "
        << sample_budget << " < " << kMinStatisticalBudget << ")";
  out << "\n";
  return out.str();
}

std::string VerificationReport::to_csv() const {
  std::ostringstream out;
  out << "suite,label,analytic,empirical,tolerance,status\n";
  for (const auto& row : rows) {
    out << row.suite << "," << row.label << "," << fmt(row.analytic) << ","
        << fmt(row.empirical) << "," << fmt(row.tolerance) << ","
        << (row.power_limited ? "power-limited"
                              : (row.passed ? "pass" : "fail"))
        << "\n";
  }
  return out.str();
}

VerificationReport verify_mechanisms(long sample_budget, std::uint64_t seed) {
  if (sample_budget < 1)
    throw std::invalid_argument("verify_mechanisms: budget must be >= 1");
  VerificationReport report;
  report.sample_budget = sample_budget;
  report.seed = seed;
  analytic_operating_points(report);
  RngStream mc_rng = RngStream::derive(seed, 800);
  monte_carlo_frequencies(report, sample_budget, mc_rng);
  clip_bound_invariance(report);
  truncation_bound_grid(report);
  one_sided_divergence_cap(report);
  selective_release_distribution(report, sample_budget, seed);
  return report;
}

}  // namespace dpsur
