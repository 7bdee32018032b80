#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dpsur {

struct VerificationRow {
  std::string suite;
  std::string label;
  double analytic = 0.0;
  double empirical = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool power_limited = false;  // sample budget too small to decide
};

struct VerificationReport {
  std::vector<VerificationRow> rows;
  long sample_budget = 0;
  std::uint64_t seed = 0;

  // power-limited rows do not count against the verdict
  bool all_passed() const;
  std::string summary() const;
  std::string to_csv() const;
};

// Runs the mechanism verification suites: analytic acceptance operating
// points, Monte-Carlo threshold-test frequencies, clip-bound invariance,
// the truncation bound grid, the one-sided divergence cap, and the
// selective-release distribution test. Statistical suites are marked
// power-limited instead of failing when the budget is below 1e5 samples.
VerificationReport verify_mechanisms(long sample_budget, std::uint64_t seed);

}  // namespace dpsur
