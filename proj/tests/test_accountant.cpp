#include "dpsur/accountant.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpsur/rng.hpp"

using namespace dpsur;

TEST_CASE("gaussian_rdp closed form") {
  CHECK(gaussian_rdp(1.0, 2.0) == 1.0);
  CHECK(gaussian_rdp(2.0, 8.0) == 1.0);
  CHECK(gaussian_rdp(1.1, 32.0) ==
        doctest::Approx(13.22314049586776859504).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_rdp(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_rdp(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("sgm_rdp collapses to the Gaussian mechanism at q = 1") {
  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    for (int alpha = 2; alpha <= 64; ++alpha) {
      CHECK(sgm_rdp({1.0, sigma}, alpha) == gaussian_rdp(sigma, alpha));
    }
  }
}

TEST_CASE("sgm_rdp vanishes in the q -> 0 limit") {
  // q small enough that every k >= 1 term underflows, for any grid sigma
  CHECK(sgm_rdp({1e-300, 1.0}, 16) == 0.0);
  CHECK(sgm_rdp({1e-300, 0.5}, 64) == 0.0);
  CHECK(sgm_rdp({1e-300, 0.3}, 64) == 0.0);
}

TEST_CASE("sgm_rdp matches the high-precision binomial-sum oracle") {
  const struct {
    double q, sigma;
    int alpha;
    double value;  // mpmath, 60 digits
  } refs[] = {
      {0.01, 1.0, 16, 3.087850783696244593724},
      {0.01, 1.0, 2, 1.718134220745479309907e-4},
      {0.01, 1.0, 4, 3.631540489107567185639e-4},
      {0.01, 1.0, 8, 8.936439076060318473451e-4},
      {0.1, 1.0, 2, 1.703686323617654978639e-2},
      {0.1, 1.0, 4, 5.867260696008050363213e-2},
      {0.1, 1.0, 8, 1.378361411348126511309},
      {0.01, 2.0, 8, 1.157561479299103125013e-4},
      {0.1, 2.0, 8, 1.372543010321991791814e-2},
      {0.1, 3.0, 64, 1.224990495153258869695},
      {0.005, 1.3, 64, 13.55249360039603403494},
      {0.5, 0.3, 64, 354.8514060387962460349},
      {0.0256, 1.1, 32, 9.439746506487422254374},
  };
  for (const auto& r : refs) {
    CHECK(sgm_rdp({r.q, r.sigma}, r.alpha) ==
          doctest::Approx(r.value).epsilon(1e-12));
  }
}

TEST_CASE("sgm_rdp domain errors") {
  CHECK_THROWS_AS(sgm_rdp({0.0, 1.0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(sgm_rdp({1.1, 1.0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(sgm_rdp({0.5, 0.0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(sgm_rdp({0.5, 1.0}, 1), std::invalid_argument);
}

TEST_CASE("sgm_rdp monotone in q and alpha, antitone in sigma") {
  const std::vector<double> qs{0.001, 0.01, 0.05, 0.1, 0.3, 0.7, 1.0};
  const std::vector<double> sigmas{0.5, 0.8, 1.0, 1.5, 2.0, 4.0};
  const std::vector<int> alphas{2, 3, 4, 8, 16, 32, 64};
  for (double sigma : sigmas) {
    for (int alpha : alphas) {
      double prev = -1.0;
      for (double q : qs) {
        const double v = sgm_rdp({q, sigma}, alpha);
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
  for (double q : qs) {
    for (double sigma : sigmas) {
      double prev = -1.0;
      for (int alpha : alphas) {
        const double v = sgm_rdp({q, sigma}, alpha);
        CHECK(v >= prev);
        prev = v;
      }
    }
    for (int alpha : alphas) {
      double prev = std::numeric_limits<double>::infinity();
      for (double sigma : sigmas) {
        const double v = sgm_rdp({q, sigma}, alpha);
        CHECK(v <= prev);
        prev = v;
      }
    }
  }
}

namespace {
RdpCurve random_curve(RngStream& rng) {
  const auto& orders = RdpCurve::default_orders();
  std::vector<double> values(orders.size());
  double acc = 0.0;
  for (auto& v : values) {
    acc += rng.uniform();
    v = acc;  // nondecreasing, like every real RDP curve
  }
  return RdpCurve(orders, values);
}
}  // namespace

TEST_CASE("compose identity, additivity, commutativity, associativity") {
  RngStream rng(7);
  const auto zero = RdpCurve::zero(RdpCurve::default_orders());
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_curve(rng);
    const auto b = random_curve(rng);
    const auto c = random_curve(rng);
    CHECK(compose(zero, a).values() == a.values());
    const auto doubled = compose(a, a);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(doubled.values()[i] == 2.0 * a.values()[i]);
    CHECK(compose(a, b).values() == compose(b, a).values());
    const auto left = compose(compose(a, b), c).values();
    const auto right = compose(a, compose(b, c)).values();
    for (std::size_t i = 0; i < left.size(); ++i)
      CHECK(left[i] == doctest::Approx(right[i]).epsilon(1e-15));
  }
}

TEST_CASE("compose rejects mismatched grids") {
  const auto a = RdpCurve::zero(RdpCurve::default_orders());
  const std::vector<int> other{2, 3, 4};
  const auto b = RdpCurve::zero(other);
  CHECK_THROWS_AS(compose(a, b), std::invalid_argument);
}

TEST_CASE("rdp curve invariants enforced") {
  CHECK_THROWS_AS(RdpCurve({2, 2}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RdpCurve({1, 2}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RdpCurve({2, 3}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RdpCurve({2, 3}, {0.0, -1.0}), std::invalid_argument);
}

TEST_CASE("rdp_to_dp single-order hand value") {
  const RdpCurve curve({10}, {1.0});
  const auto bound = rdp_to_dp(curve, 1e-5);
  CHECK(bound.epsilon ==
        doctest::Approx(1.918010636783971780558).epsilon(1e-14));
  CHECK(bound.best_alpha == 10);
}

TEST_CASE("rdp_to_dp of the zero curve") {
  const auto zero = RdpCurve::zero(RdpCurve::default_orders());
  // with a large delta the raw conversion would go negative; the reported
  // epsilon clamps at zero
  const auto big_delta = rdp_to_dp(zero, 0.5);
  CHECK(big_delta.epsilon == 0.0);
  CHECK(big_delta.best_alpha == 2);
  // with a realistic delta the floor is positive and attained at the top
  // of the grid
  const auto small_delta = rdp_to_dp(zero, 1e-5);
  CHECK(small_delta.epsilon ==
        doctest::Approx(0.1009824744859966498621).epsilon(1e-13));
  CHECK(small_delta.best_alpha == 64);
}

TEST_CASE("rdp_to_dp monotone in the curve") {
  RngStream rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_curve(rng);
    std::vector<double> bumped = a.values();
    for (auto& v : bumped) v += 0.25;
    const RdpCurve b(a.orders(), bumped);
    CHECK(rdp_to_dp(a, 1e-5).epsilon <= rdp_to_dp(b, 1e-5).epsilon);
  }
  CHECK_THROWS_AS(rdp_to_dp(random_curve(rng), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rdp_to_dp(random_curve(rng), 1.0), std::invalid_argument);
}

TEST_CASE("ledger_epsilon matches the independent recomputation") {
  const PrivacyLedger ledger{50, {0.1, 3.0}, SubsampledGaussianSpec{0.005, 1.3},
                             1e-5};
  const auto bound = ledger_epsilon(ledger);
  CHECK(bound.epsilon ==
        doctest::Approx(1.085410658655439298021).epsilon(1e-12));
  CHECK(bound.best_alpha == 15);
}

TEST_CASE("ledger_epsilon equals t-scaled composition, not summed epsilons") {
  PrivacyLedger ledger{3, {0.02, 1.1}, SubsampledGaussianSpec{0.004, 1.0},
                       1e-5};
  const auto& orders = RdpCurve::default_orders();
  const auto train = sgm_rdp_curve(ledger.train_spec, orders);
  const auto valid = sgm_rdp_curve(*ledger.valid_spec, orders);
  const auto total =
      compose(compose_repeated(train, 3), compose_repeated(valid, 3));
  CHECK(ledger_epsilon(ledger).epsilon == rdp_to_dp(total, 1e-5).epsilon);

  // summing per-update epsilons is the wrong composition and is larger
  PrivacyLedger one = ledger;
  one.accepted_updates = 1;
  CHECK(3.0 * ledger_epsilon(one).epsilon > ledger_epsilon(ledger).epsilon);
}

TEST_CASE("ledger_epsilon at t = 0 is the conversion floor") {
  PrivacyLedger ledger{0, {0.1, 2.0}, std::nullopt, 1e-5};
  CHECK(ledger_epsilon(ledger).epsilon ==
        doctest::Approx(0.1009824744859966498621).epsilon(1e-13));
}

TEST_CASE("doubling t never decreases epsilon") {
  PrivacyLedger ledger{0, {0.05, 1.5}, SubsampledGaussianSpec{0.01, 1.0}, 1e-5};
  double prev = 0.0;
  for (long t : {1L, 2L, 4L, 8L, 16L, 32L, 64L, 128L}) {
    ledger.accepted_updates = t;
    const double eps = ledger_epsilon(ledger).epsilon;
    CHECK(eps >= prev);
    prev = eps;
  }
}

TEST_CASE("epsilon monotone in ledger parameters") {
  const auto eps = [](double qt, double st, double qv, double sv, long t) {
    return ledger_epsilon(
               {t, {qt, st}, SubsampledGaussianSpec{qv, sv}, 1e-5})
        .epsilon;
  };
  // nonincreasing in either sigma
  CHECK(eps(0.1, 2.0, 0.01, 1.0, 20) >= eps(0.1, 3.0, 0.01, 1.0, 20));
  CHECK(eps(0.1, 2.0, 0.01, 1.0, 20) >= eps(0.1, 2.0, 0.01, 1.5, 20));
  // nondecreasing in either sampling rate
  CHECK(eps(0.1, 2.0, 0.01, 1.0, 20) <= eps(0.2, 2.0, 0.01, 1.0, 20));
  CHECK(eps(0.1, 2.0, 0.01, 1.0, 20) <= eps(0.1, 2.0, 0.02, 1.0, 20));
}

TEST_CASE("huge validation noise approximates train-only accounting") {
  PrivacyLedger with_valid{40, {0.08, 2.5}, SubsampledGaussianSpec{0.01, 1e6},
                           1e-5};
  PrivacyLedger train_only{40, {0.08, 2.5}, std::nullopt, 1e-5};
  CHECK(std::abs(ledger_epsilon(with_valid).epsilon -
                 ledger_epsilon(train_only).epsilon) < 1e-6);
}

TEST_CASE("calibrate_max_updates against a linear-scan oracle") {
  const SubsampledGaussianSpec train{0.1365, 5.67};
  const SubsampledGaussianSpec valid{0.00512, 1.1};
  const long t_max = calibrate_max_updates(train, valid, 3.0, 1e-5);
  CHECK(t_max == 701);  // mpmath linear scan
  PrivacyLedger ledger{t_max, train, valid, 1e-5};
  CHECK(ledger_epsilon(ledger).epsilon <= 3.0);
  ledger.accepted_updates = t_max + 1;
  CHECK(ledger_epsilon(ledger).epsilon > 3.0);
}

TEST_CASE("calibrate_max_updates boundary behavior") {
  const SubsampledGaussianSpec train{0.5, 1.0};
  // one update already blows a tiny-but-feasible budget
  const double floor =
      ledger_epsilon({0, train, std::nullopt, 1e-5}).epsilon;
  const double first =
      ledger_epsilon({1, train, std::nullopt, 1e-5}).epsilon;
  REQUIRE(first > floor);
  const double target = 0.5 * (floor + first);
  CHECK(calibrate_max_updates(train, std::nullopt, target, 1e-5) == 0);
  // below the conversion floor the budget is unreachable
  CHECK_THROWS_AS(
      calibrate_max_updates(train, std::nullopt, floor * 0.5, 1e-5),
      InfeasibleBudget);
}

TEST_CASE("calibrate postcondition on a small scan") {
  const SubsampledGaussianSpec train{0.05, 1.2};
  const SubsampledGaussianSpec valid{0.01, 1.0};
  const long t_max = calibrate_max_updates(train, valid, 2.0, 1e-5);
  long scan = 0;
  for (long t = 1; t <= t_max + 5; ++t) {
    if (ledger_epsilon({t, train, valid, 1e-5}).epsilon <= 2.0) scan = t;
  }
  CHECK(t_max == scan);
}
