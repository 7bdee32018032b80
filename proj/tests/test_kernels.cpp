#include "dpsur/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpsur/rng.hpp"

using namespace dpsur;

namespace {

std::vector<double> random_vec(std::size_t n, RngStream& rng, double span = 4.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = span * (rng.uniform() - 0.5);
  return v;
}

}  // namespace

TEST_CASE("scalar reference basics") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{-1.0, 0.5, 2.0};
  CHECK(kernels::ref::dot(a.data(), b.data(), 3) == doctest::Approx(6.0));
  CHECK(kernels::ref::squared_norm(a.data(), 3) == doctest::Approx(14.0));
  std::vector<double> y = b;
  kernels::ref::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 4.5);
  CHECK(y[2] == 8.0);
  kernels::ref::scale(y.data(), 3, 0.5);
  CHECK(y[2] == 4.0);
}

TEST_CASE("active backend matches scalar reference") {
  RngStream rng(91);
  INFO("active backend: ", kernels::backend_name(kernels::active_backend()));
  // Sizes chosen to cover every remainder-lane case of 2- and 4-wide SIMD.
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 64u, 129u, 1000u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);

    // Reductions may reassociate: compare with a tight relative tolerance.
    const double dref = kernels::ref::dot(a.data(), b.data(), n);
    CHECK(kernels::dot(a, b) ==
          doctest::Approx(dref).epsilon(1e-13).scale(std::abs(dref) + 1.0));
    const double nref = kernels::ref::squared_norm(a.data(), n);
    CHECK(kernels::squared_norm(a) ==
          doctest::Approx(nref).epsilon(1e-13).scale(nref + 1.0));

    // Elementwise ops are single-rounding in every backend: bitwise equal.
    std::vector<double> y1 = b, y2 = b;
    kernels::axpy(1.7, a, y1);
    kernels::ref::axpy(1.7, a.data(), y2.data(), n);
    CHECK(y1 == y2);
    std::vector<double> s1 = a, s2 = a;
    kernels::scale(s1, -0.3);
    kernels::ref::scale(s2.data(), n, -0.3);
    CHECK(s1 == s2);
  }
}

TEST_CASE("backend selection") {
  CHECK(kernels::backend_supported(kernels::Backend::scalar));
  const auto saved = kernels::active_backend();
  kernels::set_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(kernels::dot(a, a) == kernels::ref::squared_norm(a.data(), 5));
  kernels::set_backend(saved);

#if !defined(__x86_64__)
  CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::avx2),
                  std::invalid_argument);
#endif
#if !defined(__aarch64__)
  CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::neon),
                  std::invalid_argument);
#endif
}

TEST_CASE("length mismatches rejected") {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0};
  std::vector<double> y{0.0};
  CHECK_THROWS_AS(kernels::dot(a, b), std::invalid_argument);
  CHECK_THROWS_AS(kernels::axpy(1.0, a, y), std::invalid_argument);
}
