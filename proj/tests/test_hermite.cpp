#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "grushin/hermite.hpp"

using namespace grushin::hermite;

namespace {

const double pi = std::numbers::pi;

// Closed forms of the first orthonormal Hermite functions.
double h0(double x) { return std::pow(pi, -0.25) * std::exp(-x * x / 2); }
double h1(double x) { return std::sqrt(2.0) * x * h0(x); }
double h2(double x) { return (2 * x * x - 1) / std::sqrt(2.0) * h0(x); }
double h3(double x) { return (2 * x * x * x - 3 * x) / std::sqrt(3.0) * h0(x); }

}  // namespace

TEST_CASE("low-order Hermite functions match their closed forms") {
  for (double x : {-3.0, -1.25, 0.0, 0.7, 2.5, 5.0}) {
    CHECK(eval(0, x) == doctest::Approx(h0(x)).epsilon(1e-14));
    CHECK(eval(1, x) == doctest::Approx(h1(x)).epsilon(1e-14));
    CHECK(eval(2, x) == doctest::Approx(h2(x)).epsilon(1e-14));
    CHECK(eval(3, x) == doctest::Approx(h3(x)).epsilon(1e-13));
  }
  CHECK(lambda(4) == doctest::Approx(3.0));
}

TEST_CASE("even Hermite functions at the origin follow the factorial formula") {
  // h_{2n}(0) = pi^{-1/4} (-1)^n sqrt((2n)!) / (2^n n!)
  for (int n : {1, 5, 20, 100, 400}) {
    const double log_mag = -0.25 * std::log(pi) + 0.5 * std::lgamma(2.0 * n + 1) - n * std::log(2.0) - std::lgamma(n + 1.0);
    const double expected = (n % 2 ? -1.0 : 1.0) * std::exp(log_mag);
    CHECK(eval(2 * n, 0.0) == doctest::Approx(expected).epsilon(1e-11));
    CHECK(std::abs(eval(2 * n + 1, 0.0)) < 1e-300);
  }
}

TEST_CASE("eval_all agrees with eval") {
  std::vector<double> row(51);
  eval_all(50, 1.7, row.data());
  for (int m = 0; m <= 50; ++m) CHECK(row[m] == doctest::Approx(eval(m, 1.7)).epsilon(1e-13));
}

TEST_CASE("high-order functions stay normalised without underflow") {
  for (int m : {200, 1000}) {
    const double L = 2 * lambda(m) + 10;
    const int n = 40001;
    const double h = 2 * L / (n - 1);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = eval(m, -L + j * h);
      s += (j == 0 || j == n - 1 ? 0.5 : 1.0) * v * v * h;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("derivative agrees with central differences and the lowering form") {
  for (int m : {0, 1, 7, 30}) {
    for (double x : {-2.0, 0.3, 4.1}) {
      const double d = 1e-5;
      const double fd = (eval(m, x + d) - eval(m, x - d)) / (2 * d);
      CHECK(derivative(m, x) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
      const double lowering = -x * eval(m, x) + (m > 0 ? std::sqrt(2.0 * m) * eval(m - 1, x) : 0.0);
      CHECK(std::abs(derivative(m, x) - lowering) < 1e-12 * (1 + std::abs(x)));
    }
  }
}

TEST_CASE("decay exponent zeta") {
  CHECK(zeta(2.0) == doctest::Approx(0.0));
  CHECK(zeta(4.0) == doctest::Approx(0.25));
  CHECK(zeta(6.0) == doctest::Approx(1.0 / 6 + 1.0 / 18));
  CHECK(zeta(infinity) == doctest::Approx(1.0 / 6));
  CHECK_THROWS_AS(zeta(1.5), std::domain_error);
}

TEST_CASE("L^p norms of h_0 in closed form") {
  const XGrid g = XGrid::for_modes(0, 4.0);
  CHECK(lp_norm(0, 2.0, g) == doctest::Approx(1.0).epsilon(1e-12));
  // int h_0^4 = pi^{-1} sqrt(pi/2)
  CHECK(lp_norm(0, 4.0, g) == doctest::Approx(std::pow(std::sqrt(pi / 2) / pi, 0.25)).epsilon(1e-10));
  CHECK(lp_norm(0, infinity, g) == doctest::Approx(std::pow(pi, -0.25)).epsilon(1e-12));
}

TEST_CASE("lp_norm rejects grids that do not resolve the mode") {
  XGrid coarse;
  coarse.x_range = 4.0;
  coarse.x_count = 41;
  CHECK_FALSE(coarse.resolves(100));
  CHECK_THROWS_AS(lp_norm(100, 2.0, coarse), std::invalid_argument);
}

TEST_CASE("HermiteTable identities") {
  const HermiteTable t(64, XGrid::for_modes(66));
  CHECK(t.orthonormality_defect() < 1e-10);
  for (int m : {0, 10, 64}) {
    CHECK(t.recurrence_residual(m) < 1e-10);
    CHECK(t.eigen_residual(m) / (2 * m + 1) < 1e-8);
  }
}

TEST_CASE("envelope dominates the Hermite functions") {
  const auto rows = envelope_sweep(128);
  REQUIRE(rows.size() == 129);
  for (const auto& r : rows) CHECK(r.max_ratio < 1.0);
  // Direct check at the turning point of a mid-range mode.
  const int m = 50;
  const double x = lambda(m);
  CHECK(std::abs(eval(m, x)) <= envelope_bound(m, x));
}

TEST_CASE("lp_sweep scaled values") {
  const auto rows = lp_sweep({16, 64}, {2.0, 4.0});
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.scaled == doctest::Approx(r.norm * std::pow(lambda(r.m), zeta(r.p))));
}
