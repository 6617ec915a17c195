#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "grushin/flow_random.hpp"
#include "grushin/parallel.hpp"

using namespace grushin::flow_random;
using grushin::spectral::Grid;
using grushin::spectral::sobolev_norm;
using grushin::spectral::x_norm;

namespace {

GridPtr small_grid() {
  static const GridPtr g = Grid::create(GridSpec::make(0.25, 8, 6, 3));
  return g;
}

SpectralField test_field(const GridPtr& g) {
  SpectralField f(g);
  for (int m = 0; m <= g->m_max(); ++m)
    for (int q = -g->eta_count(); q <= g->eta_count(); ++q)
      if (q != 0) f.at(m, q) = cplx(1.0 / (1 + m), 0.5 / (1 + std::abs(q)));
  return f;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(var / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
  return r;
}

}  // namespace

TEST_CASE("draws are reproducible and sample-specific") {
  const auto& spec = small_grid()->spec();
  const auto a = Draw::generate(42, 3, spec);
  const auto b = Draw::generate(42, 3, spec);
  const auto c = Draw::generate(42, 4, spec);
  const auto d = Draw::generate(43, 3, spec);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(a.values() != d.values());
  CHECK(a.covers(spec));
}

TEST_CASE("complex Gaussian has E|X|^2 = 2 and vanishing E X^2") {
  auto eng = sample_stream(7, 0, 0);
  std::vector<double> mod2, re_sq;
  for (int i = 0; i < 20000; ++i) {
    const cplx x = complex_gaussian(eng);
    mod2.push_back(std::norm(x));
    re_sq.push_back((x * x).real());
  }
  const auto m = mean_se(mod2);
  CHECK(std::abs(m.mean - gaussian_second_moment) < 3 * m.se);
  const auto s = mean_se(re_sq);
  CHECK(std::abs(s.mean) < 3 * s.se);
}

TEST_CASE("randomize with constant draws") {
  const auto g = small_grid();
  const auto u = test_field(g);
  const auto one = randomize(u, Draw::constant(g->spec(), 1.0));
  CHECK(sobolev_norm(one - u, 0.0) == 0.0);
  CHECK(randomize(u, Draw::constant(g->spec(), 0.0)).is_zero());
  const Draw partial(g->spec().band_min() + 1, g->spec().band_max(), g->m_max(), 1.0);
  CHECK_THROWS(randomize(u, partial));
}

TEST_CASE("randomization multiplies the mean mass by E|X|^2") {
  const auto g = small_grid();
  const auto u = test_field(g);
  const double m0 = std::pow(sobolev_norm(u, 0.0), 2);
  const auto ratios = grushin::parallel_map(10000, 1, [&](std::size_t s) {
    return std::pow(sobolev_norm(randomize(u, Draw::generate(11, s, g->spec())), 0.0), 2) / m0;
  });
  const auto r = mean_se(ratios);
  CHECK(std::abs(r.mean - gaussian_second_moment) < 3 * r.se);
}

TEST_CASE("linear flow") {
  const auto g = small_grid();
  const auto u = test_field(g);
  CHECK(sobolev_norm(linear_propagate(u, 0.0) - u, 0.0) == 0.0);
  for (double k : {0.0, 1.0, 1.5}) CHECK(sobolev_norm(linear_propagate(u, 0.8), k) == doctest::Approx(sobolev_norm(u, k)).epsilon(1e-12));
  SpectralField one(g);
  one.at(1, 4) = 1.0;  // (2m+1)|eta| = 3
  CHECK(std::abs(linear_propagate(one, std::numbers::pi / 3).at(1, 4) + 1.0) < 1e-14);
}

TEST_CASE("rough potential block norms") {
  const auto g = Grid::create(GridSpec::make(1.0, 8, 32, 1));
  const double k = 1.2, rho = 1.0;
  const auto u = rough_potential(k, rho, g);
  // X^k_rho weights cancel the block norms: the squared norm is
  // sum over blocks with I >= 1 of 1 / (log(1+I)^2 (m+1) log(m+2)^2).
  double oracle = 0.0;
  for (int j = 0; j <= g->spec().band_max(); ++j)
    for (int m = 0; m <= g->m_max(); ++m) {
      const double I = std::ldexp(1.0, j);
      oracle += 1.0 / (std::pow(std::log(1 + I), 2) * (m + 1) * std::pow(std::log(m + 2.0), 2));
    }
  CHECK(std::pow(x_norm(u, k, rho), 2) == doctest::Approx(oracle).epsilon(1e-12));
  std::vector<double> smooth, rough;
  for (double K : {8.0, 16.0, 32.0}) {
    smooth.push_back(truncated_sobolev2(u, k, K));
    rough.push_back(truncated_sobolev2(u, k + 0.25, K));
  }
  CHECK(rough[0] < rough[1]);
  CHECK(rough[1] < rough[2]);
  CHECK((smooth[2] - smooth[1]) / smooth[2] < 0.05);
}

TEST_CASE("decoupling identities for small families") {
  EnsembleConfig cfg{5, 10000, 1};
  const auto single = decoupling_moment_check({cplx(1.0)}, cfg);
  REQUIRE_FALSE(single.checks.empty());
  CHECK(single.checks[0].expected == doctest::Approx(2.0));
  CHECK(single.checks[0].pass());
  const auto pair = decoupling_moment_check({cplx(1.0), cplx(1.0)}, cfg);
  CHECK(pair.checks[0].expected == doctest::Approx(4.0));
  CHECK(std::abs(pair.checks[0].estimate - 4.0) < 3 * pair.checks[0].std_error);
  for (const auto& c : pair.checks)
    if (c.name.rfind("E[X^2]", 0) == 0) CHECK(c.pass());
  CHECK_THROWS_AS(decoupling_moment_check({cplx(1.0)}, EnsembleConfig{5, 100, 1}, 8.0), std::invalid_argument);
}

TEST_CASE("Gaussian tail fit recovers the Rayleigh exponent") {
  // P(|X| > R) = exp(-R^2 / 2) for X = g + ih.
  auto eng = sample_stream(9, 0, 0);
  std::vector<double> t(100000);
  for (auto& v : t) v = std::abs(complex_gaussian(eng));
  const auto fit = fit_gaussian_tail(t);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(0.06));
  CHECK(fit.r2 > 0.99);
}

TEST_CASE("quantile and Simpson weights") {
  CHECK(quantile({5.0, 1.0, 3.0, 2.0, 4.0}, 0.5) == 3.0);
  const auto w = simpson_weights(5, 1.0);
  const std::vector<double> expected = {1 / 12.0, 4 / 12.0, 2 / 12.0, 4 / 12.0, 1 / 12.0};
  for (int i = 0; i < 5; ++i) CHECK(w[i] == doctest::Approx(expected[i]));
}

TEST_CASE("integrability statistic is scale invariant and reproducible") {
  const auto g = Grid::create(GridSpec::make(1.0, 3, 8, 3));
  SpectralField u(g);
  for (int m = 0; m <= 8; ++m)
    for (int q = 1; q <= 3; ++q) u.at(m, q) = 1.0 / ((1.0 + m) * (1.0 + m) * q);
  EnsembleConfig cfg{3, 50, 1};
  const auto a = integrability_sweep(u, 1.5, 4.0, 2.0, 0.1, cfg, 17);
  const auto b = integrability_sweep(cplx(2.0) * u, 1.5, 4.0, 2.0, 0.1, cfg, 17);
  const auto c = integrability_sweep(u, 1.5, 4.0, 2.0, 0.1, cfg, 17);
  REQUIRE(a.quantiles.size() == b.quantiles.size());
  for (std::size_t i = 0; i < a.quantiles.size(); ++i) {
    CHECK(b.quantiles[i].value == doctest::Approx(a.quantiles[i].value).epsilon(1e-10));
    CHECK(c.quantiles[i].value == a.quantiles[i].value);
  }
}

TEST_CASE("non-smoothing surrogate on a rough potential") {
  const auto g = Grid::create(GridSpec::make(1.0, 8, 32, 1));
  const auto u = rough_potential(1.2, 1.0, g);
  const auto r = nonsmoothing_check(u, 1.2, 0.25, {8, 16, 32}, EnsembleConfig{1, 40, 1});
  CHECK(r.draws == 40);
  CHECK(r.increasing == 40);
  for (int i = 0; i < 3; ++i)
    CHECK(r.oracle_rough_sums[i] == doctest::Approx(gaussian_second_moment * truncated_sobolev2(u, 1.45, 8.0 * (1 << i))));
}
