#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "grushin/hermite.hpp"
#include "grushin/snapshot.hpp"
#include "grushin/spectral.hpp"

using namespace grushin::spectral;

namespace {

const double pi = std::numbers::pi;
const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * pi);

GridPtr small_grid() {
  static const GridPtr g = Grid::create(GridSpec::make(0.25, 12, 10, 3));
  return g;
}

SpectralField random_field(const GridPtr& g, unsigned seed, double decay = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SpectralField f(g);
  for (int m = 0; m <= g->m_max(); ++m)
    for (int q = -g->eta_count(); q <= g->eta_count(); ++q)
      if (q != 0) f.at(m, q) = cplx(n(rng), n(rng)) / std::pow(1.0 + m + std::abs(q), decay);
  return f;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) e = std::max(e, std::abs(a.data()[i] - b.data()[i]));
  return e;
}

// Trapezoid integral of conj(a) * b * c over the sampled strip.
cplx triple_integral(const PhysicalField& a, const PhysicalField& b, const PhysicalField& c, const Grid& g) {
  cplx s(0.0);
  for (int j = 0; j < a.nx; ++j)
    for (int l = 0; l < a.ny; ++l) s += g.w()[j] * std::conj(a(j, l)) * b(j, l) * c(j, l);
  return s * (a.y_period / a.ny);
}

}  // namespace

TEST_CASE("synthesis of one mode matches the closed form") {
  const auto g = small_grid();
  SpectralField f(g);
  const cplx c(0.3, -1.1);
  const int q = 5;
  f.at(1, q) = c;
  const auto u = synthesize(f, 64);
  const double eta = q * g->spec().eta_step;
  for (int j : {0, g->x_count() / 3, g->x_count() / 2}) {
    for (int l : {0, 7, 40}) {
      const double x = g->x()[j];
      const double y = l * u.y_period / u.ny;
      const double h1 = std::sqrt(2.0) * std::sqrt(eta) * x * std::pow(pi, -0.25) * std::exp(-eta * x * x / 2);
      const cplx expected = g->spec().eta_step * inv_sqrt_2pi * c * std::exp(cplx(0.0, eta * y)) * h1;
      CHECK(std::abs(u(j, l) - expected) < 1e-13);
    }
  }
}

TEST_CASE("norms of a single mode follow the weighted formula") {
  const auto g = small_grid();
  SpectralField f(g);
  const cplx c(2.0, 1.0);
  const int m = 3, q = -9;  // |eta| = 2.25, band I = 2
  f.at(m, q) = c;
  const double eta = 2.25, de = 0.25;
  const double l2 = std::norm(c) / std::sqrt(eta) * de;
  CHECK(std::pow(sobolev_norm(f, 0.0), 2) == doctest::Approx(l2).epsilon(1e-14));
  CHECK(std::pow(sobolev_norm(f, 1.5), 2) == doctest::Approx(std::pow(1 + 7 * eta, 1.5) * l2).epsilon(1e-14));
  CHECK(std::pow(x_norm(f, 1.0, 1.0), 2) == doctest::Approx((1 + 7 * 2.0) * std::sqrt(5.0) * l2).epsilon(1e-14));
  CHECK(band_exponent(eta) == 1);
  CHECK(packet_of(1, 3) == 8);  // 1 + 7 * 2 = 15 in [8, 16)
}

TEST_CASE("Plancherel: spectral and physical L^2 norms agree") {
  const auto g = small_grid();
  const auto f = random_field(g, 3);
  CHECK(physical_l2(synthesize(f), *g) == doctest::Approx(sobolev_norm(f, 0.0)).epsilon(1e-10));
}

TEST_CASE("analyze inverts synthesize") {
  const auto g = small_grid();
  const auto f = random_field(g, 4);
  const auto back = analyze(synthesize(f), g);
  CHECK(max_abs_diff(back, f) < 1e-10 * sobolev_norm(f, 0.0));
  PhysicalField wrong(g->x_count() + 1, 64, g->spec().y_period());
  CHECK_THROWS_AS(analyze(wrong, g), std::invalid_argument);
}

TEST_CASE("square of a Gaussian mode is a single Gaussian mode") {
  // h_0(sqrt(eta) x)^2 = pi^{-1/4} h_0(sqrt(2 eta) x)
  const auto g = small_grid();
  SpectralField f(g);
  const cplx c(0.8, 0.6);
  f.at(0, 2) = c;
  const auto p = multiply(f, f);
  SpectralField expected(g);
  expected.at(0, 4) = g->spec().eta_step * inv_sqrt_2pi * c * c * std::pow(pi, -0.25);
  CHECK(max_abs_diff(p, expected) < 1e-12);
}

TEST_CASE("multiply and multiply3 are Galerkin projections") {
  const auto g = small_grid();
  const auto f = random_field(g, 5, 1.5);
  const auto h = random_field(g, 6, 1.5);
  const auto w = random_field(g, 7, 1.5);
  const int ny = g->y_count(4);
  const auto F = synthesize(f, ny), H = synthesize(h, ny), W = synthesize(w, ny);
  const cplx direct = triple_integral(W, F, H, *g);
  const cplx via = inner(w, multiply(f, h));
  CHECK(std::abs(via - direct) < 1e-10 * std::abs(direct));

  const auto c = cubic(f);
  const auto fc = conjugate(f);
  const cplx c_via = inner(w, c);
  const cplx m3_via = inner(w, multiply3(f, fc, f));
  CHECK(std::abs(c_via - m3_via) < 1e-10 * std::abs(c_via));
}

TEST_CASE("conjugate is the spectral image of pointwise conjugation") {
  const auto g = small_grid();
  const auto f = random_field(g, 8);
  const auto U = synthesize(f), C = synthesize(conjugate(f));
  double err = 0.0;
  for (std::size_t i = 0; i < U.v.size(); ++i) err = std::max(err, std::abs(C.v[i] - std::conj(U.v[i])));
  CHECK(err < 1e-13);
}

TEST_CASE("linear phase flow is an isometry with a group law") {
  const auto g = small_grid();
  const auto f = random_field(g, 9);
  const auto a = propagate_phase(f, 0.37);
  for (double k : {0.0, 1.0, 1.5}) CHECK(sobolev_norm(a, k) == doctest::Approx(sobolev_norm(f, k)).epsilon(1e-12));
  CHECK(x_norm(a, 1.5, 1.0) == doctest::Approx(x_norm(f, 1.5, 1.0)).epsilon(1e-12));
  CHECK(max_abs_diff(propagate_phase(a, 0.2), propagate_phase(f, 0.57)) < 1e-12);
  CHECK(max_abs_diff(propagate_phase(f, 0.0), f) == 0.0);

  SpectralField one(g);
  one.at(1, 4) = 1.0;  // (2m+1)|eta| = 3
  CHECK(std::abs(propagate_phase(one, pi / 3).at(1, 4) - cplx(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("block and packet decompositions are orthogonal") {
  const auto g = small_grid();
  const auto f = random_field(g, 10);
  const double total = std::pow(sobolev_norm(f, 0.0), 2);
  double blocks = 0.0, via_extract = 0.0, packets_sum = 0.0;
  for (const auto& b : all_blocks(g->spec())) {
    blocks += block_norm2(f, b.band_exp, b.m);
    via_extract += std::pow(sobolev_norm(band_extract(f, b.band_exp, b.m), 0.0), 2);
  }
  SpectralField rebuilt(g);
  for (auto A : packets(g->spec())) {
    const auto p = packet_extract(f, A);
    packets_sum += std::pow(sobolev_norm(p, 0.0), 2);
    rebuilt += p;
  }
  CHECK(blocks == doctest::Approx(total).epsilon(1e-12));
  CHECK(via_extract == doctest::Approx(total).epsilon(1e-12));
  CHECK(packets_sum == doctest::Approx(total).epsilon(1e-12));
  CHECK(max_abs_diff(rebuilt, f) == 0.0);
}

TEST_CASE("smooth cutoff and projector") {
  CHECK(chi(0.0) == 1.0);
  CHECK(chi(0.5) == 1.0);
  CHECK(chi(1.0) == 0.0);
  CHECK(chi(2.0) == 0.0);
  double prev = 1.0;
  for (double r = 0.5; r <= 1.0; r += 0.01) {
    CHECK(chi(r) <= prev);
    prev = chi(r);
  }
  const auto g = small_grid();
  const auto f = random_field(g, 11);
  // Modes of packet B satisfy 1 + (2m+1)|eta| < 4B, so P_{<=A} fixes the
  // packet exactly once 8B <= A.
  const auto p = packet_extract(f, 4);
  CHECK(max_abs_diff(smooth_project(p, 32.0), p) == 0.0);
  CHECK(max_abs_diff(smooth_project(p, 16.0), p) > 0.0);
  CHECK(smooth_project(packet_extract(f, 32), 16.0).is_zero());

  SpectralField one(g);
  one.at(1, 1) = 1.0;  // 1 + 3 * 0.25 = 1.75 = A / 4 for A = 7
  CHECK(smooth_project(one, 7.0).at(1, 1) == cplx(1.0));
  SpectralField two(g);
  two.at(0, 4) = 1.0;  // 1 + 1 = 2 = 2A for A = 1
  CHECK(smooth_project(two, 1.0).is_zero());
}

TEST_CASE("resolvent power is diagonal") {
  const auto g = small_grid();
  SpectralField f(g);
  f.at(2, 3) = 1.0;
  CHECK(apply_resolvent_power(f, 2.0).at(2, 3).real() == doctest::Approx(std::pow(1 + 5 * 0.75, 2.0)));
}

TEST_CASE("embedding keeps coefficients and norms") {
  const auto g = small_grid();
  const auto big = Grid::create(GridSpec::make(0.25, 16, 14, 3));
  const auto f = random_field(g, 12);
  const auto e = embed(f, big);
  CHECK(sobolev_norm(e, 1.0) == doctest::Approx(sobolev_norm(f, 1.0)).epsilon(1e-14));
  CHECK(e.at(3, -7) == f.at(3, -7));
}

TEST_CASE("product norms in physical space") {
  const auto g = small_grid();
  SpectralField f(g);
  f.at(0, 2) = 1.0;
  // For a field on the grid, the l = 0 product norm of a single factor is its L^2 norm.
  CHECK(product_sobolev_norm({&f}, 0) == doctest::Approx(sobolev_norm(f, 0.0)).epsilon(1e-10));
  CHECK(product_sobolev_norm({&f}, 1) == doctest::Approx(sobolev_norm(f, 1.0)).epsilon(1e-10));
  CHECK(product_sobolev_norm({&f}, 2) == doctest::Approx(sobolev_norm(f, 2.0)).epsilon(1e-10));
}

TEST_CASE("snapshot round trip at single precision") {
  const auto g = small_grid();
  const auto f = random_field(g, 13);
  std::stringstream buf;
  write_snapshot(buf, f);
  const auto back = read_snapshot(buf);
  CHECK(back.grid()->spec() == g->spec());
  CHECK(max_abs_diff(back, f) < 1e-6);
  std::stringstream bad("NOTGRSF");
  CHECK_THROWS(read_snapshot(bad));
}

TEST_CASE("grid validation") {
  GridSpec s = GridSpec::make(0.25, 8, 8, 3);
  s.x_range = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_THROWS_AS(band_exponent(0.0), std::domain_error);
}
