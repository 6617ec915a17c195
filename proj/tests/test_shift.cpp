#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "grushin/shift.hpp"
#include "grushin/spectral.hpp"

using namespace grushin::spectral;

namespace {

GridPtr shift_grid() {
  static const GridPtr g = Grid::create(GridSpec::make(0.25, 32, 24, 3));
  return g;
}

SpectralField random_block(const GridPtr& g, int band_exp, int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  SpectralField f(g);
  for (int q = -g->eta_count(); q <= g->eta_count(); ++q) {
    if (q == 0 || band_exponent(std::abs(q) * g->spec().eta_step) != band_exp) continue;
    f.at(m, q) = cplx(n(rng), n(rng));
  }
  return f;
}

double rel_l2(const SpectralField& a, const SpectralField& b) { return sobolev_norm(a - b, 0.0) / sobolev_norm(a, 0.0); }

}  // namespace

TEST_CASE("the (0,-) shift is the identity") {
  std::mt19937_64 rng(1);
  const auto u = random_block(shift_grid(), 0, 5, rng);
  const auto s = shift(u, ShiftIndex{0, -1});
  CHECK(sobolev_norm(s - u, 0.0) == 0.0);
}

TEST_CASE("shift multipliers") {
  // (2m+1)|eta| / (4A) with m = 1, eta = 1.5, A = packet_of(0, 1) = 4
  const double r = 3 * 1.5 / 16.0;
  CHECK(shift_multiplier({0, 1}, 1, 1.5, 4) == doctest::Approx(r));
  CHECK(shift_multiplier({1, 1}, 1, 1.5, 4) == doctest::Approx(std::sqrt(r)));
  CHECK(shift_multiplier({-1, -1}, 1, -1.5, 4) == doctest::Approx(-std::sqrt(r)));
  CHECK(shift_multiplier({-1, -1}, 1, 1.5, 4) == doctest::Approx(std::sqrt(r)));
}

TEST_CASE("shift moves the Hermite index and drops below zero") {
  std::mt19937_64 rng(2);
  const auto u = random_block(shift_grid(), 1, 0, rng);
  CHECK(shift(u, ShiftIndex{-1, 1}).is_zero());
  const auto up = shift(u, ShiftIndex{1, 1});
  CHECK(unimodal_index(up)->m == 1);
  SpectralField two = u;
  two.at(3, 5) = 1.0;
  CHECK_THROWS_AS(shift(two, ShiftIndex{1, 1}), std::invalid_argument);
}

TEST_CASE("pair expansion coefficients") {
  const std::vector<DyadicIndex> blocks = {{0, 2, packet_of(0, 2)}, {-1, 4, packet_of(-1, 4)}};
  const auto terms = expand_product_laplacian(blocks);
  CHECK(terms.size() == 36);
  const auto nz = nonzero_terms(terms);
  for (const auto& t : nz) CHECK(std::abs(t.coeff) <= 4.0 * std::max(blocks[0].A, blocks[1].A));
  bool saw_identity = false, saw_first = false;
  for (const auto& t : nz) {
    if (t.shifts[0] == ShiftIndex{0, -1} && t.shifts[1] == ShiftIndex{0, -1}) {
      saw_identity = true;
      CHECK(t.coeff == 1.0);
    }
    if (t.shifts[0] == ShiftIndex{0, 1} && t.shifts[1] == ShiftIndex{0, -1}) {
      saw_first = true;
      CHECK(t.coeff == doctest::Approx(4.0 * blocks[0].A));
    }
  }
  CHECK(saw_identity);
  CHECK(saw_first);
}

TEST_CASE("shift expansion reproduces (Id - Delta_G) of products") {
  const auto g = shift_grid();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> mi(0, 20), bi(-2, 2);
  double worst = 0.0;
  for (int t = 0; t < 6; ++t) {
    const auto u = random_block(g, bi(rng), mi(rng), rng);
    const auto v = random_block(g, bi(rng), mi(rng), rng);
    const auto lhs = apply_resolvent_power(multiply(u, v), 1.0);
    worst = std::max(worst, rel_l2(lhs, expansion_rhs({&u, &v})));
  }
  CHECK(worst < 1e-8);

  std::uniform_int_distribution<int> mt(0, 10), bt(-2, 1);
  const auto a = random_block(g, bt(rng), mt(rng), rng);
  const auto b = random_block(g, bt(rng), mt(rng), rng);
  const auto c = random_block(g, bt(rng), mt(rng), rng);
  const auto lhs3 = apply_resolvent_power(multiply3(a, b, c), 1.0);
  CHECK(rel_l2(lhs3, expansion_rhs({&a, &b, &c})) < 1e-8);
}
