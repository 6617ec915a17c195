#include "grushin/shift.hpp"

#include <cmath>
#include <stdexcept>

#include "grushin/hermite.hpp"

namespace grushin::spectral {

std::string ShiftIndex::str() const {
  return "(" + std::to_string(delta0) + "," + (sign > 0 ? "+" : "-") + ")";
}

const std::vector<ShiftIndex>& d1() {
  static const std::vector<ShiftIndex> set = {{-1, 1}, {-1, -1}, {0, 1}, {0, -1}, {1, 1}, {1, -1}};
  return set;
}

double shift_multiplier(const ShiftIndex& d, int m, double eta, std::int64_t A) {
  const double ratio = (2.0 * m + 1.0) * std::abs(eta) / (4.0 * static_cast<double>(A));
  if (d.delta0 == 0) return d.sign > 0 ? ratio : 1.0;
  const double root = std::sqrt(ratio);
  if (d.sign > 0) return root;
  return eta < 0.0 ? -root : root;
}

std::optional<DyadicIndex> unimodal_index(const SpectralField& f) {
  const double de = f.grid()->spec().eta_step;
  std::optional<DyadicIndex> found;
  for (int m = 0; m <= f.m_max(); ++m)
    for (int col = 0; col < f.columns(); ++col) {
      if (f.data()[static_cast<std::size_t>(m) * f.columns() + col] == cplx(0.0)) continue;
      const int j = band_exponent(std::abs(f.q_of(col)) * de);
      if (!found) {
        found = DyadicIndex{j, m, packet_of(j, m)};
      } else if (found->m != m || found->band_exp != j) {
        return std::nullopt;
      }
    }
  return found;
}

SpectralField shift(const SpectralField& block, const ShiftIndex& d) {
  SpectralField out(block.grid());
  if (block.is_zero()) return out;
  const auto idx = unimodal_index(block);
  if (!idx) throw std::invalid_argument("shift: field is not a single (I, m) block");
  const int target = idx->m + d.delta0;
  if (target < 0) return out;
  if (target > block.m_max()) throw std::out_of_range("shift: shifted index exceeds the grid");
  const double de = block.grid()->spec().eta_step;
  for (int col = 0; col < block.columns(); ++col) {
    const cplx c = block.data()[static_cast<std::size_t>(idx->m) * block.columns() + col];
    if (c == cplx(0.0)) continue;
    const double eta = block.q_of(col) * de;
    out.data()[static_cast<std::size_t>(target) * block.columns() + col] = shift_multiplier(d, idx->m, eta, idx->A) * c;
  }
  return out;
}

namespace {

// Coefficient of h_{m+d} in x h_m (type X) or in h_m' (type D), d = +-1.
double ladder(int m, int d, bool derivative) {
  if (d < 0) return std::sqrt(m / 2.0);
  const double b = std::sqrt((m + 1) / 2.0);
  return derivative ? -b : b;
}

double term_coefficient(const std::vector<DyadicIndex>& blocks, const std::vector<ShiftIndex>& s) {
  const std::size_t n = blocks.size();
  std::vector<std::size_t> moved, plus_zero;
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i].delta0 != 0)
      moved.push_back(i);
    else if (s[i].sign > 0)
      plus_zero.push_back(i);
  }
  if (moved.empty()) {
    if (plus_zero.empty()) return 1.0;
    if (plus_zero.size() == 1) return 4.0 * static_cast<double>(blocks[plus_zero[0]].A);
    return 0.0;
  }
  if (moved.size() != 2 || !plus_zero.empty()) return 0.0;
  const std::size_t i = moved[0], j = moved[1];
  if (s[i].sign != s[j].sign) return 0.0;
  const bool derivative = s[i].sign > 0;
  const double pref = 8.0 * std::sqrt(static_cast<double>(blocks[i].A) * static_cast<double>(blocks[j].A)) /
                      (hermite::lambda(blocks[i].m) * hermite::lambda(blocks[j].m));
  const double c = ladder(blocks[i].m, s[i].delta0, derivative) * ladder(blocks[j].m, s[j].delta0, derivative);
  return derivative ? -pref * c : pref * c;
}

}  // namespace

std::vector<ShiftTerm> expand_product_laplacian(const std::vector<DyadicIndex>& blocks) {
  const std::size_t n = blocks.size();
  if (n == 0) throw std::invalid_argument("expand_product_laplacian: no blocks");
  const auto& base = d1();
  std::vector<ShiftTerm> out;
  std::vector<std::size_t> digits(n, 0);
  while (true) {
    ShiftTerm t;
    for (std::size_t i = 0; i < n; ++i) t.shifts.push_back(base[digits[i]]);
    t.coeff = term_coefficient(blocks, t.shifts);
    out.push_back(std::move(t));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++digits[k] < base.size()) break;
      digits[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::vector<ShiftTerm> nonzero_terms(const std::vector<ShiftTerm>& terms) {
  std::vector<ShiftTerm> out;
  for (const auto& t : terms)
    if (t.coeff != 0.0) out.push_back(t);
  return out;
}

SpectralField expansion_rhs(const std::vector<const SpectralField*>& blocks) {
  if (blocks.size() != 2 && blocks.size() != 3) throw std::invalid_argument("expansion_rhs: two or three blocks");
  std::vector<DyadicIndex> idx;
  for (const auto* b : blocks) {
    const auto i = unimodal_index(*b);
    if (!i) throw std::invalid_argument("expansion_rhs: factor is not a single block");
    idx.push_back(*i);
  }
  SpectralField out(blocks[0]->grid());
  for (const auto& t : nonzero_terms(expand_product_laplacian(idx))) {
    std::vector<SpectralField> s;
    for (std::size_t i = 0; i < blocks.size(); ++i) s.push_back(shift(*blocks[i], t.shifts[i]));
    SpectralField prod = s.size() == 2 ? multiply(s[0], s[1]) : multiply3(s[0], s[1], s[2]);
    prod *= t.coeff;
    out += prod;
  }
  return out;
}

}  // namespace grushin::spectral
