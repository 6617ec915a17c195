#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grushin/spectral.hpp"

namespace grushin::spectral {

/// Element of D_1 = {-1, 0, 1} x {+, -}: Hermite index shift delta0 and the
/// type of the accompanying Fourier multiplier.
struct ShiftIndex {
  int delta0 = 0;
  int sign = -1;  // +1 for '+', -1 for '-'

  bool operator==(const ShiftIndex&) const = default;
  std::string str() const;
};

/// The six elements of D_1 in a fixed order.
const std::vector<ShiftIndex>& d1();

/// Multiplier F^delta_{I,m}(eta) for a block with packet A.
double shift_multiplier(const ShiftIndex& d, int m, double eta, std::int64_t A);

/// The block index (I, m) of a unimodal field, or nullopt when the field is
/// zero or spans several modes or bands.
std::optional<DyadicIndex> unimodal_index(const SpectralField& f);

/// delta-shifted block: coefficient multiplied by F^delta and Hermite index
/// moved to m + delta0. A zero field is returned for m = 0, delta0 = -1.
/// Throws std::invalid_argument for a non-unimodal field and
/// std::out_of_range when m + delta0 exceeds the grid.
SpectralField shift(const SpectralField& block, const ShiftIndex& d);

/// One entry of the exact product expansion of (Id - Delta_G) acting on a
/// product of unimodal blocks.
struct ShiftTerm {
  double coeff = 0.0;
  std::vector<ShiftIndex> shifts;
};

/// Exact expansion of (Id - Delta_G)(u_1 ... u_n) for blocks with the given
/// (I, m, A): one entry per tuple of D_1^n (zero coefficients included).
std::vector<ShiftTerm> expand_product_laplacian(const std::vector<DyadicIndex>& blocks);

/// Entries with non-zero coefficient (D_2 for two factors, D_3 for three).
std::vector<ShiftTerm> nonzero_terms(const std::vector<ShiftTerm>& terms);

/// Right-hand side of the expansion, sum coeff * product of shifted blocks,
/// with the products taken by multiply or multiply3.
SpectralField expansion_rhs(const std::vector<const SpectralField*>& blocks);

}  // namespace grushin::spectral
