#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace grushin::hermite {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// lambda_m = sqrt(2m+1), the square root of the harmonic oscillator eigenvalue.
double lambda(int m);

/// Orthonormal Hermite function h_m(x), normalised so that h_0 > 0.
///
/// Uses the three-term upward recurrence with a running exponent so that the
/// Gaussian factor never underflows before the polynomial part has grown.
double eval(int m, double x);

/// Writes h_0(x), ..., h_{m_max}(x) into out[0..m_max].
void eval_all(int m_max, double x, double* out);

/// h_m'(x) = sqrt(m/2) h_{m-1}(x) - sqrt((m+1)/2) h_{m+1}(x).
double derivative(int m, double x);

/// Three-region pointwise envelope for |h_m(x)|.
///
///   lambda^{-1/2}                        for |x| <= lambda/2
///   (lambda^{2/3} + |x^2 - lambda^2|)^{-1/4} for lambda/2 <= |x| <= 2 lambda
///   exp(-x^2/8)                          for |x| >= 2 lambda
///
/// At the two region boundaries the larger of the adjacent branches is returned.
double envelope_bound(int m, double x);

/// Decay exponent of ||h_m||_{L^p}: 1/2 - 1/p on [2,4], 1/6 + 1/(3p) above 4.
/// Accepts p = infinity; throws std::domain_error for p < 2.
double zeta(double p);

/// Uniform symmetric grid on [-x_range, x_range] with trapezoid weights.
struct XGrid {
  double x_range = 8.0;
  int x_count = 321;

  double spacing() const;
  std::vector<double> nodes() const;
  std::vector<double> weights() const;

  /// Default grid for modes up to m_max: X = 2 lambda + 8 and spacing at most
  /// min(0.5 lambda^{-1/3}, 0.05). For p > 2 the spacing is additionally
  /// reduced so that |h_m|^p is sampled above its oscillation scale.
  static XGrid for_modes(int m_max, double p = 2.0);

  /// True when the grid covers [-(2 lambda_m + 6), 2 lambda_m + 6] and the
  /// spacing resolves both the Airy scale lambda^{-1/3} and the bulk
  /// wavelength 2 pi / lambda of h_m.
  bool resolves(int m) const;
};

/// Quadrature value of ||h_m||_{L^p(R)}; for p = infinity the grid maximum.
/// Throws std::invalid_argument when the grid does not resolve h_m.
double lp_norm(int m, double p, const XGrid& grid);

/// Immutable table of h_m at the nodes of a quadrature grid.
class HermiteTable {
 public:
  HermiteTable(int m_max, std::vector<double> nodes, std::vector<double> weights);
  HermiteTable(int m_max, const XGrid& grid);

  int m_max() const { return m_max_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// h_m(x_j) for 0 <= m <= m_max + 2 (two rows of headroom for the
  /// second-derivative recurrence).
  double value(int m, std::size_t j) const { return values_[static_cast<std::size_t>(m) * nodes_.size() + j]; }
  const double* row(int m) const { return values_.data() + static_cast<std::size_t>(m) * nodes_.size(); }

  /// h_m'' from the recurrence calculus,
  /// (1/2)[sqrt(m(m-1)) h_{m-2} - (2m+1) h_m + sqrt((m+1)(m+2)) h_{m+2}].
  double second_derivative(int m, std::size_t j) const;

  /// max_{m,n} |sum_j w_j h_m(x_j) h_n(x_j) - delta_{mn}|.
  double orthonormality_defect() const;

  /// max_j |-h_m'' + x^2 h_m - (2m+1) h_m|.
  double eigen_residual(int m) const;

  /// max_j |x h_m - sqrt(m/2) h_{m-1} - sqrt((m+1)/2) h_{m+1}| / (1 + |x h_m|).
  double recurrence_residual(int m) const;

 private:
  int m_max_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> values_;
};

struct EnvelopeRow {
  int m = 0;
  double max_ratio = 0.0;  // max_x |h_m(x)| / envelope_bound(m, x)
  double argmax_x = 0.0;
};

/// Maximum of |h_m(x)|/envelope_bound(m,x) over x >= 0 for every m <= m_max.
/// The grid spacing is at most min(0.05, 0.2/lambda_{m_max}).
std::vector<EnvelopeRow> envelope_sweep(int m_max);

struct LpRow {
  int m = 0;
  double p = 2.0;
  double norm = 0.0;
  double scaled = 0.0;  // norm * lambda_m^{zeta(p)}
};

/// ||h_m||_{L^p} and ||h_m||_{L^p} lambda_m^{zeta(p)} for every (m, p) pair.
/// All modes share one grid sized for the largest m and p.
std::vector<LpRow> lp_sweep(const std::vector<int>& ms, const std::vector<double>& ps);

}  // namespace grushin::hermite
