#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace grushin::spectral {

using cplx = std::complex<double>;

/// Discretisation of the (x, y) plane and of the Fourier-Hermite frame.
///
/// y is periodic with period 2 pi / eta_step, so its Fourier variable lives on
/// the lattice eta_q = q eta_step, 1 <= |q| <= eta_count. The zero frequency
/// carries no coefficient. x is sampled uniformly on [-x_range, x_range].
struct GridSpec {
  double eta_step = 0.25;
  int eta_count = 16;
  int m_max = 32;
  double x_range = 0.0;
  int x_count = 0;
  /// y zero-padding ratio for quadratic products (the 3/2 rule); higher
  /// order products scale it proportionally.
  double dealias_factor = 1.5;

  /// Grid with default x sampling: x_range = 2 lambda_{m_max}/sqrt(eta_step) + 8
  /// and a spacing fine enough for trapezoid quadrature of products of up to
  /// product_order fields against one basis function.
  static GridSpec make(double eta_step, int eta_count, int m_max, int product_order = 3,
                       double dealias_factor = 1.5);

  double eta(int q) const { return q * eta_step; }
  double y_period() const;
  /// Smallest and largest band exponent j (band I = 2^j) present on the lattice.
  int band_min() const;
  int band_max() const;

  /// Throws std::invalid_argument when a field is malformed or the x grid
  /// does not contain the classically allowed region of the widest mode.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Band exponent j of a lattice frequency: 2^j <= |eta| < 2^{j+1}.
int band_exponent(double abs_eta);

/// The packet A (power of two) with 1 + (2m+1) I in [A, 2A).
std::int64_t packet_of(int band_exp, int m);

/// Shared immutable discretisation context: the GridSpec plus x nodes, weights and
/// the basis table h_m(sqrt|eta_q| x_j) for |q| <= eta_count, m <= m_max + 2.
class Grid {
 public:
  static std::shared_ptr<const Grid> create(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int eta_count() const { return spec_.eta_count; }
  int m_max() const { return spec_.m_max; }
  int basis_rows() const { return spec_.m_max + 3; }
  int x_count() const { return spec_.x_count; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& w() const { return w_; }

  /// Row of h_m(sqrt(|q| eta_step) x_j), j = 0..x_count-1.
  const double* basis(int abs_q, int m) const;

  /// Number of y samples making an order-n product alias free on the lattice.
  int y_count(int order) const;
  /// Number of y samples making the integral of |product of n fields|^2 exact.
  int y_count_norm(int order) const;

 private:
  explicit Grid(const GridSpec& spec);
  GridSpec spec_;
  std::vector<double> x_;
  std::vector<double> w_;
  std::vector<double> basis_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Coefficients f[m][q] of F_{y->eta}u(x, eta_q) = sum_m f[m][q] h_m(sqrt|eta_q| x).
/// Storage is m-major, q-minor with q running over -Q..-1, 1..Q.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  int m_max() const { return grid_->m_max(); }
  int eta_count() const { return grid_->eta_count(); }
  int columns() const { return 2 * grid_->eta_count(); }

  /// Column index of q in storage order, and its inverse.
  int column(int q) const { return q < 0 ? q + eta_count() : q + eta_count() - 1; }
  int q_of(int col) const { return col < eta_count() ? col - eta_count() : col - eta_count() + 1; }

  cplx& at(int m, int q) { return data_[static_cast<std::size_t>(m) * columns() + column(q)]; }
  const cplx& at(int m, int q) const { return data_[static_cast<std::size_t>(m) * columns() + column(q)]; }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx s);
  bool is_zero() const;

 private:
  GridPtr grid_;
  std::vector<cplx> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx s, SpectralField a);

/// Samples u(x_j, y_l) with y_l = l * period / ny, stored x-major.
struct PhysicalField {
  int nx = 0;
  int ny = 0;
  double y_period = 0.0;
  std::vector<cplx> v;

  PhysicalField() = default;
  PhysicalField(int nx_, int ny_, double period) : nx(nx_), ny(ny_), y_period(period), v(static_cast<std::size_t>(nx_) * ny_) {}
  cplx& operator()(int j, int l) { return v[static_cast<std::size_t>(j) * ny + l]; }
  const cplx& operator()(int j, int l) const { return v[static_cast<std::size_t>(j) * ny + l]; }
};

/// Physical samples of the field on ny points in y (ny = 0 selects y_count(1)).
PhysicalField synthesize(const SpectralField& f, int ny = 0);

/// Unitary y transform followed by Hermite projection at every lattice node.
/// Throws std::invalid_argument when the samples do not match the grid.
SpectralField analyze(const PhysicalField& u, const GridPtr& grid);

/// Trapezoid value of the L^2 norm of a physical field on the grid's x nodes.
double physical_l2(const PhysicalField& u, const Grid& grid);

/// sqrt(sum (1+(2m+1)|eta|)^k |f|^2 |eta|^{-1/2} eta_step).
double sobolev_norm(const SpectralField& f, double k);

/// sqrt(sum over blocks (I,m) of (1+(2m+1)I)^k <I>^rho ||u_{I,m}||^2).
double x_norm(const SpectralField& f, double k, double rho);

/// Squared L^2 norm of one block (I = 2^band_exp, m).
double block_norm2(const SpectralField& f, int band_exp, int m);

struct DyadicIndex {
  int band_exp = 0;  // I = 2^band_exp
  int m = 0;
  std::int64_t A = 1;
  double I() const;
};

/// All blocks of the lattice in (band, m) order.
std::vector<DyadicIndex> all_blocks(const GridSpec& spec);

SpectralField band_extract(const SpectralField& f, int band_exp, int m);
SpectralField packet_extract(const SpectralField& f, std::int64_t A);
/// Distinct packets present on the lattice, ascending.
std::vector<std::int64_t> packets(const GridSpec& spec);

/// Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), C-infinity in between.
double chi(double r);
/// Multiplies mode (m, eta_q) by chi((1 + (2m+1)|eta_q|)/A).
SpectralField smooth_project(const SpectralField& f, double A);
/// Multiplies mode (m, eta_q) by (1 + (2m+1)|eta_q|)^s.
SpectralField apply_resolvent_power(const SpectralField& f, double s);
/// Multiplies mode (m, eta_q) by exp(i t (2m+1)|eta_q|).
SpectralField propagate_phase(const SpectralField& f, double t);
/// Spectral representation of the complex conjugate field.
SpectralField conjugate(const SpectralField& f);
/// L^2_G inner product sum conj(f) g |eta|^{-1/2} eta_step.
cplx inner(const SpectralField& f, const SpectralField& g);

/// Pointwise product in physical space with y padding, re-analysed and
/// truncated to the grid.
SpectralField multiply(const SpectralField& f, const SpectralField& g);
SpectralField multiply3(const SpectralField& f, const SpectralField& g, const SpectralField& h);
/// |u|^2 u evaluated pointwise with cubic padding.
SpectralField cubic(const SpectralField& u);

/// Physical samples of u together with -Delta_G u, d_x u and x d_y u.
struct GradientBundle {
  PhysicalField u;
  PhysicalField neg_lap;
  PhysicalField dx;
  PhysicalField xdy;
};
GradientBundle synthesize_bundle(const SpectralField& f, int ny);

/// (Id - Delta_G)(u_1 ... u_n) sampled pointwise, from the product rule for
/// the second order operator Delta_G = d_x^2 + x^2 d_y^2. All bundles must
/// share one sampling.
PhysicalField resolvent_of_product(const std::vector<const GradientBundle*>& factors);
/// Pointwise product of the u components.
PhysicalField product_of(const std::vector<const GradientBundle*>& factors);

/// ||u_1 ... u_n||_{H^l} for l in {0, 1, 2}, computed in physical space
/// without truncating the product. The y-mean of the product is included.
double product_sobolev_norm(const std::vector<const SpectralField*>& factors, int l);

/// Physical Lebesgue norm ||u||_{L^p} (p = infinity gives the sample maximum).
double physical_lp(const PhysicalField& u, const Grid& grid, double p);

/// Copies coefficients into a grid with the same eta_step and at least as
/// many lattice points and modes.
SpectralField embed(const SpectralField& f, const GridPtr& target);

}  // namespace grushin::spectral
