#include "grushin/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "grushin/hermite.hpp"

namespace grushin::spectral {

namespace {

const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

int next_smooth(int n) {
  for (int c = std::max(n, 1);; ++c) {
    int r = c;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return c;
  }
}

// FFTW planning is not thread safe; execution on new arrays is.
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan row_plan(int nx, int ny, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(nx, ny, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::vector<cplx> scratch(static_cast<std::size_t>(nx) * ny);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p = fftw_plan_many_dft(1, &ny, nx, buf, nullptr, 1, ny, buf, nullptr, 1, ny, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_cache.emplace(key, p);
  return p;
}

void fft_rows(std::vector<cplx>& data, int nx, int ny, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(row_plan(nx, ny, sign), buf, buf);
}

int wrap(int q, int ny) { return ((q % ny) + ny) % ny; }

// Synthesis from a coefficient table with `rows` Hermite rows and 2Q columns.
PhysicalField synth_table(const Grid& g, const std::vector<cplx>& coeffs, int rows, int ny) {
  const int Q = g.eta_count();
  const int cols = 2 * Q;
  const int nx = g.x_count();
  if (ny < 2 * Q + 1) throw std::invalid_argument("synthesize: y sampling below 2Q+1");
  if (rows > g.basis_rows()) throw std::invalid_argument("synthesize: coefficient rows exceed basis table");
  PhysicalField out(nx, ny, g.spec().y_period());
  std::vector<double> re(nx), im(nx);
  const double scale = g.spec().eta_step * inv_sqrt_2pi;
  for (int col = 0; col < cols; ++col) {
    const int q = col < Q ? col - Q : col - Q + 1;
    const int aq = std::abs(q);
    bool any = false;
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (int m = 0; m < rows; ++m) {
      const cplx c = coeffs[static_cast<std::size_t>(m) * cols + col];
      if (c == cplx(0.0)) continue;
      any = true;
      const double cr = c.real(), ci = c.imag();
      const double* b = g.basis(aq, m);
      for (int j = 0; j < nx; ++j) {
        re[j] += cr * b[j];
        im[j] += ci * b[j];
      }
    }
    if (!any) continue;
    const int slot = wrap(q, ny);
    for (int j = 0; j < nx; ++j) out.v[static_cast<std::size_t>(j) * ny + slot] = scale * cplx(re[j], im[j]);
  }
  fft_rows(out.v, nx, ny, FFTW_BACKWARD);
  return out;
}

double integrate_abs2(const std::vector<cplx>& v, int nx, int ny, const Grid& g, double period) {
  const double dy = period / ny;
  double acc = 0.0;
  for (int j = 0; j < nx; ++j) {
    double row = 0.0;
    const cplx* r = v.data() + static_cast<std::size_t>(j) * ny;
    for (int l = 0; l < ny; ++l) row += std::norm(r[l]);
    acc += g.w()[j] * row;
  }
  return acc * dy;
}

void check_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!a.grid() || !b.grid()) throw std::invalid_argument("spectral field without grid");
  if (a.grid() != b.grid() && !(a.grid()->spec() == b.grid()->spec()))
    throw std::invalid_argument("spectral fields live on different grids");
}

PhysicalField pointwise(const std::vector<const PhysicalField*>& fs) {
  PhysicalField out = *fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) {
    if (fs[i]->nx != out.nx || fs[i]->ny != out.ny) throw std::invalid_argument("pointwise: sampling mismatch");
    for (std::size_t s = 0; s < out.v.size(); ++s) out.v[s] *= fs[i]->v[s];
  }
  return out;
}

}  // namespace

GridSpec GridSpec::make(double eta_step, int eta_count, int m_max, int product_order, double dealias_factor) {
  GridSpec s;
  s.eta_step = eta_step;
  s.eta_count = eta_count;
  s.m_max = m_max;
  s.dealias_factor = dealias_factor;
  const double lam = hermite::lambda(m_max);
  s.x_range = 2.0 * lam / std::sqrt(eta_step) + 8.0;
  const double k_max = std::sqrt(eta_count * eta_step) * lam;
  const double dx = std::min(0.05, 0.8 * 2.0 * std::numbers::pi / ((product_order + 1) * k_max));
  s.x_count = 2 * static_cast<int>(std::ceil(s.x_range / dx)) + 1;
  return s;
}

double GridSpec::y_period() const { return 2.0 * std::numbers::pi / eta_step; }
int GridSpec::band_min() const { return band_exponent(eta_step); }
int GridSpec::band_max() const { return band_exponent(eta_count * eta_step); }

void GridSpec::validate() const {
  if (!(eta_step > 0.0)) throw std::invalid_argument("GridSpec: eta_step must be positive");
  if (eta_count < 1) throw std::invalid_argument("GridSpec: eta_count must be at least 1");
  if (m_max < 0) throw std::invalid_argument("GridSpec: m_max must be non-negative");
  if (x_count < 3) throw std::invalid_argument("GridSpec: x_count must be at least 3");
  if (!(dealias_factor >= 1.0)) throw std::invalid_argument("GridSpec: dealias_factor must be >= 1");
  const double needed = 2.0 * hermite::lambda(m_max) / std::sqrt(eta_step) + 4.0;
  if (x_range < needed) throw std::invalid_argument("GridSpec: x_range does not cover the widest mode");
}

int band_exponent(double abs_eta) {
  if (!(abs_eta > 0.0)) throw std::domain_error("band_exponent: zero frequency has no band");
  int e = 0;
  std::frexp(abs_eta, &e);
  return e - 1;
}

std::int64_t packet_of(int band_exp, int m) {
  const double s = 1.0 + (2.0 * m + 1.0) * std::ldexp(1.0, band_exp);
  int e = 0;
  std::frexp(s, &e);
  return std::int64_t{1} << (e - 1);
}

double DyadicIndex::I() const { return std::ldexp(1.0, band_exp); }

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  hermite::XGrid xg{spec_.x_range, spec_.x_count};
  x_ = xg.nodes();
  w_ = xg.weights();
  const int Q = spec_.eta_count;
  const int rows = basis_rows();
  const std::size_t nx = x_.size();
  basis_.assign(static_cast<std::size_t>(Q) * rows * nx, 0.0);
  std::vector<double> h(static_cast<std::size_t>(rows));
  for (int aq = 1; aq <= Q; ++aq) {
    const double a = std::sqrt(aq * spec_.eta_step);
    for (std::size_t j = 0; j < nx; ++j) {
      hermite::eval_all(rows - 1, a * x_[j], h.data());
      for (int m = 0; m < rows; ++m)
        basis_[(static_cast<std::size_t>(aq - 1) * rows + m) * nx + j] = h[m];
    }
  }
}

std::shared_ptr<const Grid> Grid::create(const GridSpec& spec) {
  return std::shared_ptr<const Grid>(new Grid(spec));
}

const double* Grid::basis(int abs_q, int m) const {
  return basis_.data() + (static_cast<std::size_t>(abs_q - 1) * basis_rows() + m) * x_.size();
}

int Grid::y_count(int order) const {
  const int Q = spec_.eta_count;
  const int exact = (order + 1) * Q + 1;
  const int ratio = static_cast<int>(std::ceil(spec_.dealias_factor * order / 2.0 * (2 * Q + 1)));
  return next_smooth(std::max({exact, ratio, 2 * Q + 1}));
}

int Grid::y_count_norm(int order) const { return next_smooth(2 * order * spec_.eta_count + 1); }

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("SpectralField: null grid");
  data_.assign(static_cast<std::size_t>(grid_->m_max() + 1) * 2 * grid_->eta_count(), cplx(0.0));
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
  for (auto& c : data_) c *= s;
  return *this;
}

bool SpectralField::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& c) { return c == cplx(0.0); });
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

PhysicalField synthesize(const SpectralField& f, int ny) {
  const Grid& g = *f.grid();
  if (ny == 0) ny = g.y_count(1);
  return synth_table(g, f.data(), f.m_max() + 1, ny);
}

SpectralField analyze(const PhysicalField& u, const GridPtr& grid) {
  const Grid& g = *grid;
  const int Q = g.eta_count();
  const int nx = g.x_count();
  const int ny = u.ny;
  if (u.nx != nx) throw std::invalid_argument("analyze: x sampling does not match the grid");
  if (ny < 2 * Q + 1) throw std::invalid_argument("analyze: y sampling below 2Q+1");
  if (std::abs(u.y_period - g.spec().y_period()) > 1e-12 * g.spec().y_period())
    throw std::invalid_argument("analyze: y period does not match the eta lattice");
  std::vector<cplx> buf = u.v;
  fft_rows(buf, nx, ny, FFTW_FORWARD);
  SpectralField out(grid);
  const double scale = inv_sqrt_2pi * u.y_period / ny;
  const int cols = 2 * Q;
  std::vector<double> wre(nx), wim(nx);
  for (int col = 0; col < cols; ++col) {
    const int q = out.q_of(col);
    const int aq = std::abs(q);
    const int slot = wrap(q, ny);
    bool any = false;
    for (int j = 0; j < nx; ++j) {
      const cplx c = buf[static_cast<std::size_t>(j) * ny + slot] * (scale * g.w()[j]);
      wre[j] = c.real();
      wim[j] = c.imag();
      any = any || c != cplx(0.0);
    }
    if (!any) continue;
    const double a = std::sqrt(aq * g.spec().eta_step);
    for (int m = 0; m <= g.m_max(); ++m) {
      const double* b = g.basis(aq, m);
      double sr = 0.0, si = 0.0;
      for (int j = 0; j < nx; ++j) {
        sr += wre[j] * b[j];
        si += wim[j] * b[j];
      }
      out.data()[static_cast<std::size_t>(m) * cols + col] = a * cplx(sr, si);
    }
  }
  return out;
}

double physical_l2(const PhysicalField& u, const Grid& grid) {
  return std::sqrt(integrate_abs2(u.v, u.nx, u.ny, grid, u.y_period));
}

double sobolev_norm(const SpectralField& f, double k) {
  const double de = f.grid()->spec().eta_step;
  double acc = 0.0;
  for (int m = 0; m <= f.m_max(); ++m) {
    for (int col = 0; col < f.columns(); ++col) {
      const cplx c = f.data()[static_cast<std::size_t>(m) * f.columns() + col];
      if (c == cplx(0.0)) continue;
      const double eta = std::abs(f.q_of(col)) * de;
      acc += std::pow(1.0 + (2.0 * m + 1.0) * eta, k) * std::norm(c) / std::sqrt(eta);
    }
  }
  return std::sqrt(acc * de);
}

double block_norm2(const SpectralField& f, int band_exp, int m) {
  const double de = f.grid()->spec().eta_step;
  double acc = 0.0;
  for (int col = 0; col < f.columns(); ++col) {
    const double eta = std::abs(f.q_of(col)) * de;
    if (band_exponent(eta) != band_exp) continue;
    acc += std::norm(f.data()[static_cast<std::size_t>(m) * f.columns() + col]) / std::sqrt(eta);
  }
  return acc * de;
}

double x_norm(const SpectralField& f, double k, double rho) {
  const double de = f.grid()->spec().eta_step;
  double acc = 0.0;
  for (int m = 0; m <= f.m_max(); ++m) {
    for (int col = 0; col < f.columns(); ++col) {
      const cplx c = f.data()[static_cast<std::size_t>(m) * f.columns() + col];
      if (c == cplx(0.0)) continue;
      const double eta = std::abs(f.q_of(col)) * de;
      const double I = std::ldexp(1.0, band_exponent(eta));
      acc += std::pow(1.0 + (2.0 * m + 1.0) * I, k) * std::pow(1.0 + I * I, 0.5 * rho) * std::norm(c) / std::sqrt(eta);
    }
  }
  return std::sqrt(acc * de);
}

std::vector<DyadicIndex> all_blocks(const GridSpec& spec) {
  std::vector<DyadicIndex> out;
  for (int j = spec.band_min(); j <= spec.band_max(); ++j)
    for (int m = 0; m <= spec.m_max; ++m) out.push_back({j, m, packet_of(j, m)});
  return out;
}

SpectralField band_extract(const SpectralField& f, int band_exp, int m) {
  const auto& s = f.grid()->spec();
  if (band_exp < s.band_min() || band_exp > s.band_max()) throw std::out_of_range("band_extract: band outside the lattice");
  if (m < 0 || m > f.m_max()) throw std::out_of_range("band_extract: mode outside the grid");
  SpectralField out(f.grid());
  for (int col = 0; col < f.columns(); ++col) {
    if (band_exponent(std::abs(f.q_of(col)) * s.eta_step) != band_exp) continue;
    const std::size_t i = static_cast<std::size_t>(m) * f.columns() + col;
    out.data()[i] = f.data()[i];
  }
  return out;
}

SpectralField packet_extract(const SpectralField& f, std::int64_t A) {
  const auto& s = f.grid()->spec();
  SpectralField out(f.grid());
  for (int m = 0; m <= f.m_max(); ++m) {
    for (int col = 0; col < f.columns(); ++col) {
      if (packet_of(band_exponent(std::abs(f.q_of(col)) * s.eta_step), m) != A) continue;
      const std::size_t i = static_cast<std::size_t>(m) * f.columns() + col;
      out.data()[i] = f.data()[i];
    }
  }
  return out;
}

std::vector<std::int64_t> packets(const GridSpec& spec) {
  std::vector<std::int64_t> out;
  for (const auto& b : all_blocks(spec)) out.push_back(b.A);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double chi(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  auto g = [](double t) { return std::exp(-1.0 / t); };
  const double a = g(1.0 - r);
  const double b = g(r - 0.5);
  return a / (a + b);
}

namespace {
template <class Fn>
SpectralField diagonal(const SpectralField& f, Fn&& symbol) {
  SpectralField out(f.grid());
  const double de = f.grid()->spec().eta_step;
  for (int m = 0; m <= f.m_max(); ++m) {
    for (int col = 0; col < f.columns(); ++col) {
      const std::size_t i = static_cast<std::size_t>(m) * f.columns() + col;
      out.data()[i] = f.data()[i] * symbol(m, std::abs(f.q_of(col)) * de);
    }
  }
  return out;
}
}  // namespace

SpectralField smooth_project(const SpectralField& f, double A) {
  if (!(A >= 1.0)) throw std::domain_error("smooth_project: requires A >= 1");
  return diagonal(f, [A](int m, double eta) { return cplx(chi((1.0 + (2.0 * m + 1.0) * eta) / A)); });
}

SpectralField apply_resolvent_power(const SpectralField& f, double s) {
  return diagonal(f, [s](int m, double eta) { return cplx(std::pow(1.0 + (2.0 * m + 1.0) * eta, s)); });
}

SpectralField propagate_phase(const SpectralField& f, double t) {
  return diagonal(f, [t](int m, double eta) { return std::polar(1.0, t * (2.0 * m + 1.0) * eta); });
}

SpectralField conjugate(const SpectralField& f) {
  SpectralField out(f.grid());
  const int Q = f.eta_count();
  for (int m = 0; m <= f.m_max(); ++m)
    for (int q = 1; q <= Q; ++q) {
      out.at(m, q) = std::conj(f.at(m, -q));
      out.at(m, -q) = std::conj(f.at(m, q));
    }
  return out;
}

cplx inner(const SpectralField& f, const SpectralField& g) {
  check_same_grid(f, g);
  const double de = f.grid()->spec().eta_step;
  cplx acc(0.0);
  for (int m = 0; m <= f.m_max(); ++m)
    for (int col = 0; col < f.columns(); ++col) {
      const std::size_t i = static_cast<std::size_t>(m) * f.columns() + col;
      acc += std::conj(f.data()[i]) * g.data()[i] / std::sqrt(std::abs(f.q_of(col)) * de);
    }
  return acc * de;
}

SpectralField multiply(const SpectralField& f, const SpectralField& g) {
  check_same_grid(f, g);
  const int ny = f.grid()->y_count(2);
  PhysicalField a = synthesize(f, ny);
  PhysicalField b = synthesize(g, ny);
  return analyze(pointwise({&a, &b}), f.grid());
}

SpectralField multiply3(const SpectralField& f, const SpectralField& g, const SpectralField& h) {
  check_same_grid(f, g);
  check_same_grid(f, h);
  const int ny = f.grid()->y_count(3);
  PhysicalField a = synthesize(f, ny);
  PhysicalField b = synthesize(g, ny);
  PhysicalField c = synthesize(h, ny);
  return analyze(pointwise({&a, &b, &c}), f.grid());
}

SpectralField cubic(const SpectralField& u) {
  const int ny = u.grid()->y_count(3);
  PhysicalField a = synthesize(u, ny);
  for (auto& z : a.v) z *= std::norm(z);
  return analyze(a, u.grid());
}

GradientBundle synthesize_bundle(const SpectralField& f, int ny) {
  const Grid& g = *f.grid();
  const int cols = f.columns();
  const int rows = f.m_max() + 2;
  const double de = g.spec().eta_step;
  std::vector<cplx> lap(static_cast<std::size_t>(rows) * cols), dxc(lap.size()), xdyc(lap.size());
  for (int m = 0; m <= f.m_max(); ++m) {
    const double alpha = std::sqrt(m / 2.0);
    const double beta = std::sqrt((m + 1) / 2.0);
    for (int col = 0; col < cols; ++col) {
      const cplx c = f.data()[static_cast<std::size_t>(m) * cols + col];
      if (c == cplx(0.0)) continue;
      const int q = f.q_of(col);
      const double eta = std::abs(q) * de;
      const double a = std::sqrt(eta);
      const double s = q > 0 ? 1.0 : -1.0;
      lap[static_cast<std::size_t>(m) * cols + col] += (2.0 * m + 1.0) * eta * c;
      // a h_m'(a x) = a (alpha h_{m-1} - beta h_{m+1})(a x)
      // i eta x h_m(a x) = i s a (alpha h_{m-1} + beta h_{m+1})(a x)
      if (m > 0) {
        dxc[static_cast<std::size_t>(m - 1) * cols + col] += a * alpha * c;
        xdyc[static_cast<std::size_t>(m - 1) * cols + col] += cplx(0.0, s * a * alpha) * c;
      }
      dxc[static_cast<std::size_t>(m + 1) * cols + col] -= a * beta * c;
      xdyc[static_cast<std::size_t>(m + 1) * cols + col] += cplx(0.0, s * a * beta) * c;
    }
  }
  GradientBundle out;
  out.u = synthesize(f, ny);
  out.neg_lap = synth_table(g, lap, rows, ny);
  out.dx = synth_table(g, dxc, rows, ny);
  out.xdy = synth_table(g, xdyc, rows, ny);
  return out;
}

PhysicalField resolvent_of_product(const std::vector<const GradientBundle*>& fs) {
  const std::size_t n = fs.size();
  if (n == 0) throw std::invalid_argument("resolvent_of_product: no factors");
  PhysicalField out = fs[0]->u;
  const std::size_t size = out.v.size();
  for (std::size_t i = 1; i < n; ++i)
    if (fs[i]->u.v.size() != size) throw std::invalid_argument("resolvent_of_product: sampling mismatch");
  for (std::size_t s = 0; s < size; ++s) {
    cplx prod(1.0);
    for (std::size_t i = 0; i < n; ++i) prod *= fs[i]->u.v[s];
    cplx acc = prod;
    for (std::size_t i = 0; i < n; ++i) {
      cplx t = fs[i]->neg_lap.v[s];
      for (std::size_t k = 0; k < n; ++k)
        if (k != i) t *= fs[k]->u.v[s];
      acc += t;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        cplx t = fs[i]->dx.v[s] * fs[j]->dx.v[s] + fs[i]->xdy.v[s] * fs[j]->xdy.v[s];
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j) t *= fs[k]->u.v[s];
        acc -= 2.0 * t;
      }
    out.v[s] = acc;
  }
  return out;
}

PhysicalField product_of(const std::vector<const GradientBundle*>& fs) {
  std::vector<const PhysicalField*> us;
  for (const auto* b : fs) us.push_back(&b->u);
  return pointwise(us);
}

double product_sobolev_norm(const std::vector<const SpectralField*>& factors, int l) {
  if (factors.empty()) throw std::invalid_argument("product_sobolev_norm: no factors");
  if (l < 0 || l > 2) throw std::domain_error("product_sobolev_norm: l must be 0, 1 or 2");
  for (const auto* f : factors) check_same_grid(*factors[0], *f);
  const Grid& g = *factors[0]->grid();
  const int ny = g.y_count_norm(static_cast<int>(factors.size()));
  if (l == 0) {
    std::vector<PhysicalField> us;
    us.reserve(factors.size());
    for (const auto* f : factors) us.push_back(synthesize(*f, ny));
    std::vector<const PhysicalField*> ptr;
    for (const auto& u : us) ptr.push_back(&u);
    return physical_l2(pointwise(ptr), g);
  }
  std::vector<GradientBundle> bundles;
  bundles.reserve(factors.size());
  for (const auto* f : factors) bundles.push_back(synthesize_bundle(*f, ny));
  std::vector<const GradientBundle*> ptr;
  for (const auto& b : bundles) ptr.push_back(&b);
  const PhysicalField r = resolvent_of_product(ptr);
  if (l == 2) return physical_l2(r, g);
  const PhysicalField p = product_of(ptr);
  const double dy = p.y_period / p.ny;
  double acc = 0.0;
  for (int j = 0; j < p.nx; ++j) {
    double row = 0.0;
    for (int k = 0; k < p.ny; ++k) row += (r(j, k) * std::conj(p(j, k))).real();
    acc += g.w()[j] * row;
  }
  return std::sqrt(std::max(0.0, acc * dy));
}

double physical_lp(const PhysicalField& u, const Grid& grid, double p) {
  if (std::isinf(p)) {
    double mx = 0.0;
    for (const auto& z : u.v) mx = std::max(mx, std::abs(z));
    return mx;
  }
  const double dy = u.y_period / u.ny;
  double acc = 0.0;
  for (int j = 0; j < u.nx; ++j) {
    double row = 0.0;
    for (int l = 0; l < u.ny; ++l) row += std::pow(std::abs(u(j, l)), p);
    acc += grid.w()[j] * row;
  }
  return std::pow(acc * dy, 1.0 / p);
}

SpectralField embed(const SpectralField& f, const GridPtr& target) {
  const auto& s = f.grid()->spec();
  const auto& t = target->spec();
  if (s.eta_step != t.eta_step) throw std::invalid_argument("embed: eta_step differs");
  if (t.eta_count < s.eta_count || t.m_max < s.m_max) throw std::invalid_argument("embed: target grid is smaller");
  SpectralField out(target);
  for (int m = 0; m <= s.m_max; ++m)
    for (int q = 1; q <= s.eta_count; ++q) {
      out.at(m, q) = f.at(m, q);
      out.at(m, -q) = f.at(m, -q);
    }
  return out;
}

}  // namespace grushin::spectral
