#include "grushin/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace grushin::hermite {

namespace {

// log(pi^{-1/4})
const double log_h0_norm = -0.25 * std::log(std::numbers::pi);
constexpr double rescale_threshold = 1e150;
constexpr double rescale_factor = 1e-150;
const double log_rescale = 150.0 * std::log(10.0);

// Runs the scaled recurrence and hands each (m, h_m) to sink. The pair
// (v_prev, v) carries h_{m-1}, h_m divided by exp(log_scale).
template <class Sink>
void recur(int m_max, double x, Sink&& sink) {
  double log_scale = log_h0_norm - 0.5 * x * x;
  double factor = std::exp(log_scale);
  double v_prev = 0.0;
  double v = 1.0;
  sink(0, v * factor);
  for (int m = 0; m < m_max; ++m) {
    const double a = std::sqrt(2.0 / (m + 1.0));
    const double b = std::sqrt(static_cast<double>(m) / (m + 1.0));
    double v_next = a * x * v - b * v_prev;
    v_prev = v;
    v = v_next;
    if (std::abs(v) > rescale_threshold) {
      v *= rescale_factor;
      v_prev *= rescale_factor;
      log_scale += log_rescale;
      factor = std::exp(log_scale);
    }
    sink(m + 1, v * factor);
  }
}

}  // namespace

double lambda(int m) { return std::sqrt(2.0 * m + 1.0); }

double eval(int m, double x) {
  if (m < 0) throw std::domain_error("hermite::eval: negative index");
  double out = 0.0;
  recur(m, x, [&](int k, double h) {
    if (k == m) out = h;
  });
  return out;
}

void eval_all(int m_max, double x, double* out) {
  recur(m_max, x, [&](int k, double h) { out[k] = h; });
}

double derivative(int m, double x) {
  if (m < 0) throw std::domain_error("hermite::derivative: negative index");
  std::vector<double> h(static_cast<std::size_t>(m) + 2);
  eval_all(m + 1, x, h.data());
  const double lower = m > 0 ? std::sqrt(m / 2.0) * h[m - 1] : 0.0;
  return lower - std::sqrt((m + 1) / 2.0) * h[m + 1];
}

double envelope_bound(int m, double x) {
  const double lam = lambda(m);
  const double ax = std::abs(x);
  auto inner = [&] { return 1.0 / std::sqrt(lam); };
  auto middle = [&] { return std::pow(std::cbrt(lam * lam) + std::abs(x * x - lam * lam), -0.25); };
  auto outer = [&] { return std::exp(-x * x / 8.0); };
  if (ax < 0.5 * lam) return inner();
  if (ax == 0.5 * lam) return std::max(inner(), middle());
  if (ax < 2.0 * lam) return middle();
  if (ax == 2.0 * lam) return std::max(middle(), outer());
  return outer();
}

double zeta(double p) {
  if (!(p >= 2.0)) throw std::domain_error("zeta: requires p >= 2");
  if (std::isinf(p)) return 1.0 / 6.0;
  if (p <= 4.0) return 0.5 - 1.0 / p;
  return 1.0 / 6.0 + 1.0 / (3.0 * p);
}

double XGrid::spacing() const { return 2.0 * x_range / (x_count - 1); }

std::vector<double> XGrid::nodes() const {
  std::vector<double> x(static_cast<std::size_t>(x_count));
  const double dx = spacing();
  for (int j = 0; j < x_count; ++j) x[j] = -x_range + j * dx;
  return x;
}

std::vector<double> XGrid::weights() const {
  std::vector<double> w(static_cast<std::size_t>(x_count), spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

XGrid XGrid::for_modes(int m_max, double p) {
  const double lam = lambda(m_max);
  const double pe = std::isinf(p) ? 2.0 : std::max(p, 2.0);
  const double dx = std::min({0.05, 0.5 / std::cbrt(lam), 2.0 * std::numbers::pi / (1.5 * pe * lam)});
  XGrid g;
  g.x_range = 2.0 * lam + 8.0;
  const int half = static_cast<int>(std::ceil(g.x_range / dx));
  g.x_count = 2 * half + 1;
  return g;
}

bool XGrid::resolves(int m) const {
  const double lam = lambda(m);
  const double needed = std::min(0.5 / std::cbrt(lam), 2.0 * std::numbers::pi / (3.0 * lam));
  return x_count >= 3 && x_range >= 2.0 * lam + 6.0 && spacing() <= needed * (1.0 + 1e-12);
}

double lp_norm(int m, double p, const XGrid& grid) {
  if (!(p >= 1.0)) throw std::domain_error("lp_norm: requires p >= 1");
  if (!grid.resolves(m))
    throw std::invalid_argument("lp_norm: grid does not resolve h_" + std::to_string(m));
  const auto x = grid.nodes();
  const auto w = grid.weights();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (double xj : x) mx = std::max(mx, std::abs(eval(m, xj)));
    return mx;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * std::pow(std::abs(eval(m, x[j])), p);
  return std::pow(acc, 1.0 / p);
}

HermiteTable::HermiteTable(int m_max, std::vector<double> nodes, std::vector<double> weights)
    : m_max_(m_max), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (m_max < 0) throw std::domain_error("HermiteTable: negative m_max");
  if (nodes_.size() != weights_.size()) throw std::invalid_argument("HermiteTable: nodes/weights size mismatch");
  const std::size_t n = nodes_.size();
  const int rows = m_max_ + 3;
  values_.assign(static_cast<std::size_t>(rows) * n, 0.0);
  std::vector<double> h(static_cast<std::size_t>(rows));
  for (std::size_t j = 0; j < n; ++j) {
    eval_all(rows - 1, nodes_[j], h.data());
    for (int m = 0; m < rows; ++m) values_[static_cast<std::size_t>(m) * n + j] = h[m];
  }
}

HermiteTable::HermiteTable(int m_max, const XGrid& grid) : HermiteTable(m_max, grid.nodes(), grid.weights()) {}

double HermiteTable::second_derivative(int m, std::size_t j) const {
  const double lower = m >= 2 ? std::sqrt(static_cast<double>(m) * (m - 1)) * value(m - 2, j) : 0.0;
  const double upper = std::sqrt((m + 1.0) * (m + 2.0)) * value(m + 2, j);
  return 0.5 * (lower - (2.0 * m + 1.0) * value(m, j) + upper);
}

double HermiteTable::orthonormality_defect() const {
  double worst = 0.0;
  const std::size_t n = nodes_.size();
  for (int a = 0; a <= m_max_; ++a) {
    for (int b = a; b <= m_max_; ++b) {
      if ((a + b) % 2 == 1) continue;  // odd integrand, zero by symmetry of the grid
      const double* ra = row(a);
      const double* rb = row(b);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += weights_[j] * ra[j] * rb[j];
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double HermiteTable::eigen_residual(int m) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double x = nodes_[j];
    const double r = -second_derivative(m, j) + x * x * value(m, j) - (2.0 * m + 1.0) * value(m, j);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double HermiteTable::recurrence_residual(int m) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double xh = nodes_[j] * value(m, j);
    const double lower = m > 0 ? std::sqrt(m / 2.0) * value(m - 1, j) : 0.0;
    const double r = xh - lower - std::sqrt((m + 1.0) / 2.0) * value(m + 1, j);
    worst = std::max(worst, std::abs(r) / (1.0 + std::abs(xh)));
  }
  return worst;
}

std::vector<EnvelopeRow> envelope_sweep(int m_max) {
  const double lam_max = lambda(m_max);
  const double dx = std::min(0.05, 0.2 / lam_max);
  const double x_end = 2.0 * lam_max + 8.0;
  const int count = static_cast<int>(std::ceil(x_end / dx)) + 1;
  std::vector<EnvelopeRow> rows(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) rows[m].m = m;
  std::vector<double> h(static_cast<std::size_t>(m_max) + 1);
  for (int j = 0; j < count; ++j) {
    const double x = j * dx;
    eval_all(m_max, x, h.data());
    for (int m = 0; m <= m_max; ++m) {
      const double r = std::abs(h[m]) / envelope_bound(m, x);
      if (r > rows[m].max_ratio) {
        rows[m].max_ratio = r;
        rows[m].argmax_x = x;
      }
    }
  }
  return rows;
}

std::vector<LpRow> lp_sweep(const std::vector<int>& ms, const std::vector<double>& ps) {
  if (ms.empty() || ps.empty()) return {};
  const int m_top = *std::max_element(ms.begin(), ms.end());
  double p_top = 2.0;
  for (double p : ps) {
    if (!(p >= 2.0)) throw std::domain_error("lp_sweep: requires p >= 2");
    if (!std::isinf(p)) p_top = std::max(p_top, p);
  }
  const XGrid grid = XGrid::for_modes(m_top, p_top);
  const double dx = grid.spacing();
  const int half = (grid.x_count - 1) / 2;

  const std::size_t np = ps.size();
  std::vector<double> acc(ms.size() * np, 0.0);
  std::vector<double> h(static_cast<std::size_t>(m_top) + 1);
  for (int j = 0; j <= half; ++j) {
    const double x = j * dx;
    // Symmetric grid: node 0 counted once, the endpoint carries half weight.
    const double w = (j == 0) ? dx : (j == half ? dx : 2.0 * dx);
    eval_all(m_top, x, h.data());
    for (std::size_t a = 0; a < ms.size(); ++a) {
      const double v = std::abs(h[ms[a]]);
      for (std::size_t b = 0; b < np; ++b) {
        double& slot = acc[a * np + b];
        if (std::isinf(ps[b]))
          slot = std::max(slot, v);
        else
          slot += w * std::pow(v, ps[b]);
      }
    }
  }
  std::vector<LpRow> out;
  out.reserve(acc.size());
  for (std::size_t a = 0; a < ms.size(); ++a) {
    for (std::size_t b = 0; b < np; ++b) {
      LpRow r;
      r.m = ms[a];
      r.p = ps[b];
      r.norm = std::isinf(ps[b]) ? acc[a * np + b] : std::pow(acc[a * np + b], 1.0 / ps[b]);
      r.scaled = r.norm * std::pow(lambda(r.m), zeta(r.p));
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace grushin::hermite
