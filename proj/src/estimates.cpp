#include "grushin/estimates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "grushin/hermite.hpp"
#include "grushin/parallel.hpp"
#include "grushin/shift.hpp"

namespace grushin::estimates {

using report::json;
using report::Row;
using spectral::DyadicIndex;
using spectral::GradientBundle;
using spectral::Grid;
using spectral::GridSpec;
using spectral::PhysicalField;

namespace {

const double pi = std::numbers::pi;

// 0 (optional), 1, 2, 4, ... up to n.
std::vector<int> dyadic_upto(int n, bool with_zero) {
  std::vector<int> out;
  if (with_zero) out.push_back(0);
  for (int v = 1; v <= n; v *= 2) out.push_back(v);
  return out;
}

double bracket(double I) { return std::sqrt(1.0 + I * I); }

// Per-scale maximum of a secondary ratio stored under `key` in the row params.
json secondary_summary(const std::vector<Row>& rows, const std::string& key, double tol) {
  report::SweepReport tmp;
  for (const auto& r : rows) {
    Row s;
    s.scale = r.scale;
    s.ratio = r.params.at(key).get<double>();
    tmp.rows.push_back(s);
  }
  report::summarize(tmp, tol);
  return {{"max_ratio", tmp.summary.max_ratio},
          {"top_scales_max", tmp.summary.top_max},
          {"other_scales_max", tmp.summary.rest_max},
          {"trend_slope", tmp.summary.trend_slope},
          {"verdict", tmp.summary.pass ? "PASS" : "FAIL"}};
}

// Largest ratio per distinct value of the integer parameter `key`.
json max_by(const std::vector<Row>& rows, const std::string& key) {
  std::map<long long, double> best;
  for (const auto& r : rows) {
    const long long k = r.params.at(key).get<long long>();
    auto it = best.find(k);
    if (it == best.end() || r.ratio > it->second) best[k] = r.ratio;
  }
  json out = json::array();
  for (const auto& [k, v] : best) out.push_back({{key, k}, {"max_ratio", v}});
  return out;
}

}  // namespace

double rescaled_product_norm2(const std::vector<int>& m, const std::vector<double>& alpha, int refine) {
  if (m.empty() || m.size() != alpha.size())
    throw std::invalid_argument("rescaled_product_norm2: need matching non-empty index and scale lists");
  if (refine < 1) throw std::invalid_argument("rescaled_product_norm2: refine must be positive");
  double reach = std::numeric_limits<double>::infinity();
  double band = 0.0;
  double amax = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] < 0) throw std::domain_error("rescaled_product_norm2: negative Hermite index");
    if (!(alpha[i] > 0.0)) throw std::domain_error("rescaled_product_norm2: scales must be positive");
    const double lam = hermite::lambda(m[i]);
    reach = std::min(reach, (lam + 10.0) / alpha[i]);
    band += alpha[i] * lam;
    amax = std::max(amax, alpha[i]);
  }
  // The squared product is even; its spectrum is essentially supported in
  // |xi| <= 2 sum alpha_i lambda_i plus a Gaussian margin.
  const double dx = 2.0 * pi / (2.0 * band + 20.0 * amax) / refine;
  const int n = static_cast<int>(std::ceil(reach / dx));
  double acc = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double x = j * dx;
    double f = 1.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double h = hermite::eval(m[i], alpha[i] * x);
      f *= h * h;
    }
    acc += j == 0 ? f : 2.0 * f;
  }
  return acc * dx;
}

SweepReport hermite_sweep(const SweepConfig& cfg) {
  if (cfg.m_max < 64) throw std::invalid_argument("hermite_sweep: m_max must be at least 64");
  SweepReport r;
  r.name = "hermite";
  r.config = {{"m_max", cfg.m_max}, {"tolerance", cfg.tolerance}};

  // Envelope certification: one row per mode.
  const auto env = hermite::envelope_sweep(cfg.m_max);
  double small = 0.0, all = 0.0;
  for (const auto& e : env) {
    Row row;
    row.params = {{"m", e.m}, {"argmax_x", e.argmax_x}};
    row.lhs = e.max_ratio;
    row.rhs = 1.0;
    row.ratio = e.max_ratio;
    row.scale = e.m == 0 ? 0.0 : std::floor(std::log2(static_cast<double>(e.m)));
    r.rows.push_back(row);
    all = std::max(all, e.max_ratio);
    if (e.m <= 64) small = std::max(small, e.max_ratio);
  }
  report::summarize(r, cfg.tolerance);
  const double env_growth = all / small - 1.0;
  const bool env_ok = env_growth < 0.05;
  r.extra["envelope"] = {{"max_ratio_m_le_64", small}, {"max_ratio_all", all}, {"growth", env_growth},
                         {"limit", 0.05}, {"verdict", env_ok ? "PASS" : "FAIL"}};

  // L^p decay: ||h_m||_p lambda_m^{zeta(p)} within a factor-2 band for m >= 16.
  std::vector<int> ms;
  for (int m = 16; m <= cfg.m_max; m *= 2) ms.push_back(m);
  if (ms.back() != cfg.m_max) ms.push_back(cfg.m_max);
  const std::vector<double> ps = {2.0, 3.0, 4.0, 6.0, 8.0, hermite::infinity};
  const auto lp = hermite::lp_sweep(ms, ps);
  json bands = json::array();
  bool lp_ok = true;
  for (double p : ps) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : lp)
      if (row.p == p) {
        lo = std::min(lo, row.scaled);
        hi = std::max(hi, row.scaled);
      }
    const bool ok = hi <= 2.0 * lo;
    lp_ok = lp_ok && ok;
    bands.push_back({{"p", std::isinf(p) ? json("inf") : json(p)}, {"min_scaled", lo}, {"max_scaled", hi},
                     {"band", hi / lo}, {"verdict", ok ? "PASS" : "FAIL"}});
  }
  r.extra["lp_decay"] = {{"m", ms}, {"by_p", bands}, {"band_limit", 2.0}, {"verdict", lp_ok ? "PASS" : "FAIL"}};

  // Exact identities on a quadrature grid sized for the table.
  const int m_id = std::min(cfg.m_max, 128);
  const hermite::HermiteTable table(m_id, hermite::XGrid::for_modes(m_id));
  double rec = 0.0, eig = 0.0;
  for (int m = 0; m <= m_id; ++m) {
    rec = std::max(rec, table.recurrence_residual(m));
    eig = std::max(eig, table.eigen_residual(m) / (2.0 * m + 1.0));
  }
  const double ortho = table.orthonormality_defect();
  const bool id_ok = rec <= 1e-10 && ortho <= 1e-10 && eig <= 1e-8;
  r.extra["identities"] = {{"m_max", m_id}, {"recurrence_residual", rec}, {"orthonormality_defect", ortho},
                           {"eigen_residual_over_2m_plus_1", eig}, {"verdict", id_ok ? "PASS" : "FAIL"}};
  r.extra["verdict"] = env_ok && lp_ok && id_ok ? "PASS" : "FAIL";
  return r;
}

SweepReport bilinear_hermite_sweep(const SweepConfig& cfg) {
  if (cfg.m_max < 2) throw std::invalid_argument("bilinear_hermite_sweep: m_max must be at least 2");
  struct Cell {
    int m, n;
    double alpha;
  };
  std::vector<Cell> cells;
  int skipped = 0;
  for (int m : dyadic_upto(cfg.m_max, false))
    for (double alpha : {1.0, 2.0, 4.0})
      for (int n : dyadic_upto(m, true)) {
        if (hermite::lambda(n) <= alpha * hermite::lambda(m) / 4.0)
          cells.push_back({m, n, alpha});
        else
          ++skipped;
      }

  struct Out {
    double lhs, fine;
  };
  const auto vals = parallel_map(cells.size(), cfg.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    return Out{rescaled_product_norm2({c.m, c.n}, {1.0, c.alpha}),
               rescaled_product_norm2({c.m, c.n}, {1.0, c.alpha}, 2)};
  });

  SweepReport r;
  r.name = "bilinear_hermite";
  r.config = {{"m_max", cfg.m_max}, {"alphas", {1, 2, 4}}, {"tolerance", cfg.tolerance}};
  double refine_change = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    Row row;
    row.params = {{"m", c.m}, {"n", c.n}, {"alpha", c.alpha}};
    row.lhs = vals[i].lhs;
    row.rhs = 1.0 / (c.alpha * hermite::lambda(c.m));
    row.ratio = row.lhs / row.rhs;
    row.scale = std::log2(static_cast<double>(c.m));
    r.rows.push_back(row);
    refine_change = std::max(refine_change, std::abs(vals[i].fine - vals[i].lhs) / vals[i].lhs);
  }
  report::summarize(r, cfg.tolerance);
  const double oracle = std::sqrt(pi / 17.0) / pi;
  const double computed = rescaled_product_norm2({0, 0}, {1.0, 4.0});
  r.extra["gaussian_oracle"] = {{"case", "m=0, n=0, alpha=4"},
                                {"computed", computed},
                                {"closed_form", oracle},
                                {"abs_error", std::abs(computed - oracle)}};
  r.extra["inadmissible_cells_skipped"] = skipped;
  r.extra["refinement_max_rel_change"] = refine_change;
  r.extra["max_ratio_by_m"] = max_by(r.rows, "m");
  return r;
}

SweepReport rescaled_bilinear_sweep(const SweepConfig& cfg) {
  const int top = std::min(cfg.m_max, 256);
  struct Cell {
    int m, n;
    double a2;
    std::string scenario;
  };
  std::vector<Cell> cells;
  for (double a2 : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0})
    for (int m : dyadic_upto(top, true))
      for (int n : dyadic_upto(top, true)) {
        const double first = hermite::lambda(n);       // alpha1 lambda_n with alpha1 = 1
        const double second = a2 * hermite::lambda(m); // alpha2 lambda_m
        std::string s = "comparable";
        if (first <= second / 4.0)
          s = "first";
        else if (second <= first / 4.0)
          s = "second";
        cells.push_back({m, n, a2, s});
      }
  struct Out {
    double lhs, fine;
  };
  const auto vals = parallel_map(cells.size(), cfg.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    return Out{rescaled_product_norm2({c.m, c.n}, {1.0, c.a2}), rescaled_product_norm2({c.m, c.n}, {1.0, c.a2}, 2)};
  });

  SweepReport r;
  r.name = "rescaled_bilinear";
  r.config = {{"m_max", top}, {"alpha1", 1}, {"alpha2", {1, 2, 4, 8, 16, 32}}, {"tolerance", cfg.tolerance}};
  double refine_change = 0.0;
  std::map<std::string, double> by_scenario;
  std::map<int, double> comparable_by_m;
  std::map<std::pair<int, int>, double> ratio_at_one;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    Row row;
    row.params = {{"m", c.m}, {"n", c.n}, {"alpha2", c.a2}, {"scenario", c.scenario}};
    row.lhs = vals[i].lhs;
    row.rhs = std::sqrt(std::min(1.0 / (2.0 * c.n + 1.0), 1.0 / (c.a2 * c.a2 * (2.0 * c.m + 1.0))));
    row.ratio = row.lhs / row.rhs;
    row.scale = std::log2(c.a2);
    r.rows.push_back(row);
    refine_change = std::max(refine_change, std::abs(vals[i].fine - vals[i].lhs) / vals[i].lhs);
    by_scenario[c.scenario] = std::max(by_scenario[c.scenario], row.ratio);
    if (c.scenario == "comparable") {
      const int level = std::max(c.m, c.n);
      comparable_by_m[level] = std::max(comparable_by_m[level], row.ratio);
    }
    if (c.a2 == 1.0) ratio_at_one[{c.m, c.n}] = row.ratio;
  }
  report::summarize(r, cfg.tolerance);

  double asym = 0.0;
  for (const auto& [key, v] : ratio_at_one) asym = std::max(asym, std::abs(v - ratio_at_one.at({key.second, key.first})));
  const double computed = rescaled_product_norm2({0, 0}, {1.0, 8.0});
  const double oracle = std::sqrt(pi / 65.0) / pi;
  r.extra["gaussian_oracle"] = {{"case", "m=0, n=0, alpha1=1, alpha2=8"},
                                {"computed", computed},
                                {"closed_form", oracle},
                                {"abs_error", std::abs(computed - oracle)}};
  r.extra["symmetry_max_abs_diff"] = asym;
  r.extra["refinement_max_rel_change"] = refine_change;
  json sc = json::object();
  for (const auto& [k, v] : by_scenario) sc[k] = v;
  r.extra["max_ratio_by_scenario"] = sc;
  // The comparable scenario is bounded through the L^4 norms, which carry a
  // logarithmic factor; its per-index maxima and their log-log slope are kept.
  json comp = json::array();
  std::vector<double> lx, ly;
  for (const auto& [lvl, v] : comparable_by_m) {
    comp.push_back({{"max_index", lvl}, {"max_ratio", v}});
    if (lvl >= 4) {
      lx.push_back(std::log(std::log(static_cast<double>(lvl))));
      ly.push_back(std::log(v));
    }
  }
  r.extra["comparable_by_index"] = comp;
  if (lx.size() >= 2) r.extra["comparable_loglog_exponent"] = report::fit_line(lx, ly).slope;
  return r;
}

SweepReport trilinear_sweep(const SweepConfig& cfg) {
  struct Cell {
    std::int64_t A;
    int j1, m1, j2, m2, j3, m3;
    double a1, a2, a3;
  };
  const std::vector<std::pair<int, int>> others = {{-1, 0}, {1, 0}, {-1, 8}, {1, 32}, {0, 4}};
  std::vector<Cell> cells;
  for (int e = 4; e <= 10; ++e) {
    const std::int64_t A = std::int64_t{1} << e;
    for (int j1 : {-1, 1}) {
      const double I1 = std::ldexp(1.0, j1);
      const int m1 = std::max(0, static_cast<int>(std::ceil(((A - 1.0) / I1 - 1.0) / 2.0)));
      if (spectral::packet_of(j1, m1) != A) continue;
      for (double s1 : {1.0, 2.0})
        for (std::size_t p = 0; p < others.size(); ++p)
          for (std::size_t q = p; q < others.size(); ++q) {
            const auto [j2, m2] = others[p];
            const auto [j3, m3] = others[q];
            cells.push_back({A, j1, m1, j2, m2, j3, m3, std::sqrt(s1 * I1), std::sqrt(1.5 * std::ldexp(1.0, j2)),
                             std::sqrt(1.5 * std::ldexp(1.0, j3))});
          }
    }
  }
  struct Out {
    double lhs, fine, swapped;
  };
  const auto vals = parallel_map(cells.size(), cfg.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    return Out{rescaled_product_norm2({c.m1, c.m2, c.m3}, {c.a1, c.a2, c.a3}),
               rescaled_product_norm2({c.m1, c.m2, c.m3}, {c.a1, c.a2, c.a3}, 2),
               rescaled_product_norm2({c.m1, c.m3, c.m2}, {c.a1, c.a3, c.a2})};
  });

  auto min_form = [](const std::vector<int>& m, const std::vector<double>& a) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j)
          best = std::min(best, a[i] * a[j] / (std::pow(2.0 * m[i] + 1.0, 1.0 / 6.0) * std::sqrt(2.0 * m[j] + 1.0)));
    return best / (a[0] * a[1] * a[2]);
  };

  SweepReport r;
  r.name = "trilinear";
  r.config = {{"A_exponents", {4, 10}}, {"I1", {0.5, 2}}, {"alpha1_sq_over_I1", {1, 2}},
              {"alpha_sq_over_I_others", 1.5}, {"tolerance", cfg.tolerance}};
  double refine_change = 0.0;
  double perm = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const double I1 = std::ldexp(1.0, c.j1), I2 = std::ldexp(1.0, c.j2), I3 = std::ldexp(1.0, c.j3);
    const double c2 = bracket(I1) * std::pow(I2 * I3, 0.25) /
                      (std::sqrt(static_cast<double>(c.A)) * std::pow((2.0 * c.m2 + 1.0) * (2.0 * c.m3 + 1.0), 1.0 / 12.0));
    const double lhs = vals[i].lhs;
    const double rmin = lhs / min_form({c.m1, c.m2, c.m3}, {c.a1, c.a2, c.a3});
    const double rmin_swapped = vals[i].swapped / min_form({c.m1, c.m3, c.m2}, {c.a1, c.a3, c.a2});
    perm = std::max(perm, std::abs(rmin - rmin_swapped) / rmin);
    Row row;
    row.params = {{"A", c.A}, {"I1", I1}, {"m1", c.m1}, {"alpha1_sq", c.a1 * c.a1}, {"I2", I2}, {"m2", c.m2},
                  {"I3", I3}, {"m3", c.m3}, {"ratio_min_form", rmin}};
    row.lhs = c.a1 * c.a2 * c.a3 * lhs;
    row.rhs = c2;
    row.ratio = row.lhs / row.rhs;
    row.scale = std::log2(static_cast<double>(c.A));
    r.rows.push_back(row);
    refine_change = std::max(refine_change, std::abs(vals[i].fine - lhs) / lhs);
  }
  report::summarize(r, cfg.tolerance);
  const double computed = rescaled_product_norm2({0, 0, 0}, {1.0, 1.0, 1.0});
  const double oracle = 1.0 / (pi * std::sqrt(3.0));
  r.extra["gaussian_oracle"] = {{"case", "m=(0,0,0), alpha=(1,1,1)"},
                                {"computed", computed},
                                {"closed_form", oracle},
                                {"abs_error", std::abs(computed - oracle)}};
  r.extra["min_form"] = secondary_summary(r.rows, "ratio_min_form", cfg.tolerance);
  r.extra["permutation_max_rel_diff"] = perm;
  r.extra["refinement_max_rel_change"] = refine_change;
  return r;
}

namespace {

// Lattice indices q > 0 whose frequency lies in band 2^band_exp.
std::vector<int> band_lattice(const GridSpec& spec, int band_exp) {
  std::vector<int> out;
  for (int q = 1; q <= spec.eta_count; ++q)
    if (spectral::band_exponent(q * spec.eta_step) == band_exp) out.push_back(q);
  return out;
}

// |u|^2 sampled on the grid's x nodes and ny y points.
std::vector<double> modulus2(const SpectralField& f, int ny) {
  const PhysicalField u = spectral::synthesize(f, ny);
  std::vector<double> out(u.v.size());
  for (std::size_t i = 0; i < u.v.size(); ++i) out[i] = std::norm(u.v[i]);
  return out;
}

// Trapezoid-in-x, rectangle-in-y integral of a * b.
double integrate_product(const std::vector<double>& a, const std::vector<double>& b, const Grid& g, int ny) {
  const double dy = g.spec().y_period() / ny;
  double acc = 0.0;
  for (int j = 0; j < g.x_count(); ++j) {
    const std::size_t base = static_cast<std::size_t>(j) * ny;
    double row = 0.0;
    for (int l = 0; l < ny; ++l) row += a[base + l] * b[base + l];
    acc += g.w()[j] * row;
  }
  return acc * dy;
}

GradientBundle conjugate_bundle(const GradientBundle& b) {
  GradientBundle c = b;
  for (PhysicalField* f : {&c.u, &c.neg_lap, &c.dx, &c.xdy})
    for (auto& z : f->v) z = std::conj(z);
  return c;
}

// ||(Id - Delta_G)(product of the factors)||^2 restricted to |x| <= reach,
// using the same product rule as spectral::resolvent_of_product.
double h2_norm2(const std::vector<const GradientBundle*>& fs, const Grid& g, double reach) {
  const std::size_t n = fs.size();
  const int ny = fs[0]->u.ny;
  const double dy = fs[0]->u.y_period / ny;
  const auto& x = g.x();
  const auto first = std::lower_bound(x.begin(), x.end(), -reach) - x.begin();
  const auto last = std::upper_bound(x.begin(), x.end(), reach) - x.begin();
  double total = 0.0;
  for (auto j = first; j < last; ++j) {
    double row = 0.0;
    for (int l = 0; l < ny; ++l) {
      const std::size_t s = static_cast<std::size_t>(j) * ny + l;
      cplx u[3], lap[3], dx[3], xdy[3];
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = fs[i]->u.v[s];
        lap[i] = fs[i]->neg_lap.v[s];
        dx[i] = fs[i]->dx.v[s];
        xdy[i] = fs[i]->xdy.v[s];
      }
      cplx acc;
      if (n == 2) {
        acc = u[0] * u[1] + lap[0] * u[1] + u[0] * lap[1] - 2.0 * (dx[0] * dx[1] + xdy[0] * xdy[1]);
      } else {
        acc = u[0] * u[1] * u[2] + lap[0] * u[1] * u[2] + u[0] * lap[1] * u[2] + u[0] * u[1] * lap[2] -
              2.0 * ((dx[0] * dx[1] + xdy[0] * xdy[1]) * u[2] + (dx[0] * dx[2] + xdy[0] * xdy[2]) * u[1] +
                     (dx[1] * dx[2] + xdy[1] * xdy[2]) * u[0]);
      }
      row += std::norm(acc);
    }
    total += g.w()[j] * row;
  }
  return total * dy;
}

}  // namespace

SpectralField make_block(const GridPtr& grid, int band_exp, int m, Profile profile, std::uint64_t seed) {
  const GridSpec& spec = grid->spec();
  if (m < 0 || m > spec.m_max) throw std::out_of_range("make_block: mode outside the grid");
  const auto qs = band_lattice(spec, band_exp);
  if (qs.empty()) throw std::out_of_range("make_block: band not present on the lattice");
  SpectralField f(grid);
  const double I = std::ldexp(1.0, band_exp);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(band_exp + 1024), static_cast<std::uint32_t>(m)};
  std::mt19937_64 engine(seq);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  for (int sign : {-1, 1})
    for (int q : qs) {
      const double eta = q * spec.eta_step;
      cplx c = 1.0;
      if (profile == Profile::peaked) {
        const double r = (eta - I) / I;  // 0 at the lower edge, below 1 inside the band
        c = 0.02 + r * r * r * r;
      } else if (profile == Profile::random_phase) {
        c = std::polar(1.0, phase(engine));
      }
      f.at(m, sign * q) = c;
    }
  return f;
}

SweepReport block_estimate_sweep(const SweepConfig& cfg) {
  const GridSpec base = GridSpec::make(0.25, 32, 16, 3);
  const std::vector<int> bands = {-2, -1, 0, 1, 2};
  const std::vector<int> modes = {0, 2, 4, 8, 16};
  struct ProfileSpec {
    Profile profile;
    std::uint64_t seed;
    std::string label;
  };
  std::vector<ProfileSpec> profiles = {{Profile::flat, 0, "flat"}, {Profile::peaked, 0, "peaked"}};
  for (int s = 0; s < std::max(1, cfg.samples); ++s)
    profiles.push_back({Profile::random_phase, cfg.seed + static_cast<std::uint64_t>(s), "random_phase"});

  struct Block {
    int j, m;
  };
  std::vector<Block> blocks;
  for (int j : bands)
    for (int m : modes) blocks.push_back({j, m});
  struct Cell {
    std::size_t p, a, b;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < profiles.size(); ++p)
    for (std::size_t a = 0; a < blocks.size(); ++a)
      for (std::size_t b = a; b < blocks.size(); ++b) cells.push_back({p, a, b});

  std::vector<double> norms2(profiles.size() * blocks.size());
  auto evaluate = [&](const GridSpec& spec) {
    const GridPtr grid = Grid::create(spec);
    const int ny = grid->y_count_norm(2);
    const auto mods = parallel_map(profiles.size() * blocks.size(), cfg.workers, [&](std::size_t i) {
      const auto& pr = profiles[i / blocks.size()];
      const auto& bl = blocks[i % blocks.size()];
      const SpectralField f = make_block(grid, bl.j, bl.m, pr.profile, pr.seed);
      norms2[i] = std::pow(spectral::sobolev_norm(f, 0.0), 2);
      return modulus2(f, ny);
    });
    return parallel_map(cells.size(), cfg.workers, [&](std::size_t i) {
      const Cell& c = cells[i];
      return integrate_product(mods[c.p * blocks.size() + c.a], mods[c.p * blocks.size() + c.b], *grid, ny);
    });
  };
  const auto lhs = evaluate(base);
  GridSpec fine = base;
  fine.x_count = 2 * base.x_count - 1;
  const auto lhs_fine = evaluate(fine);

  SweepReport r;
  r.name = "block_estimate";
  r.config = {{"eta_step", base.eta_step}, {"eta_count", base.eta_count}, {"m_max", base.m_max},
              {"bands", bands}, {"modes", modes}, {"random_profiles", std::max(1, cfg.samples)},
              {"seed", cfg.seed}, {"tolerance", cfg.tolerance}};
  double refine_change = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const Block& u = blocks[c.a];
    const Block& v = blocks[c.b];
    const double I = std::ldexp(1.0, u.j), J = std::ldexp(1.0, v.j);
    const std::int64_t A = spectral::packet_of(u.j, u.m), B = spectral::packet_of(v.j, v.m);
    const double nu = norms2[c.p * blocks.size() + c.a], nv = norms2[c.p * blocks.size() + c.b];
    const double bound = std::min(I, J) * std::sqrt(std::min(I / (2.0 * u.m + 1.0), J / (2.0 * v.m + 1.0)));
    const double consequence = std::min(J * bracket(I) / std::sqrt(1.0 + (2.0 * u.m + 1.0) * I),
                                        I * bracket(J) / std::sqrt(1.0 + (2.0 * v.m + 1.0) * J));
    Row row;
    row.params = {{"profile", profiles[c.p].label}, {"I", I}, {"m", u.m}, {"J", J}, {"n", v.m},
                  {"A", A}, {"B", B}, {"ratio_consequence", lhs[i] / (consequence * nu * nv)}};
    row.lhs = lhs[i];
    row.rhs = bound * nu * nv;
    row.ratio = row.lhs / row.rhs;
    row.scale = std::log2(static_cast<double>(std::max(A, B)));
    r.rows.push_back(row);
    refine_change = std::max(refine_change, std::abs(lhs_fine[i] - lhs[i]) / lhs[i]);
  }
  report::summarize(r, cfg.tolerance);
  r.extra["consequence_form"] = secondary_summary(r.rows, "ratio_consequence", cfg.tolerance);
  r.extra["refinement"] = {{"kind", "x spacing halved"}, {"max_rel_change", refine_change}};
  return r;
}

SpectralField smoothing_field(const GridPtr& grid, double k, double decay) {
  const GridSpec& spec = grid->spec();
  SpectralField u(grid);
  for (int j = spec.band_min(); j <= spec.band_max(); ++j) {
    const auto qs = band_lattice(spec, j);
    if (qs.empty()) continue;
    const double I = std::ldexp(1.0, j);
    double measure = 0.0;  // L^2_G norm squared of a unit flat block, both signs
    for (int q : qs) measure += 2.0 * spec.eta_step / std::sqrt(q * spec.eta_step);
    for (int m = 0; m <= spec.m_max; ++m) {
      const double target = std::pow(1.0 + (2.0 * m + 1.0) * I, -decay) / (1.0 + I * I);
      const double c = std::sqrt(target / measure);
      for (int q : qs) {
        u.at(m, q) = c;
        u.at(m, -q) = c;
      }
    }
  }
  const double norm = spectral::x_norm(u, k, 1.0);
  if (norm > 0.0) u *= 1.0 / norm;
  return u;
}

namespace {

struct BlockData {
  DyadicIndex idx;
  double norm2 = 0.0;  // ||u_b||^2_{L^2_G}
  double sup2 = 0.0;   // ||u_b||^2_{L^infinity}
  double I = 0.0;
  double reach = 0.0;  // the block is negligible for |x| > reach
};

// Selects the largest terms until the remaining mass is at most tol * total.
// Terms are bucketed by binary exponent so the selection needs one pass to
// size the cut and one pass to collect.
template <class Enumerate>
std::vector<std::pair<double, std::array<std::uint32_t, 3>>> select_terms(Enumerate&& enumerate, double tol,
                                                                          double& total, std::size_t& count) {
  constexpr int lo = -1100, hi = 1100;
  std::vector<double> mass(hi - lo + 1, 0.0);
  total = 0.0;
  count = 0;
  enumerate([&](double t, std::uint32_t, std::uint32_t, std::uint32_t) {
    ++count;
    if (!(t > 0.0)) return;
    total += t;
    mass[std::clamp(std::ilogb(t), lo, hi) - lo] += t;
  });
  int cut = lo;
  double below = 0.0;
  while (cut <= hi && below + mass[cut - lo] <= tol * total) below += mass[cut++ - lo];
  const double threshold = std::ldexp(1.0, cut);
  std::vector<std::pair<double, std::array<std::uint32_t, 3>>> out;
  enumerate([&](double t, std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    if (t >= threshold) out.push_back({t, {a, b, c}});
  });
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  return out;
}

}  // namespace

SmoothingResult random_smoothing(const SmoothingConfig& cfg) {
  const double ell = cfg.k + 0.5;
  if (std::abs(ell - 2.0) > 1e-12) throw std::invalid_argument("random_smoothing: requires k + 1/2 = 2");
  if (cfg.n_t < 3 || cfg.n_t % 2 == 0) throw std::invalid_argument("random_smoothing: n_t must be odd and >= 3");
  if (!(cfg.T > 0.0)) throw std::invalid_argument("random_smoothing: T must be positive");
  const GridSpec spec = GridSpec::make(cfg.eta_step, cfg.eta_count, cfg.m_max, 5);
  const GridPtr grid = Grid::create(spec);
  const SpectralField u0 = smoothing_field(grid, cfg.k, cfg.decay);

  SmoothingResult res;
  res.m_max = cfg.m_max;
  res.x_norm = spectral::x_norm(u0, cfg.k, 1.0);

  std::vector<SpectralField> fields;
  std::vector<BlockData> blocks;
  for (const auto& idx : spectral::all_blocks(spec)) {
    SpectralField b = spectral::band_extract(u0, idx.band_exp, idx.m);
    if (b.is_zero()) continue;
    BlockData d;
    d.idx = idx;
    d.I = idx.I();
    d.norm2 = spectral::block_norm2(u0, idx.band_exp, idx.m);
    const double eta_min = std::max(d.I, spec.eta_step);
    d.reach = (hermite::lambda(idx.m + 1) + 10.0) / std::sqrt(eta_min);
    blocks.push_back(d);
    fields.push_back(std::move(b));
  }
  const int sup_ny = std::max(64, grid->y_count(1));
  const auto sups = parallel_map(fields.size(), cfg.workers, [&](std::size_t i) {
    return spectral::physical_lp(spectral::synthesize(fields[i], sup_ny), *grid, std::numeric_limits<double>::infinity());
  });
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].sup2 = sups[i] * sups[i];
  const auto nb = static_cast<std::uint32_t>(blocks.size());

  auto pair_bound = [&](std::uint32_t a, std::uint32_t b) {
    const BlockData& u = blocks[a];
    const BlockData& v = blocks[b];
    const double A = static_cast<double>(u.idx.A), B = static_cast<double>(v.idx.A);
    return std::pow(std::max(A, B), ell) *
           std::min(v.I * bracket(u.I) / std::sqrt(A), u.I * bracket(v.I) / std::sqrt(B)) * u.norm2 * v.norm2;
  };
  auto enumerate_pairs = [&](auto&& sink) {
    for (std::uint32_t a = 0; a < nb; ++a)
      for (std::uint32_t b = a; b < nb; ++b) sink((a == b ? 1.0 : 2.0) * pair_bound(a, b), a, b, 0u);
  };
  auto triple_bound = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const std::array<const BlockData*, 3> t = {&blocks[a], &blocks[b], &blocks[c]};
    std::int64_t top = 0;
    for (const auto* d : t) top = std::max(top, d->idx.A);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
      if (t[s]->idx.A != top) continue;
      const BlockData& p = *t[(s + 1) % 3];
      const BlockData& q = *t[(s + 2) % 3];
      const double rest = std::min(bracket(p.I) * p.norm2 * q.sup2, bracket(q.I) * q.norm2 * p.sup2);
      best = std::min(best, std::pow(static_cast<double>(top), ell - 0.5) * bracket(t[s]->I) * t[s]->norm2 * rest);
    }
    return best;
  };
  auto enumerate_triples = [&](auto&& sink) {
    for (std::uint32_t a = 0; a < nb; ++a)
      for (std::uint32_t b = a; b < nb; ++b)
        for (std::uint32_t c = 0; c < nb; ++c) sink((a == b ? 1.0 : 2.0) * triple_bound(a, b, c), a, b, c);
  };

  const auto pairs = select_terms(enumerate_pairs, cfg.prune_tol, res.zz.bound_total, res.zz.total);
  const auto triples = select_terms(enumerate_triples, cfg.prune_tol, res.zzz.bound_total, res.zzz.total);

  // Bundles of every block used by a selected term, sampled once.
  const int ny = grid->y_count_norm(3);
  std::vector<char> used(nb, 0), used_conj(nb, 0);
  for (const auto& [t, id] : pairs) used[id[0]] = used[id[1]] = 1;
  for (const auto& [t, id] : triples) {
    used[id[0]] = used[id[1]] = 1;
    used_conj[id[2]] = 1;
  }
  std::vector<std::unique_ptr<GradientBundle>> bundles(nb), conj_bundles(nb);
  std::vector<std::uint32_t> needed;
  for (std::uint32_t i = 0; i < nb; ++i)
    if (used[i] || used_conj[i]) needed.push_back(i);
  parallel_map(needed.size(), cfg.workers, [&](std::size_t n) {
    const std::uint32_t i = needed[n];
    auto b = std::make_unique<GradientBundle>(spectral::synthesize_bundle(fields[i], ny));
    if (used_conj[i]) conj_bundles[i] = std::make_unique<GradientBundle>(conjugate_bundle(*b));
    if (used[i]) bundles[i] = std::move(b);
    return 0;
  });

  auto accumulate = [&](SumCheck& sum, const auto& terms, bool triple) {
    const auto direct = parallel_map(terms.size(), cfg.workers, [&](std::size_t n) {
      const auto& id = terms[n].second;
      const double w = id[0] == id[1] ? 1.0 : 2.0;
      double reach = std::min(blocks[id[0]].reach, blocks[id[1]].reach);
      if (triple) {
        reach = std::min(reach, blocks[id[2]].reach);
        return w * h2_norm2({bundles[id[0]].get(), bundles[id[1]].get(), conj_bundles[id[2]].get()}, *grid, reach);
      }
      return w * h2_norm2({bundles[id[0]].get(), bundles[id[1]].get()}, *grid, reach);
    });
    sum.evaluated = terms.size();
    for (std::size_t n = 0; n < terms.size(); ++n) {
      sum.direct += direct[n];
      sum.bound += terms[n].first;
      sum.C = std::max(sum.C, direct[n] / terms[n].first);
    }
  };
  accumulate(res.zz, pairs, false);
  accumulate(res.zzz, triples, true);
  bundles.clear();
  conj_bundles.clear();

  // Ensemble side: z^omega(t) = e^{it Delta_G} u0^omega, (z^omega)^2 in L^2_T H^2.
  const auto weights = flow_random::simpson_weights(cfg.n_t, cfg.T);
  const int ny2 = grid->y_count_norm(2);
  res.ensemble = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t s) {
    const auto draw = flow_random::Draw::generate(cfg.seed, s, spec);
    const SpectralField z0 = flow_random::randomize(u0, draw);
    double acc = 0.0;
    for (int n = 0; n < cfg.n_t; ++n) {
      const double t = cfg.T * n / (cfg.n_t - 1);
      const GradientBundle b = spectral::synthesize_bundle(flow_random::linear_propagate(z0, t), ny2);
      acc += weights[n] * h2_norm2({&b, &b}, *grid, std::numeric_limits<double>::infinity());
    }
    return std::sqrt(acc) / (std::sqrt(cfg.T) * res.x_norm * res.x_norm);
  });
  if (!res.ensemble.empty()) res.ensemble_median = flow_random::quantile(res.ensemble, 0.5);
  return res;
}

SweepReport random_smoothing_sweep(const SmoothingConfig& cfg, double tolerance) {
  SmoothingConfig fine = cfg;
  fine.m_max = 2 * cfg.m_max;
  const SmoothingResult a = random_smoothing(cfg);
  const SmoothingResult b = random_smoothing(fine);

  SweepReport r;
  r.name = "random_smoothing";
  r.config = {{"k", cfg.k},           {"ell", cfg.k + 0.5},        {"eta_step", cfg.eta_step},
              {"eta_count", cfg.eta_count}, {"m_max", {cfg.m_max, fine.m_max}}, {"decay", cfg.decay},
              {"T", cfg.T},           {"n_t", cfg.n_t},            {"samples", cfg.samples},
              {"seed", cfg.seed},     {"prune_tol", cfg.prune_tol}, {"tolerance", tolerance}};
  auto sum_json = [](const SumCheck& s) {
    return json{{"direct", s.direct},     {"bound_side", s.bound}, {"bound_side_all", s.bound_total},
                {"ratio", s.ratio()},     {"fitted_C", s.C},       {"evaluated", s.evaluated},
                {"tuples", s.total},      {"ratio_le_C", s.ratio() <= s.C * (1.0 + 1e-12)}};
  };
  for (const SmoothingResult* s : {&a, &b}) {
    const double level = std::log2(static_cast<double>(s->m_max));
    const std::pair<const char*, const SumCheck*> sums[] = {{"zz", &s->zz}, {"zzz", &s->zzz}};
    for (const auto& [name, sc] : sums) {
      Row row;
      row.params = {{"sum", name}, {"m_max", s->m_max}, {"fitted_C", sc->C}, {"evaluated", sc->evaluated}};
      row.lhs = sc->direct;
      row.rhs = sc->bound;
      row.ratio = sc->ratio();
      row.scale = level;
      r.rows.push_back(row);
    }
    r.extra["m_max_" + std::to_string(s->m_max)] = {{"x_norm", s->x_norm},
                                                    {"zz", sum_json(s->zz)},
                                                    {"zzz", sum_json(s->zzz)},
                                                    {"ensemble_median", s->ensemble_median}};
  }
  report::summarize(r, tolerance);  // two scales only: the refinement verdict below decides
  auto rel = [](double x, double y) { return std::abs(y - x) / std::abs(x); };
  const double dC_zz = rel(a.zz.C, b.zz.C);
  const double dC_zzz = rel(a.zzz.C, b.zzz.C);
  const double dmed = a.ensemble.empty() ? 0.0 : rel(a.ensemble_median, b.ensemble_median);
  const bool ok = a.zz.ratio() <= a.zz.C && b.zz.ratio() <= b.zz.C && a.zzz.ratio() <= a.zzz.C &&
                  b.zzz.ratio() <= b.zzz.C && dC_zz <= tolerance && dC_zzz <= tolerance && dmed <= tolerance;
  r.extra["refinement"] = {{"C_zz_rel_change", dC_zz},
                           {"C_zzz_rel_change", dC_zzz},
                           {"ratio_zz_rel_change", rel(a.zz.ratio(), b.zz.ratio())},
                           {"ratio_zzz_rel_change", rel(a.zzz.ratio(), b.zzz.ratio())},
                           {"median_rel_change", dmed},
                           {"verdict", ok ? "PASS" : "FAIL"}};
  r.extra["verdict"] = ok ? "PASS" : "FAIL";
  return r;
}

namespace {

// Blocks (band, mode) of packet A with mode at most m_top.
std::vector<DyadicIndex> packet_blocks(const GridSpec& spec, std::int64_t A, int m_top) {
  std::vector<DyadicIndex> out;
  for (const auto& b : spectral::all_blocks(spec))
    if (b.A == A && b.m <= m_top && !band_lattice(spec, b.band_exp).empty()) out.push_back(b);
  return out;
}

// Packet A with i.i.d. complex Gaussian coefficients (modes <= m_top).
SpectralField random_packet(const GridPtr& grid, std::int64_t A, int m_top, std::uint64_t seed) {
  const GridSpec& spec = grid->spec();
  SpectralField f(grid);
  auto engine = flow_random::sample_stream(seed, static_cast<std::uint64_t>(A), 0);
  for (const auto& b : packet_blocks(spec, A, m_top))
    for (int q : band_lattice(spec, b.band_exp))
      for (int sign : {-1, 1}) f.at(b.m, sign * q) = flow_random::complex_gaussian(engine);
  return f;
}

// Packet A with coefficients h_m(0) sqrt|eta|: the field of the packet that
// is largest at the origin relative to its L^2 norm.
SpectralField coherent_packet(const GridPtr& grid, std::int64_t A) {
  const GridSpec& spec = grid->spec();
  SpectralField f(grid);
  for (const auto& b : packet_blocks(spec, A, spec.m_max))
    for (int q : band_lattice(spec, b.band_exp)) {
      const double c = hermite::eval(b.m, 0.0) * std::sqrt(spec.eta(q));
      f.at(b.m, q) = c;
      f.at(b.m, -q) = c;
    }
  return f;
}

double lp_of(const PhysicalField& u, const Grid& g, double p) { return spectral::physical_lp(u, g, p); }

// L^p norms for p = 2^1 .. 2^levels in one pass, by repeated squaring, plus
// the sample maximum as the last entry.
std::vector<double> dyadic_lp_norms(const PhysicalField& u, const Grid& g, int levels) {
  std::vector<double> acc(static_cast<std::size_t>(levels), 0.0), row(acc.size());
  double mx = 0.0;
  for (int j = 0; j < u.nx; ++j) {
    std::fill(row.begin(), row.end(), 0.0);
    for (int l = 0; l < u.ny; ++l) {
      double a = std::norm(u(j, l));
      mx = std::max(mx, a);
      for (auto& r : row) {
        r += a;
        a *= a;
      }
    }
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g.w()[static_cast<std::size_t>(j)] * row[k];
  }
  std::vector<double> out;
  const double dy = u.y_period / u.ny;
  for (std::size_t k = 0; k < acc.size(); ++k) out.push_back(std::pow(acc[k] * dy, 1.0 / std::ldexp(1.0, static_cast<int>(k) + 1)));
  out.push_back(std::sqrt(mx));
  return out;
}

}  // namespace

SweepReport embedding_sweep(const SweepConfig& cfg) {
  const GridSpec spec = GridSpec::make(0.25, 32, 64, 3);
  const GridPtr grid = Grid::create(spec);
  const int ny = std::max(256, grid->y_count(4));
  const auto pks = spectral::packets(spec);
  const std::vector<double> crit_ps = {4.0, 6.0, 8.0, 12.0};
  const std::vector<double> law_ps = {4.0, 8.0, 16.0, 32.0, 64.0};
  const double inf = std::numeric_limits<double>::infinity();

  struct PacketOut {
    std::vector<double> crit;  // ||u_A||_p / ||u_A||_{H^{k_p}} per critical p
    double subcritical = 0.0;  // ||u_A||_inf / ||u_A||_{H^{1.6}}
  };
  const auto outs = parallel_map(pks.size(), cfg.workers, [&](std::size_t i) {
    PacketOut o;
    const SpectralField f = random_packet(grid, pks[i], spec.m_max, cfg.seed);
    const PhysicalField u = spectral::synthesize(f, ny);
    for (double p : crit_ps) o.crit.push_back(lp_of(u, *grid, p) / spectral::sobolev_norm(f, 3.0 * (0.5 - 1.0 / p)));
    o.subcritical = lp_of(u, *grid, inf) / spectral::sobolev_norm(f, 1.6);
    return o;
  });

  SweepReport r;
  r.name = "embedding";
  r.config = {{"eta_step", spec.eta_step}, {"eta_count", spec.eta_count}, {"m_max", spec.m_max}, {"y_samples", ny},
              {"critical_p", crit_ps}, {"growth_p", law_ps}, {"seed", cfg.seed}, {"tolerance", cfg.tolerance}};
  double subcritical = 0.0;
  for (std::size_t i = 0; i < pks.size(); ++i) {
    for (std::size_t a = 0; a < crit_ps.size(); ++a) {
      Row row;
      const double k = 3.0 * (0.5 - 1.0 / crit_ps[a]);
      row.params = {{"A", pks[i]}, {"p", crit_ps[a]}, {"k", k}};
      row.ratio = outs[i].crit[a];
      row.lhs = row.ratio;
      row.rhs = 1.0;
      row.scale = std::log2(static_cast<double>(pks[i]));
      r.rows.push_back(row);
    }
    subcritical = std::max(subcritical, outs[i].subcritical);
  }
  report::summarize(r, cfg.tolerance);
  r.extra["subcritical_linf_over_h1.6_max"] = subcritical;

  // Log-type fields: u_N = sum_{A <= N} of unit-H^{3/2} coherent packets, so
  // every dyadic level carries the same H^{3/2} energy. A packet A lives on
  // eta in [A / (2m+1), 2A), so this family needs a wide eta range and few
  // modes; packets whose eta range leaves the lattice are dropped.
  const GridSpec log_spec = GridSpec::make(1.0, 1024, 8, 1);
  const GridPtr log_grid = Grid::create(log_spec);
  const int log_ny = log_grid->y_count(1);
  std::vector<std::int64_t> levels;
  for (std::int64_t A : spectral::packets(log_spec))
    if (2 * A <= log_spec.eta_count * log_spec.eta_step) levels.push_back(A);
  // Fields are streamed: only the running sum is kept in memory.
  std::vector<std::vector<double>> lp_rows;
  std::vector<double> h32, h2;
  {
    PhysicalField acc;
    double e32 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      SpectralField c = coherent_packet(log_grid, levels[i]);
      c *= 1.0 / spectral::sobolev_norm(c, 1.5);
      const PhysicalField u = spectral::synthesize(c, log_ny);
      if (i == 0)
        acc = u;
      else
        for (std::size_t s = 0; s < acc.v.size(); ++s) acc.v[s] += u.v[s];
      // Packets are orthogonal in every H^k, so the energies add.
      e32 += 1.0;
      const double n2 = spectral::sobolev_norm(c, 2.0);
      e2 += n2 * n2;
      h32.push_back(std::sqrt(e32));
      h2.push_back(std::sqrt(e2));
      const auto norms = dyadic_lp_norms(acc, *log_grid, 6);
      std::vector<double> v;
      for (double p : law_ps) v.push_back(norms[static_cast<std::size_t>(std::log2(p)) - 1] / h32.back());
      v.push_back(norms.back());
      lp_rows.push_back(v);
    }
  }
  json growth = json::array();
  std::vector<double> lx, ly;
  for (std::size_t a = 0; a < law_ps.size(); ++a) {
    double best = 0.0;
    std::int64_t argN = 0;
    for (std::size_t i = 0; i < lp_rows.size(); ++i)
      if (lp_rows[i][a] > best) {
        best = lp_rows[i][a];
        argN = levels[i];
      }
    growth.push_back({{"p", law_ps[a]}, {"sup_ratio", best}, {"attained_at_N", argN}});
    lx.push_back(std::log(law_ps[a]));
    ly.push_back(std::log(best));
  }
  const auto fit = report::fit_line(lx, ly);
  // Local exponents between consecutive p show where the finite grid saturates.
  json local = json::array();
  for (std::size_t a = 1; a < lx.size(); ++a)
    local.push_back({{"p_from", law_ps[a - 1]}, {"p_to", law_ps[a]}, {"exponent", (ly[a] - ly[a - 1]) / (lx[a] - lx[a - 1])}});
  r.extra["sqrt_p_growth"] = {{"fields", "sums of unit-H^{3/2} coherent packets up to N"},
                              {"levels", levels.size()},
                              {"grid", {{"eta_step", log_spec.eta_step}, {"eta_count", log_spec.eta_count}, {"m_max", log_spec.m_max}}},
                              {"by_p", growth},
                              {"fitted_exponent", fit.slope},
                              {"fit_r2", fit.r2},
                              {"local_exponents", local}};

  // Logarithmic L^infinity bound with k = 2 on the same family.
  json bg = json::array();
  double bg_max = 0.0;
  report::SweepReport bg_rep;
  for (std::size_t i = 0; i < lp_rows.size(); ++i) {
    const double linf = lp_rows[i].back();
    const double ratio = linf / (h32[i] * std::sqrt(std::log(1.0 + h2[i] / h32[i])));
    bg.push_back({{"N", levels[i]}, {"linf", linf}, {"h32", h32[i]}, {"h2", h2[i]}, {"ratio", ratio}});
    bg_max = std::max(bg_max, ratio);
    Row row;
    row.ratio = ratio;
    row.scale = std::log2(static_cast<double>(levels[i]));
    bg_rep.rows.push_back(row);
  }
  report::summarize(bg_rep, cfg.tolerance);
  r.extra["log_linf_bound"] = {{"k", 2.0},
                               {"by_N", bg},
                               {"max_ratio", bg_max},
                               {"top_scales_max", bg_rep.summary.top_max},
                               {"other_scales_max", bg_rep.summary.rest_max},
                               {"verdict", bg_rep.summary.pass ? "PASS" : "FAIL"}};
  const bool growth_ok = fit.slope >= 0.35 && fit.slope <= 0.65;
  r.extra["sqrt_p_growth"]["exponent_window"] = {0.35, 0.65};
  r.extra["sqrt_p_growth"]["verdict"] = growth_ok ? "PASS" : "FAIL";
  r.extra["verdict"] = r.summary.pass && growth_ok && bg_rep.summary.pass ? "PASS" : "FAIL";
  return r;
}

SweepReport derivative_split_sweep(const SweepConfig& cfg) {
  const GridSpec spec = GridSpec::make(0.5, 16, 32, 3);
  const GridPtr grid = Grid::create(spec);
  const int ny = grid->y_count_norm(2);
  const int m_top = spec.m_max - 1;  // room for the +1 index shift
  std::vector<std::int64_t> pks;
  for (std::int64_t A : spectral::packets(spec))
    if (A <= 128) pks.push_back(A);

  // D_2: shift pairs with a non-zero coefficient for generic blocks.
  const auto generic = spectral::nonzero_terms(
      spectral::expand_product_laplacian({DyadicIndex{0, 2, spectral::packet_of(0, 2)}, DyadicIndex{1, 3, spectral::packet_of(1, 3)}}));
  const auto& d1 = spectral::d1();

  struct PacketData {
    SpectralField f;
    std::vector<PhysicalField> shifted;  // one per element of D_1
  };
  const auto data = parallel_map(pks.size(), cfg.workers, [&](std::size_t i) {
    PacketData d;
    d.f = random_packet(grid, pks[i], m_top, cfg.seed);
    for (const auto& delta : d1) {
      SpectralField s(grid);
      for (const auto& b : packet_blocks(spec, pks[i], m_top)) s += spectral::shift(spectral::band_extract(d.f, b.band_exp, b.m), delta);
      d.shifted.push_back(spectral::synthesize(s, ny));
    }
    return d;
  });
  auto d1_index = [&](const spectral::ShiftIndex& s) {
    return static_cast<std::size_t>(std::find(d1.begin(), d1.end(), s) - d1.begin());
  };

  struct Cell {
    std::size_t a, b;
  };
  std::vector<Cell> cells;
  for (std::size_t a = 0; a < pks.size(); ++a)
    for (std::size_t b = a; b < pks.size(); ++b) cells.push_back({a, b});
  struct Out {
    double h0, h1, h2, split;
  };
  const auto outs = parallel_map(cells.size(), cfg.workers, [&](std::size_t i) {
    const auto& u = data[cells[i].a];
    const auto& v = data[cells[i].b];
    Out o;
    o.h0 = spectral::product_sobolev_norm({&u.f, &v.f}, 0);
    o.h1 = spectral::product_sobolev_norm({&u.f, &v.f}, 1);
    o.h2 = spectral::product_sobolev_norm({&u.f, &v.f}, 2);
    o.split = 0.0;
    for (const auto& t : generic) {
      const PhysicalField& x = u.shifted[d1_index(t.shifts[0])];
      const PhysicalField& y = v.shifted[d1_index(t.shifts[1])];
      std::vector<double> ax(x.v.size()), ay(y.v.size());
      for (std::size_t s = 0; s < ax.size(); ++s) {
        ax[s] = std::norm(x.v[s]);
        ay[s] = std::norm(y.v[s]);
      }
      o.split += std::sqrt(integrate_product(ax, ay, *grid, ny));
    }
    return o;
  });

  SweepReport r;
  r.name = "derivative_split";
  r.config = {{"eta_step", spec.eta_step}, {"eta_count", spec.eta_count}, {"m_max", spec.m_max},
              {"ell", {0.0, 0.5, 1.0, 1.5, 2.0}}, {"D2_size", generic.size()}, {"seed", cfg.seed},
              {"tolerance", cfg.tolerance}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double A = static_cast<double>(pks[cells[i].a]), B = static_cast<double>(pks[cells[i].b]);
    const Out& o = outs[i];
    // Integer orders are exact; half-integer orders use the interpolation
    // upper bound between the neighbouring integer orders.
    const std::pair<double, double> ells[] = {{0.0, o.h0}, {0.5, std::sqrt(o.h0 * o.h1)}, {1.0, o.h1},
                                              {1.5, std::sqrt(o.h1 * o.h2)}, {2.0, o.h2}};
    for (const auto& [ell, value] : ells) {
      Row row;
      row.params = {{"A", pks[cells[i].a]}, {"B", pks[cells[i].b]}, {"ell", ell}, {"exact", ell == std::floor(ell)}};
      row.lhs = value;
      row.rhs = std::pow(std::max(A, B), ell / 2.0) * o.split;
      row.ratio = row.lhs / row.rhs;
      row.scale = std::log2(std::max(A, B));
      r.rows.push_back(row);
    }
  }
  report::summarize(r, cfg.tolerance);
  json per_ell = json::object();
  for (double ell : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    report::SweepReport sub;
    for (const auto& row : r.rows)
      if (row.params.at("ell").get<double>() == ell) sub.rows.push_back(row);
    report::summarize(sub, cfg.tolerance);
    per_ell[report::format_double(ell)] = {{"max_ratio", sub.summary.max_ratio},
                                           {"top_scales_max", sub.summary.top_max},
                                           {"other_scales_max", sub.summary.rest_max},
                                           {"verdict", sub.summary.pass ? "PASS" : "FAIL"}};
  }
  r.extra["by_ell"] = per_ell;
  return r;
}

}  // namespace grushin::estimates
