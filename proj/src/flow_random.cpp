#include "grushin/flow_random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "grushin/hermite.hpp"
#include "grushin/parallel.hpp"

namespace grushin::flow_random {

using spectral::band_exponent;

SpectralField linear_propagate(const SpectralField& f, double t) { return spectral::propagate_phase(f, t); }

std::mt19937_64 sample_stream(std::uint64_t master_seed, std::uint64_t sample, std::int64_t channel) {
  const auto c = static_cast<std::uint64_t>(channel);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(sample),      static_cast<std::uint32_t>(sample >> 32),
                    static_cast<std::uint32_t>(c),           static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

cplx complex_gaussian(std::mt19937_64& engine) {
  std::normal_distribution<double> normal;
  const double g = normal(engine);
  const double h = normal(engine);
  return {g, h};
}

Draw::Draw(int band_min, int band_max, int m_max, cplx fill)
    : band_min_(band_min), band_max_(band_max), m_max_(m_max) {
  if (band_max < band_min || m_max < 0) throw std::invalid_argument("Draw: empty table");
  values_.assign(static_cast<std::size_t>(band_max - band_min + 1) * (m_max + 1), fill);
}

Draw Draw::generate(std::uint64_t master_seed, std::uint64_t sample, const GridSpec& spec) {
  Draw d(spec.band_min(), spec.band_max(), spec.m_max);
  for (int j = d.band_min_; j <= d.band_max_; ++j) {
    auto engine = sample_stream(master_seed, sample, j);
    for (int m = 0; m <= d.m_max_; ++m) d.at(j, m) = complex_gaussian(engine);
  }
  return d;
}

Draw Draw::constant(const GridSpec& spec, cplx value) { return Draw(spec.band_min(), spec.band_max(), spec.m_max, value); }

bool Draw::covers(const GridSpec& spec) const {
  return !values_.empty() && band_min_ <= spec.band_min() && band_max_ >= spec.band_max() && m_max_ >= spec.m_max;
}

std::size_t Draw::index(int band_exp, int m) const {
  if (band_exp < band_min_ || band_exp > band_max_ || m < 0 || m > m_max_)
    throw std::out_of_range("Draw: no entry for band " + std::to_string(band_exp) + ", mode " + std::to_string(m));
  return static_cast<std::size_t>(band_exp - band_min_) * (m_max_ + 1) + m;
}

cplx Draw::at(int band_exp, int m) const { return values_[index(band_exp, m)]; }
cplx& Draw::at(int band_exp, int m) { return values_[index(band_exp, m)]; }

SpectralField randomize(const SpectralField& u0, const Draw& draw) {
  SpectralField out(u0.grid());
  const double de = u0.grid()->spec().eta_step;
  for (int col = 0; col < u0.columns(); ++col) {
    const int j = band_exponent(std::abs(u0.q_of(col)) * de);
    for (int m = 0; m <= u0.m_max(); ++m) {
      const std::size_t i = static_cast<std::size_t>(m) * u0.columns() + col;
      if (u0.data()[i] == cplx(0.0)) continue;
      out.data()[i] = draw.at(j, m) * u0.data()[i];
    }
  }
  return out;
}

SpectralField rough_potential(double k, double rho, const GridPtr& grid) {
  if (k < 0.0 || rho < 0.0) throw std::domain_error("rough_potential: requires k, rho >= 0");
  SpectralField out(grid);
  const auto& s = grid->spec();
  const double de = s.eta_step;
  for (int j = std::max(0, s.band_min()); j <= s.band_max(); ++j) {
    const double I = std::ldexp(1.0, j);
    int count = 0;
    for (int col = 0; col < out.columns(); ++col)
      if (band_exponent(std::abs(out.q_of(col)) * de) == j) ++count;
    if (count == 0) continue;
    for (int m = 0; m <= s.m_max; ++m) {
      const double lm = std::log(m + 2.0);
      const double li = std::log(1.0 + I);
      const double target = 1.0 / (std::pow(1.0 + (2.0 * m + 1.0) * I, k) * std::pow(1.0 + I * I, 0.5 * rho) * li * li *
                                   (m + 1.0) * lm * lm);
      // Profile |eta|^{1/4}: each lattice point then contributes c^2 eta_step.
      const double c = std::sqrt(target / (count * de));
      for (int col = 0; col < out.columns(); ++col) {
        const double eta = std::abs(out.q_of(col)) * de;
        if (band_exponent(eta) != j) continue;
        out.data()[static_cast<std::size_t>(m) * out.columns() + col] = c * std::pow(eta, 0.25);
      }
    }
  }
  return out;
}

double block_size(int band_exp, int m) {
  return std::max(std::abs(std::log1p(std::ldexp(1.0, band_exp))), static_cast<double>(m));
}

double truncated_sobolev2(const SpectralField& f, double s, double K) {
  const double de = f.grid()->spec().eta_step;
  double acc = 0.0;
  for (int col = 0; col < f.columns(); ++col) {
    const double eta = std::abs(f.q_of(col)) * de;
    const int j = band_exponent(eta);
    for (int m = 0; m <= f.m_max(); ++m) {
      if (block_size(j, m) > K) continue;
      const cplx c = f.data()[static_cast<std::size_t>(m) * f.columns() + col];
      acc += std::pow(1.0 + (2.0 * m + 1.0) * eta, s) * std::norm(c) / std::sqrt(eta);
    }
  }
  return acc * de;
}

double truncated_x2(const SpectralField& f, double k, double rho, double K) {
  const double de = f.grid()->spec().eta_step;
  double acc = 0.0;
  for (int col = 0; col < f.columns(); ++col) {
    const double eta = std::abs(f.q_of(col)) * de;
    const int j = band_exponent(eta);
    const double I = std::ldexp(1.0, j);
    for (int m = 0; m <= f.m_max(); ++m) {
      if (block_size(j, m) > K) continue;
      const cplx c = f.data()[static_cast<std::size_t>(m) * f.columns() + col];
      acc += std::pow(1.0 + (2.0 * m + 1.0) * I, k) * std::pow(1.0 + I * I, 0.5 * rho) * std::norm(c) / std::sqrt(eta);
    }
  }
  return acc * de;
}

bool MomentCheck::pass() const {
  if (std_error <= 0.0) return estimate == expected;
  return std::abs(estimate - expected) <= tolerance_sigmas * std_error;
}

report::json to_json(const EnsembleReport& r) {
  report::json j;
  j["config"] = r.config;
  j["statistic"] = r.statistic;
  report::json qs = report::json::array();
  for (const auto& q : r.quantiles) qs.push_back({{"level", q.level}, {"value", q.value}});
  j["quantiles"] = std::move(qs);
  j["tail_fit"] = {{"slope", r.tail_fit.slope}, {"intercept", r.tail_fit.intercept}, {"r2", r.tail_fit.r2},
                   {"points", r.tail_fit.points}};
  j["constants"] = r.constants;
  report::json cs = report::json::array();
  for (const auto& c : r.checks)
    cs.push_back({{"name", c.name},
                  {"estimate", c.estimate},
                  {"expected", c.expected},
                  {"std_error", c.std_error},
                  {"sigmas", c.tolerance_sigmas},
                  {"pass", c.pass()}});
  j["checks"] = std::move(cs);
  j["verdict"] = r.pass ? "PASS" : "FAIL";
  return j;
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("quantile: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

TailFit fit_gaussian_tail(std::vector<double> values, int min_count) {
  TailFit fit;
  const std::size_t n = values.size();
  if (n < static_cast<std::size_t>(4 * min_count)) return fit;
  std::sort(values.begin(), values.end());
  const double top = 1.0 - static_cast<double>(min_count) / n;
  std::vector<double> xs, ys;
  const int steps = 12;
  for (int i = 0; i <= steps; ++i) {
    const double level = 0.5 + (top - 0.5) * i / steps;
    const auto idx = std::min(n - 1, static_cast<std::size_t>(std::floor(level * n)));
    const double r = values[idx];
    // Empirical survival at threshold r, counted directly.
    const auto above = static_cast<double>(values.end() - std::upper_bound(values.begin(), values.end(), r));
    if (above < min_count) continue;
    xs.push_back(r * r);
    ys.push_back(std::log(above / n));
  }
  if (xs.size() < 3) return fit;
  const auto line = report::fit_line(xs, ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.points = static_cast<int>(xs.size());
  return fit;
}

namespace {

struct MomentSample {
  double s2 = 0.0;
  double t = 0.0;
  cplx x1, x1sq, off_a, off_b, off_c;
  double paired = 0.0, fourth = 0.0;
};

struct Accumulator {
  double sum = 0.0, sum2 = 0.0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
  }
  double mean(double n) const { return sum / n; }
  double std_error(double n) const {
    const double m = sum / n;
    const double var = std::max(0.0, (sum2 / n - m * m) * n / (n - 1.0));
    return std::sqrt(var / n);
  }
};

}  // namespace

EnsembleReport decoupling_moment_check(const std::vector<cplx>& psi, const EnsembleConfig& cfg, double r2_max) {
  if (psi.empty()) throw std::invalid_argument("decoupling_moment_check: empty coefficient family");
  const int n = cfg.n_samples;
  if (n < 2) throw std::invalid_argument("decoupling_moment_check: need at least two samples");
  if (!(r2_max >= 1.0)) throw std::invalid_argument("decoupling_moment_check: r2_max must be at least 1");
  if (n * std::exp(-0.5 * r2_max) < 10.0)
    throw std::invalid_argument("decoupling_moment_check: n_samples too small for the requested tail depth");
  double psi2 = 0.0;
  for (const auto& p : psi) psi2 += std::norm(p);
  const std::size_t width = std::max<std::size_t>(psi.size(), 4);

  auto samples = parallel_map(static_cast<std::size_t>(n), cfg.workers, [&](std::size_t i) {
    auto engine = sample_stream(cfg.master_seed, i, 0);
    std::vector<cplx> x(width);
    for (auto& v : x) v = complex_gaussian(engine);
    cplx s(0.0);
    for (std::size_t a = 0; a < psi.size(); ++a) s += psi[a] * x[a];
    MomentSample r;
    r.s2 = std::norm(s);
    r.t = std::abs(s) / std::sqrt(psi2);
    r.x1 = x[0];
    r.x1sq = x[0] * x[0];
    r.off_a = x[0] * std::conj(x[1]) * std::conj(x[1]) * x[0];
    r.off_b = x[0] * std::conj(x[1]) * std::conj(x[2]) * x[3];
    r.off_c = x[0] * std::conj(x[0]) * std::conj(x[0]) * x[1];
    r.paired = std::norm(x[0]) * std::norm(x[1]);
    r.fourth = std::norm(x[0]) * std::norm(x[0]);
    return r;
  });

  const double nn = n;
  EnsembleReport rep;
  rep.config = {{"master_seed", cfg.master_seed}, {"n_samples", n}, {"terms", psi.size()}, {"r2_max", r2_max},
                {"distribution", "complex gaussian g + i h, g, h ~ N(0, 1)"}};
  rep.statistic = "|sum psi_n X_n| / (sum |psi_n|^2)^{1/2}";

  auto real_check = [&](const std::string& name, auto get, double expected) {
    Accumulator acc;
    for (const auto& s : samples) acc.add(get(s));
    rep.checks.push_back({name, acc.mean(nn), expected, acc.std_error(nn), 3.0});
  };
  auto complex_check = [&](const std::string& name, auto get, cplx expected) {
    real_check(name + " (re)", [&](const MomentSample& s) { return get(s).real(); }, expected.real());
    real_check(name + " (im)", [&](const MomentSample& s) { return get(s).imag(); }, expected.imag());
  };
  real_check("E|S|^2", [](const MomentSample& s) { return s.s2; }, gaussian_second_moment * psi2);
  complex_check("E[X]", [](const MomentSample& s) { return s.x1; }, 0.0);
  complex_check("E[X^2]", [](const MomentSample& s) { return s.x1sq; }, 0.0);
  complex_check("E[X1 conj(X2) conj(X2) X1]", [](const MomentSample& s) { return s.off_a; }, 0.0);
  complex_check("E[X1 conj(X2) conj(X3) X4]", [](const MomentSample& s) { return s.off_b; }, 0.0);
  complex_check("E[X1 conj(X1) conj(X1) X2]", [](const MomentSample& s) { return s.off_c; }, 0.0);
  real_check("E[|X1|^2 |X2|^2]", [](const MomentSample& s) { return s.paired; }, 4.0);
  real_check("E|X|^4", [](const MomentSample& s) { return s.fourth; }, 8.0);

  std::vector<double> t(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) t[i] = samples[i].t;
  std::vector<double> xs, ys;
  report::json survival = report::json::array();
  for (int r2 = 1; r2 <= static_cast<int>(r2_max); ++r2) {
    const double R = std::sqrt(static_cast<double>(r2));
    const auto hits = std::count_if(t.begin(), t.end(), [R](double v) { return v > R; });
    survival.push_back({{"R2", r2}, {"probability", hits / nn}, {"gaussian", std::exp(-0.5 * r2)}});
    if (hits == 0) continue;
    xs.push_back(r2);
    ys.push_back(std::log(hits / nn));
  }
  if (xs.size() >= 2) {
    const auto line = report::fit_line(xs, ys);
    rep.tail_fit = {line.slope, line.intercept, line.r2, static_cast<int>(xs.size())};
  }
  for (double level : {0.5, 0.9, 0.99, 0.999})
    if (nn >= 10.0 / (1.0 - level)) rep.quantiles.push_back({level, quantile(t, level)});
  rep.constants = {{"E|X|^2", gaussian_second_moment},
                   {"sum_psi2", psi2},
                   {"tail_constant_c", -rep.tail_fit.slope},
                   {"survival", survival}};
  rep.pass = rep.tail_fit.points >= 3 && rep.tail_fit.slope < 0.0 && rep.tail_fit.r2 > 0.9;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass();
  return rep;
}

std::vector<double> simpson_weights(int n, double T) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson_weights: need an odd node count >= 3");
  const double h = T / (n - 1);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  for (auto& v : w) v *= h / 3.0;
  return w;
}

namespace {

double time_norm(const std::vector<double>& values, const std::vector<double>& w, double q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += w[i] * std::pow(values[i], q);
  return std::pow(acc, 1.0 / q);
}

int lp_sampling(const spectral::Grid& g, double p) {
  return g.y_count_norm(std::max(1, static_cast<int>(std::ceil(p / 2.0))));
}

}  // namespace

EnsembleReport integrability_sweep(const SpectralField& u0, double k, double p, double q, double T,
                                   const EnsembleConfig& cfg, int n_t) {
  if (!(p >= 2.0) || std::isinf(p) || !(q >= 2.0) || std::isinf(q))
    throw std::domain_error("integrability_sweep: requires p, q in [2, infinity)");
  if (!(T > 0.0)) throw std::domain_error("integrability_sweep: requires T > 0");
  const auto& grid = u0.grid();
  const double z = hermite::zeta(p);
  const double s = k + z;
  const double rho = z + 1.5 - 3.0 / p;
  const auto w = simpson_weights(n_t, T);
  const int ny = lp_sampling(*grid, p);
  const auto& spec = grid->spec();

  std::vector<spectral::DyadicIndex> blocks;
  for (const auto& b : spectral::all_blocks(spec))
    if (spectral::block_norm2(u0, b.band_exp, b.m) > 0.0) blocks.push_back(b);

  auto block_terms = parallel_map(blocks.size(), cfg.workers, [&](std::size_t i) {
    const auto& b = blocks[i];
    const SpectralField ub = spectral::band_extract(u0, b.band_exp, b.m);
    std::vector<double> norms(static_cast<std::size_t>(n_t));
    for (int a = 0; a < n_t; ++a) {
      const double t = T * a / (n_t - 1);
      norms[a] = spectral::physical_lp(spectral::synthesize(linear_propagate(ub, t), ny), *grid, p);
    }
    const double lq = time_norm(norms, w, q);
    return std::pow(1.0 + (2.0 * b.m + 1.0) * b.I(), s) * lq * lq;
  });
  double det_lhs = 0.0;
  for (double v : block_terms) det_lhs += v;
  const double xnorm = spectral::x_norm(u0, k, rho);
  const double det_rhs = std::pow(T, 2.0 / q) * xnorm * xnorm;

  EnsembleReport rep;
  rep.config = {{"master_seed", cfg.master_seed}, {"n_samples", cfg.n_samples}, {"k", k}, {"p", p}, {"q", q},
                {"T", T}, {"n_t", n_t}, {"eta_step", spec.eta_step}, {"eta_count", spec.eta_count},
                {"m_max", spec.m_max}};
  rep.statistic = "||z^omega||_{L^q_T W^{k+zeta(p),p}} / (T^{1/q} ||u0||_{X^k_{zeta(p)+3/2-3/p}})";
  rep.constants = {{"E|X|^2", gaussian_second_moment},
                   {"zeta_p", z},
                   {"x_rho", rho},
                   {"deterministic_lhs", det_lhs},
                   {"deterministic_rhs", det_rhs},
                   {"deterministic_C", det_rhs > 0 ? det_lhs / det_rhs : 0.0}};

  if (cfg.n_samples > 0 && xnorm > 0.0) {
    const SpectralField lifted = spectral::apply_resolvent_power(u0, 0.5 * s);
    auto stats = parallel_map(static_cast<std::size_t>(cfg.n_samples), cfg.workers, [&](std::size_t i) {
      const Draw d = Draw::generate(cfg.master_seed, i, spec);
      const SpectralField v = randomize(lifted, d);
      std::vector<double> norms(static_cast<std::size_t>(n_t));
      for (int a = 0; a < n_t; ++a) {
        const double t = T * a / (n_t - 1);
        norms[a] = spectral::physical_lp(spectral::synthesize(linear_propagate(v, t), ny), *grid, p);
      }
      return time_norm(norms, w, q) / (std::pow(T, 1.0 / q) * xnorm);
    });
    for (double level : {0.5, 0.9, 0.99, 0.999})
      if (cfg.n_samples >= 10.0 / (1.0 - level)) rep.quantiles.push_back({level, quantile(stats, level)});
    rep.tail_fit = fit_gaussian_tail(stats);
    double mean = 0.0;
    for (double v : stats) mean += v;
    rep.constants["ensemble_mean"] = mean / cfg.n_samples;
  }
  return rep;
}

NonSmoothingResult nonsmoothing_check(const SpectralField& u0, double k, double eps, const std::vector<double>& Ks,
                                      const EnsembleConfig& cfg, double tail_limit) {
  if (Ks.size() < 2) throw std::invalid_argument("nonsmoothing_check: need at least two truncations");
  struct PerDraw {
    std::vector<double> rough, smooth;
  };
  const auto& spec = u0.grid()->spec();
  auto runs = parallel_map(static_cast<std::size_t>(cfg.n_samples), cfg.workers, [&](std::size_t i) {
    const SpectralField v = randomize(u0, Draw::generate(cfg.master_seed, i, spec));
    PerDraw r;
    for (double K : Ks) {
      r.rough.push_back(truncated_sobolev2(v, k + eps, K));
      r.smooth.push_back(truncated_sobolev2(v, k, K));
    }
    return r;
  });
  NonSmoothingResult out;
  out.draws = cfg.n_samples;
  out.mean_rough_sums.assign(Ks.size(), 0.0);
  out.mean_smooth_sums.assign(Ks.size(), 0.0);
  for (const auto& r : runs) {
    bool inc = true;
    for (std::size_t a = 1; a < Ks.size(); ++a) inc = inc && r.rough[a] > r.rough[a - 1];
    if (inc) ++out.increasing;
    const double last = r.smooth.back();
    const double tail = last > 0 ? (last - r.smooth[Ks.size() - 2]) / last : 0.0;
    if (tail < tail_limit) ++out.small_tail;
    out.max_tail = std::max(out.max_tail, tail);
    out.mean_tail += tail;
    for (std::size_t a = 0; a < Ks.size(); ++a) {
      out.mean_rough_sums[a] += r.rough[a];
      out.mean_smooth_sums[a] += r.smooth[a];
    }
  }
  if (out.draws > 0) {
    out.mean_tail /= out.draws;
    for (std::size_t a = 0; a < Ks.size(); ++a) {
      out.mean_rough_sums[a] /= out.draws;
      out.mean_smooth_sums[a] /= out.draws;
    }
  }
  for (double K : Ks) {
    out.oracle_rough_sums.push_back(gaussian_second_moment * truncated_sobolev2(u0, k + eps, K));
    out.oracle_smooth_sums.push_back(gaussian_second_moment * truncated_sobolev2(u0, k, K));
  }
  return out;
}

}  // namespace grushin::flow_random
