#include "grushin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace grushin::solver {

using spectral::Grid;
using spectral::GridSpec;
using spectral::PhysicalField;

void SolverConfig::validate() const {
  if (!(std::isfinite(T) && T != 0.0)) throw std::invalid_argument("solver: T must be finite and non-zero");
  if (n_t < 2) throw std::invalid_argument("solver: n_t must be at least 2");
  if (!(picard_tol > 0.0)) throw std::invalid_argument("solver: picard_tol must be positive");
  if (picard_max_iter < 1) throw std::invalid_argument("solver: picard_max_iter must be at least 1");
  if (!(R >= 1.0)) throw std::invalid_argument("solver: R must be at least 1");
  if (mode == Mode::randomized && !(ell > 1.5 && ell < k + 0.5))
    throw std::invalid_argument("solver: randomized mode requires 3/2 < ell < k + 1/2");
}

json SolverConfig::to_json() const {
  return {{"k", k},
          {"ell", ell},
          {"T", T},
          {"n_t", n_t},
          {"picard_tol", picard_tol},
          {"picard_max_iter", picard_max_iter},
          {"R", R},
          {"mode", mode == Mode::deterministic ? "det" : "rand"},
          {"defocusing", defocusing},
          {"seed", seed}};
}

std::vector<double> time_nodes(const SolverConfig& cfg) {
  std::vector<double> t(static_cast<std::size_t>(cfg.n_t));
  for (int j = 0; j < cfg.n_t; ++j) t[static_cast<std::size_t>(j)] = cfg.T * j / (cfg.n_t - 1);
  return t;
}

std::vector<double> time_weights(int n_t, double T) {
  if (n_t < 2) throw std::invalid_argument("time_weights: n_t must be at least 2");
  const int n = n_t - 1;
  const double h = T / n;
  std::vector<double> w(static_cast<std::size_t>(n_t), 0.0);
  if (n == 1) {
    w[0] = w[1] = h / 2.0;
    return w;
  }
  const int simpson_end = n % 2 == 0 ? n : n - 3;
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    w[static_cast<std::size_t>(i)] += h / 3.0;
    w[static_cast<std::size_t>(i + 1)] += 4.0 * h / 3.0;
    w[static_cast<std::size_t>(i + 2)] += h / 3.0;
  }
  if (simpson_end != n) {
    const double c[4] = {3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0};
    for (int r = 0; r < 4; ++r) w[static_cast<std::size_t>(simpson_end + r)] += c[r] * h;
  }
  return w;
}

Sequence free_evolution(const SpectralField& u0, const SolverConfig& cfg) {
  Sequence z;
  for (double t : time_nodes(cfg)) z.push_back(spectral::propagate_phase(u0, t));
  return z;
}

namespace {

void check_sequence(const Sequence& s, const SolverConfig& cfg, const char* who) {
  if (s.size() != static_cast<std::size_t>(cfg.n_t)) throw std::invalid_argument(std::string(who) + ": node count mismatch");
  for (const auto& f : s)
    if (!f.grid() || !(f.grid()->spec() == s.front().grid()->spec()))
      throw std::invalid_argument(std::string(who) + ": fields do not share one grid");
}

void axpy(SpectralField& y, cplx a, const SpectralField& x) {
  auto& yd = y.data();
  const auto& xd = x.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += a * xd[i];
}

SpectralField difference(const SpectralField& a, const SpectralField& b) { return a - b; }

double quartic_integral(const SpectralField& u) {
  const Grid& g = *u.grid();
  const PhysicalField p = spectral::synthesize(u, g.y_count_norm(2));
  const double n = spectral::physical_lp(p, g, 4.0);
  return n * n * n * n;
}

double dirichlet(const SpectralField& u) {
  // <-Delta_G u, u> = sum (2m+1)|eta| |f|^2 |eta|^{-1/2} eta_step.
  const double de = u.grid()->spec().eta_step;
  double acc = 0.0;
  for (int m = 0; m <= u.m_max(); ++m)
    for (int col = 0; col < u.columns(); ++col) {
      const double eta = std::abs(u.q_of(col)) * de;
      acc += (2.0 * m + 1.0) * std::sqrt(eta) * std::norm(u.data()[static_cast<std::size_t>(m) * u.columns() + col]);
    }
  return acc * de;
}

double relative_drift(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x - v.front()));
  const double ref = std::abs(v.front());
  return ref > 0.0 ? worst / ref : worst;
}

SpectralField apply_laplacian(const SpectralField& u) {
  // Delta_G has symbol -(2m+1)|eta|.
  SpectralField out(u.grid());
  const double de = u.grid()->spec().eta_step;
  for (int m = 0; m <= u.m_max(); ++m)
    for (int col = 0; col < u.columns(); ++col) {
      const std::size_t i = static_cast<std::size_t>(m) * u.columns() + col;
      out.data()[i] = -(2.0 * m + 1.0) * std::abs(u.q_of(col)) * de * u.data()[i];
    }
  return out;
}

}  // namespace

Sequence duhamel_map(const Sequence& v, const Sequence& z, const SolverConfig& cfg) {
  check_sequence(v, cfg, "duhamel_map");
  check_sequence(z, cfg, "duhamel_map");
  if (!(v.front().grid()->spec() == z.front().grid()->spec()))
    throw std::invalid_argument("duhamel_map: v and z live on different grids");
  const auto t = time_nodes(cfg);
  const int n = cfg.n_t - 1;
  const double h = cfg.T / n;
  const GridPtr grid = z.front().grid();

  // Interaction-picture integrand G_j = e^{-i t_j Delta_G} N(z_j + v_j).
  Sequence G;
  G.reserve(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const SpectralField w = z[j] + v[j];
    G.push_back(w.is_zero() ? SpectralField(grid) : spectral::propagate_phase(spectral::cubic(w), -t[j]));
  }

  // Cumulative integrals I_j of G over [0, t_j].
  Sequence I(t.size(), SpectralField(grid));
  for (int j = 1; j <= n; ++j) {
    SpectralField& out = I[static_cast<std::size_t>(j)];
    auto g = [&](int i) -> const SpectralField& { return G[static_cast<std::size_t>(i)]; };
    if (j == 1) {
      if (n == 1) {
        axpy(out, h / 2.0, g(0));
        axpy(out, h / 2.0, g(1));
      } else {
        // Quadratic through t_0, t_1, t_2 integrated over [t_0, t_1].
        axpy(out, 5.0 * h / 12.0, g(0));
        axpy(out, 8.0 * h / 12.0, g(1));
        axpy(out, -h / 12.0, g(2));
      }
    } else if (j % 2 == 0) {
      out = I[static_cast<std::size_t>(j - 2)];
      axpy(out, h / 3.0, g(j - 2));
      axpy(out, 4.0 * h / 3.0, g(j - 1));
      axpy(out, h / 3.0, g(j));
    } else {
      out = I[static_cast<std::size_t>(j - 3)];
      axpy(out, 3.0 * h / 8.0, g(j - 3));
      axpy(out, 9.0 * h / 8.0, g(j - 2));
      axpy(out, 9.0 * h / 8.0, g(j - 1));
      axpy(out, 3.0 * h / 8.0, g(j));
    }
  }

  const cplx factor(0.0, -cfg.nonlinear_sign());
  Sequence out;
  out.reserve(t.size());
  out.push_back(SpectralField(grid));
  for (std::size_t j = 1; j < t.size(); ++j) {
    SpectralField f = spectral::propagate_phase(I[j], t[j]);
    f *= factor;
    out.push_back(std::move(f));
  }
  return out;
}

double sup_norm(const Sequence& v, double s) {
  double best = 0.0;
  for (const auto& f : v) best = std::max(best, spectral::sobolev_norm(f, s));
  return best;
}

double mass(const SpectralField& u) {
  const double n = spectral::sobolev_norm(u, 0.0);
  return n * n;
}

double energy(const SpectralField& u, int sigma) { return 0.5 * dirichlet(u) + 0.25 * sigma * quartic_integral(u); }

int calibrate_sigma(const Sequence& u, double* drift_plus, double* drift_minus, std::string* notice) {
  std::vector<double> ep, em, quartic;
  for (const auto& f : u) {
    const double d = 0.5 * dirichlet(f), q = 0.25 * quartic_integral(f);
    ep.push_back(d + q);
    em.push_back(d - q);
    quartic.push_back(q);
  }
  const double dp = relative_drift(ep), dm = relative_drift(em);
  if (drift_plus) *drift_plus = dp;
  if (drift_minus) *drift_minus = dm;
  double qmax = 0.0, dmax = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    qmax = std::max(qmax, quartic[i]);
    dmax = std::max(dmax, std::abs(ep[i]));
  }
  // Both candidates agree to rounding when the quartic term is negligible or
  // does not vary.
  double qvar = 0.0;
  for (double q : quartic) qvar = std::max(qvar, std::abs(q - quartic.front()));
  if (qmax <= 1e-14 * std::max(dmax, 1e-300) || qvar <= 1e-13 * std::max(qmax, 1e-300)) {
    if (notice) *notice = "quartic energy negligible; sign calibration deferred";
    return 0;
  }
  if (notice) notice->clear();
  return dp <= dm ? +1 : -1;
}

SolverTrace diagnostics(const Sequence& u, const Sequence& v, const SolverConfig& cfg, int sigma) {
  check_sequence(u, cfg, "diagnostics");
  SolverTrace tr;
  tr.t = time_nodes(cfg);
  int s = sigma;
  if (s == 0) {
    s = calibrate_sigma(u, &tr.energy_drift_plus, &tr.energy_drift_minus, &tr.sigma_notice);
  } else {
    calibrate_sigma(u, &tr.energy_drift_plus, &tr.energy_drift_minus, nullptr);
  }
  tr.sigma = s;
  for (std::size_t j = 0; j < u.size(); ++j) {
    tr.mass.push_back(mass(u[j]));
    tr.energy.push_back(energy(u[j], s));
    tr.h32_norm.push_back(spectral::sobolev_norm(u[j], 1.5));
    if (!v.empty()) tr.v_norm.push_back(spectral::sobolev_norm(v[j], cfg.ell));
  }
  tr.mass_drift = relative_drift(tr.mass);
  tr.energy_drift = relative_drift(tr.energy);
  const double h0 = tr.h32_norm.front();
  for (double h : tr.h32_norm)
    if (h > 10.0 * h0 && h > 0.0) tr.blowup_warning = true;
  if (!v.empty()) tr.v_sup = *std::max_element(tr.v_norm.begin(), tr.v_norm.end());
  return tr;
}

spectral::GridSpec regression_grid() { return spectral::GridSpec::make(0.25, 16, 16, 3); }

SpectralField regression_data(const GridPtr& grid, double l2_norm) {
  if (grid->eta_count() < 7 || grid->m_max() < 1)
    throw std::invalid_argument("regression_data: grid must hold q = 1..7 and m = 0, 1");
  SpectralField u(grid);
  for (int q = 4; q <= 7; ++q) {
    u.at(0, q) = 1.0;
    u.at(1, q) = cplx(0.5, 0.3);
  }
  u *= l2_norm / std::sqrt(mass(u));
  return u;
}

json to_json(const SolverTrace& tr) {
  return {{"t", tr.t},
          {"mass", tr.mass},
          {"energy", tr.energy},
          {"v_norm", tr.v_norm},
          {"h32_norm", tr.h32_norm},
          {"picard_residuals", tr.residuals},
          {"contraction_factors", tr.contraction},
          {"sigma", tr.sigma},
          {"sigma_notice", tr.sigma_notice},
          {"energy_drift_sigma_plus", tr.energy_drift_plus},
          {"energy_drift_sigma_minus", tr.energy_drift_minus},
          {"mass_drift", tr.mass_drift},
          {"energy_drift", tr.energy_drift},
          {"blowup_warning", tr.blowup_warning},
          {"iterations", tr.iterations},
          {"converged", tr.converged},
          {"geometric_decrease", tr.geometric},
          {"ball_radius", tr.ball_radius},
          {"v_sup", tr.v_sup},
          {"C_bound", tr.c_bound},
          {"C_lipschitz", tr.c_lipschitz},
          {"message", tr.message}};
}

PicardResult picard_solve(const SpectralField& u0, const SolverConfig& cfg, const flow_random::Draw* draw) {
  cfg.validate();
  PicardResult res;
  SpectralField data = u0;
  if (cfg.mode == Mode::randomized) {
    if (draw) {
      data = flow_random::randomize(u0, *draw);
    } else {
      const auto d = flow_random::Draw::generate(cfg.seed, 0, u0.grid()->spec());
      data = flow_random::randomize(u0, d);
    }
  }
  res.z = free_evolution(data, cfg);
  const GridPtr grid = u0.grid();
  const double rho = cfg.R * spectral::x_norm(u0, cfg.k, 1.0);
  const double absT = std::abs(cfg.T);

  Sequence v(static_cast<std::size_t>(cfg.n_t), SpectralField(grid));
  SolverTrace tr;
  tr.ball_radius = rho;
  double prev_norm = 0.0;   // ||v_j||
  double older_norm = 0.0;  // ||v_{j-1}||
  int bad_streak = 0;
  bool converged = false;
  int it = 0;
  for (; it < cfg.picard_max_iter; ++it) {
    Sequence next = duhamel_map(v, res.z, cfg);
    const double next_norm = sup_norm(next, cfg.ell);
    double resid = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j)
      resid = std::max(resid, spectral::sobolev_norm(difference(next[j], v[j]), cfg.ell));
    // Measured constants: ||Phi(v_j)|| against the bound, and the Lipschitz
    // quotient of the pair (v_{j-1}, v_j) mapped to (v_j, v_{j+1}).
    const double cube = prev_norm * prev_norm * prev_norm + rho * rho * rho;
    if (cube > 0.0) tr.c_bound = std::max(tr.c_bound, next_norm / (absT * cube));
    if (!tr.residuals.empty()) {
      const double last = tr.residuals.back();
      const double ratio = last > 0.0 ? resid / last : 0.0;
      tr.contraction.push_back(ratio);
      // Quotients below rounding carry no information.
      const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(next_norm, 1e-300);
      if (last > floor && resid > floor) {
        const double quad = rho * rho + prev_norm * prev_norm + older_norm * older_norm;
        if (quad > 0.0) tr.c_lipschitz = std::max(tr.c_lipschitz, ratio / (absT * quad));
      }
      bad_streak = ratio >= 1.0 ? bad_streak + 1 : 0;
      if (tr.contraction.size() >= 2 && ratio > 0.9 && resid > cfg.picard_tol) tr.geometric = false;
    }
    tr.residuals.push_back(resid);
    v = std::move(next);
    older_norm = prev_norm;
    prev_norm = next_norm;
    if (resid < cfg.picard_tol) {
      converged = true;
      ++it;
      break;
    }
    if (bad_streak >= 3) {
      double linf = 0.0;
      const PhysicalField p = spectral::synthesize(data, grid->y_count(2));
      for (const auto& c : p.v) linf = std::max(linf, std::abs(c));
      const double suggested = std::min(absT / 2.0, linf > 0.0 ? 0.25 / (linf * linf) : absT / 2.0);
      throw NonContraction("picard_solve: residual ratio >= 1 for three consecutive iterations; try T <= " +
                               report::format_double(suggested),
                           suggested);
    }
  }

  res.v = v;
  res.u.reserve(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) res.u.push_back(res.z[j] + v[j]);
  SolverTrace diag = diagnostics(res.u, res.v, cfg);
  diag.residuals = tr.residuals;
  diag.contraction = tr.contraction;
  diag.iterations = it;
  diag.converged = converged;
  diag.geometric = tr.geometric;
  diag.ball_radius = rho;
  diag.c_bound = tr.c_bound;
  diag.c_lipschitz = tr.c_lipschitz;
  if (!converged) diag.message = "picard_solve: iteration limit reached before picard_tol";
  if (diag.blowup_warning)
    diag.message += std::string(diag.message.empty() ? "" : "; ") + "H^{3/2} norm grew by more than 10x";
  res.trace = std::move(diag);
  return res;
}

int resolved_node_count(const GridSpec& spec, double T, int min_nodes, double max_phase_step) {
  const double omega = (2.0 * spec.m_max + 1.0) * spec.eta_count * spec.eta_step;
  int intervals = static_cast<int>(std::ceil(std::abs(T) * omega / max_phase_step));
  intervals = std::max(intervals, min_nodes - 1);
  if (intervals % 2 == 1) ++intervals;
  return intervals + 1;
}

AutoTime calibrate_T(const SpectralField& u0, const SolverConfig& cfg, const flow_random::Draw* draw, double T_probe,
                     int max_rounds) {
  const double rho = cfg.R * spectral::x_norm(u0, cfg.k, 1.0);
  if (!(rho > 0.0)) throw std::invalid_argument("calibrate_T: zero data has no natural time scale");
  AutoTime out;
  SolverConfig c = cfg;
  c.T = T_probe;
  double C = 0.0;
  for (int round = 0; round < max_rounds; ++round) {
    c.n_t = resolved_node_count(u0.grid()->spec(), c.T, cfg.n_t);
    const PicardResult r = picard_solve(u0, c, draw);
    const double measured = std::max(r.trace.c_bound, r.trace.c_lipschitz);
    out.rounds = round + 1;
    if (round > 0 && measured <= C) {
      out.history.push_back(C);
      break;
    }
    C = std::max(C, measured);
    out.history.push_back(C);
    c.T = 1.0 / (2.0 * C * rho * rho);
  }
  out.C = C;
  out.T = 1.0 / (2.0 * C * rho * rho);
  return out;
}

SplitStepResult splitstep_evolve(const SpectralField& u0, const SolverConfig& cfg, int steps_per_interval,
                                 bool nonlinear) {
  if (steps_per_interval < 1) throw std::invalid_argument("splitstep_evolve: steps_per_interval must be >= 1");
  if (cfg.n_t < 2) throw std::invalid_argument("splitstep_evolve: n_t must be at least 2");
  const GridPtr grid = u0.grid();
  const Grid& g = *grid;
  const int ny = g.y_count(3);
  const int steps = (cfg.n_t - 1) * steps_per_interval;
  const double dt = cfg.T / steps;
  const double s = cfg.nonlinear_sign();

  SplitStepResult res;
  res.t = time_nodes(cfg);
  PhysicalField U = spectral::synthesize(u0, ny);
  auto phys_mass = [&](const PhysicalField& p) {
    const double n = spectral::physical_l2(p, g);
    return n * n;
  };
  auto nonlinear_phase = [&](double tau) {
    for (auto& c : U.v) {
      const double phase = s * tau * std::norm(c);
      res.max_phase = std::max(res.max_phase, std::abs(phase));
      c *= std::polar(1.0, -phase);
    }
  };
  auto linear_step = [&](double tau) {
    const SpectralField f = spectral::analyze(U, grid);
    const PhysicalField back = spectral::synthesize(f, ny);
    const PhysicalField moved = spectral::synthesize(spectral::propagate_phase(f, tau), ny);
    for (std::size_t i = 0; i < U.v.size(); ++i) U.v[i] = moved.v[i] + (U.v[i] - back.v[i]);
  };

  res.u.push_back(spectral::analyze(U, grid));
  res.mass.push_back(phys_mass(U));
  double m_prev = res.mass.back();
  for (int step = 0; step < steps; ++step) {
    if (nonlinear) nonlinear_phase(0.5 * dt);
    linear_step(dt);
    if (nonlinear) nonlinear_phase(0.5 * dt);
    const double m_now = phys_mass(U);
    if (m_prev > 0.0) res.max_step_mass_change = std::max(res.max_step_mass_change, std::abs(m_now - m_prev) / m_prev);
    m_prev = m_now;
    if ((step + 1) % steps_per_interval == 0) {
      res.u.push_back(spectral::analyze(U, grid));
      res.mass.push_back(m_now);
    }
  }
  if (res.max_phase > std::numbers::pi / 4.0) {
    res.phase_warning = true;
    res.warning = "splitstep_evolve: nonlinear phase per half step exceeds pi/4; reduce the step";
  }
  return res;
}

double splitstep_order(const SpectralField& u0, const SolverConfig& cfg, int steps_per_interval) {
  SolverConfig c = cfg;
  c.n_t = 2;
  const int steps = (cfg.n_t - 1) * steps_per_interval;
  const SpectralField a = splitstep_evolve(u0, c, steps).u.back();
  const SpectralField b = splitstep_evolve(u0, c, 2 * steps).u.back();
  const SpectralField d = splitstep_evolve(u0, c, 4 * steps).u.back();
  const double e1 = spectral::sobolev_norm(a - b, 0.0);
  const double e2 = spectral::sobolev_norm(b - d, 0.0);
  return std::log2(e1 / e2);
}

double nls_residual(const Sequence& u, const SolverConfig& cfg) {
  check_sequence(u, cfg, "nls_residual");
  if (cfg.n_t < 5) throw std::invalid_argument("nls_residual: needs at least 5 nodes");
  const double h = cfg.T / (cfg.n_t - 1);
  const double s = cfg.nonlinear_sign();
  double worst = 0.0, scale = 0.0;
  for (const auto& f : u) scale = std::max(scale, spectral::sobolev_norm(apply_laplacian(f), 0.0));
  for (int j = 2; j + 2 < cfg.n_t; ++j) {
    auto at = [&](int i) -> const SpectralField& { return u[static_cast<std::size_t>(i)]; };
    // i d_t u by the five-point central difference.
    SpectralField r(u.front().grid());
    axpy(r, cplx(0.0, 1.0 / (12.0 * h)), at(j - 2));
    axpy(r, cplx(0.0, -8.0 / (12.0 * h)), at(j - 1));
    axpy(r, cplx(0.0, 8.0 / (12.0 * h)), at(j + 1));
    axpy(r, cplx(0.0, -1.0 / (12.0 * h)), at(j + 2));
    r -= apply_laplacian(at(j));
    axpy(r, -s, spectral::cubic(at(j)));
    worst = std::max(worst, spectral::sobolev_norm(r, 0.0));
  }
  return scale > 0.0 ? worst / scale : worst;
}

ScalingCheck scaling_check(const Sequence& u, const SolverConfig& cfg, double lambda) {
  ScalingCheck out;
  out.lambda = lambda;
  out.residual = nls_residual(u, cfg);
  const GridSpec& s = u.front().grid()->spec();
  GridSpec scaled = GridSpec::make(s.eta_step * lambda * lambda, s.eta_count, s.m_max, 3, s.dealias_factor);
  const GridPtr g2 = Grid::create(scaled);
  Sequence v;
  for (const auto& f : u) {
    SpectralField w(g2);
    w.data() = f.data();
    w *= 1.0 / lambda;
    v.push_back(std::move(w));
  }
  SolverConfig c = cfg;
  c.T = cfg.T / (lambda * lambda);
  out.scaled_residual = nls_residual(v, c);
  out.ratio = out.residual > 0.0 ? out.scaled_residual / out.residual : 0.0;
  return out;
}

std::vector<EventStatistic> event_statistics(const Sequence& z, const SpectralField& u0, const SolverConfig& cfg) {
  check_sequence(z, cfg, "event_statistics");
  const GridPtr grid = z.front().grid();
  const auto w = time_weights(cfg.n_t, std::abs(cfg.T));
  const double x = spectral::x_norm(u0, cfg.k, 1.0);
  const double T = std::abs(cfg.T), R = cfg.R;

  // Probe v = w: the lowest block of the grid, unit norm in H^ell.
  SpectralField probe(grid);
  const GridSpec& spec = grid->spec();
  for (int q = 1; q <= spec.eta_count; ++q)
    if (spectral::band_exponent(spec.eta(q)) == spec.band_min()) {
      probe.at(0, q) = 1.0;
      probe.at(0, -q) = 1.0;
    }
  probe *= 1.0 / spectral::sobolev_norm(probe, cfg.ell);

  double s1 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
  const int ny_inf = grid->y_count(2);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const SpectralField& f = z[j];
    const SpectralField zz = spectral::multiply(f, f);
    const SpectralField mod2 = spectral::multiply(f, spectral::conjugate(f));
    s1 += w[j] * (spectral::sobolev_norm(zz, cfg.ell) + spectral::sobolev_norm(mod2, cfg.ell));
    s3 += w[j] * spectral::sobolev_norm(spectral::cubic(f), cfg.ell);
    s4 += w[j] * spectral::sobolev_norm(spectral::multiply3(f, probe, probe), cfg.ell);
    const PhysicalField p = spectral::synthesize(f, ny_inf);
    double linf = 0.0;
    for (const auto& c : p.v) linf = std::max(linf, std::abs(c));
    s5 += w[j] * linf * linf;
  }
  return {{"quadratic", s1, T * R * R * x * x},
          {"cubic", s3, T * R * R * R * x * x * x},
          {"mixed_probe", s4, T * R * x},
          {"linf", s5, T * R * R * x * x}};
}

}  // namespace grushin::solver
