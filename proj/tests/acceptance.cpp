// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "grushin/estimates.hpp"
#include "grushin/flow_random.hpp"
#include "grushin/hermite.hpp"
#include "grushin/shift.hpp"
#include "grushin/solver.hpp"
#include "grushin/spectral.hpp"

namespace fs = std::filesystem;
namespace est = grushin::estimates;
namespace flow = grushin::flow_random;
namespace herm = grushin::hermite;
namespace sol = grushin::solver;
using namespace grushin::spectral;
using grushin::report::json;
using grushin::report::verdict;

namespace {

const double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

/// Collects named sub-checks into one outcome.
struct Checks {
  bool pass = true;
  std::string detail;
  void add(const std::string& name, bool ok, const std::string& value) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += name + "=" + value + (ok ? "" : " (FAIL)");
  }
  Outcome done() const { return {pass, detail}; }
};

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) e = std::max(e, std::abs(a.data()[i] - b.data()[i]));
  return e;
}

SpectralField random_field(const GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SpectralField f(g);
  for (int m = 0; m <= g->m_max(); ++m)
    for (int q = -g->eta_count(); q <= g->eta_count(); ++q)
      if (q != 0) f.at(m, q) = cplx(n(rng), n(rng)) / (1.0 + m + std::abs(q));
  return f;
}

SpectralField random_block(const GridPtr& g, int band_exp, int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  SpectralField f(g);
  for (int q = -g->eta_count(); q <= g->eta_count(); ++q)
    if (q != 0 && band_exponent(std::abs(q) * g->spec().eta_step) == band_exp) f.at(m, q) = cplx(n(rng), n(rng));
  return f;
}

Outcome criterion1() {
  Checks c;
  // Hermite recurrence, eigen-equation and derivative lowering form, nodewise.
  const int m_max = 128;
  const herm::XGrid xg = herm::XGrid::for_modes(m_max);
  const herm::HermiteTable table(m_max, xg);
  double rec = 0.0, eig = 0.0, der = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    rec = std::max(rec, table.recurrence_residual(m));
    eig = std::max(eig, table.eigen_residual(m) / (2.0 * m + 1.0));
  }
  const auto nodes = xg.nodes();
  for (int m = 0; m <= m_max; ++m)
    for (std::size_t j = 0; j < nodes.size(); j += 7) {
      const double lowering = (m > 0 ? std::sqrt(m / 2.0) * table.value(m - 1, j) : 0.0) -
                              std::sqrt((m + 1) / 2.0) * table.value(m + 1, j);
      der = std::max(der, std::abs(herm::derivative(m, nodes[j]) - lowering) / (1.0 + std::abs(lowering)));
    }
  c.add("recurrence", rec <= 1e-10, fmt(rec));
  c.add("eigen/(2m+1)", eig <= 1e-10, fmt(eig));
  c.add("derivative", der <= 1e-10, fmt(der));
  const double ortho = table.orthonormality_defect();
  c.add("orthonormality", ortho <= 1e-10, fmt(ortho));

  const auto g = Grid::create(GridSpec::make(0.25, 12, 10, 3));
  const auto f = random_field(g, 21);
  const double nf = sobolev_norm(f, 0.0);
  const double rt = sobolev_norm(analyze(synthesize(f), g) - f, 0.0) / nf;
  c.add("round_trip", rt <= 1e-9, fmt(rt));

  double iso = 0.0;
  const auto a = propagate_phase(f, 0.37);
  for (double k : {0.0, 1.0, 1.5}) iso = std::max(iso, std::abs(sobolev_norm(a, k) / sobolev_norm(f, k) - 1.0));
  iso = std::max(iso, std::abs(x_norm(a, 1.5, 1.0) / x_norm(f, 1.5, 1.0) - 1.0));
  const double group = max_abs_diff(propagate_phase(a, 0.2), propagate_phase(f, 0.57));
  c.add("isometry", iso <= 1e-12, fmt(iso));
  c.add("group_law", group <= 1e-12, fmt(group));

  double blocks = 0.0, pk = 0.0;
  for (const auto& b : all_blocks(g->spec())) blocks += block_norm2(f, b.band_exp, b.m);
  for (auto A : packets(g->spec())) pk += std::pow(sobolev_norm(packet_extract(f, A), 0.0), 2);
  const double dec = std::max(std::abs(blocks / (nf * nf) - 1.0), std::abs(pk / (nf * nf) - 1.0));
  c.add("decomposition", dec <= 1e-12, fmt(dec));

  std::mt19937_64 rng(5);
  const auto u = random_block(g, 0, 4, rng);
  const double sh = max_abs_diff(shift(u, ShiftIndex{0, -1}), u);
  c.add("shift(0,-)", sh == 0.0, fmt(sh));
  return c.done();
}

Outcome criterion2() {
  const auto g = Grid::create(GridSpec::make(0.25, 32, 24, 3));
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> mi(0, 20), bi(-2, 2);
  const int pairs = 100;
  double worst = 0.0, worst_coeff = 0.0;
  bool coeff_ok = true;
  for (int t = 0; t < pairs; ++t) {
    const int b1 = bi(rng), m1 = mi(rng), b2 = bi(rng), m2 = mi(rng);
    const auto u = random_block(g, b1, m1, rng);
    const auto v = random_block(g, b2, m2, rng);
    const auto lhs = apply_resolvent_power(multiply(u, v), 1.0);
    const auto rhs = expansion_rhs({&u, &v});
    worst = std::max(worst, sobolev_norm(lhs - rhs, 0.0) / sobolev_norm(lhs, 0.0));
    const std::vector<DyadicIndex> idx = {*unimodal_index(u), *unimodal_index(v)};
    const double cap = 4.0 * static_cast<double>(std::max(idx[0].A, idx[1].A));
    for (const auto& term : nonzero_terms(expand_product_laplacian(idx))) {
      worst_coeff = std::max(worst_coeff, std::abs(term.coeff) / cap);
      coeff_ok = coeff_ok && std::abs(term.coeff) <= cap;
    }
  }
  Checks c;
  c.add("pairs", true, std::to_string(pairs));
  c.add("max_rel_residual", worst <= 1e-8, fmt(worst));
  c.add("max_coeff/(4max{A,B})", coeff_ok, fmt(worst_coeff));
  return c.done();
}

Outcome criterion3(const est::SweepReport& h) {
  const auto& e = h.extra["envelope"];
  const double growth = e["growth"].get<double>();
  Checks c;
  c.add("max_ratio_m<=64", true, fmt(e["max_ratio_m_le_64"].get<double>()));
  c.add("max_ratio_m<=1024", true, fmt(e["max_ratio_all"].get<double>()));
  c.add("growth", growth < 0.05, fmt(growth));
  return c.done();
}

Outcome criterion4(const est::SweepReport& h) {
  Checks c;
  for (const auto& b : h.extra["lp_decay"]["by_p"]) {
    const std::string p = b["p"].is_string() ? b["p"].get<std::string>() : fmt(b["p"].get<double>());
    const double band = b["band"].get<double>();
    c.add("band(p=" + p + ")", band <= 2.0, fmt(band));
  }
  return c.done();
}

Outcome criterion5() {
  Checks c;
  est::SweepConfig cfg;
  const auto bil = est::bilinear_hermite_sweep(cfg);
  const auto res = est::rescaled_bilinear_sweep(cfg);
  const auto tri = est::trilinear_sweep(cfg);
  const auto blk = est::block_estimate_sweep(cfg);
  for (const auto* r : {&bil, &res, &tri, &blk})
    c.add(r->name, verdict(*r), fmt(r->summary.top_max / r->summary.rest_max - 1.0));
  for (const auto* r : {&bil, &res, &tri}) {
    const double err = r->extra["gaussian_oracle"]["abs_error"].get<double>();
    c.add(r->name + "_gaussian", err <= 1e-10, fmt(err));
  }
  // Independent closed forms for m = n = 0.
  const double g1 = std::abs(est::rescaled_product_norm2({0, 0}, {1.0, 4.0}) - std::sqrt(pi / 17) / pi);
  const double g2 = std::abs(est::rescaled_product_norm2({0, 0, 0}, {1.0, 1.0, 1.0}) - 1 / (pi * std::sqrt(3.0)));
  c.add("closed_form_pair", g1 <= 1e-10, fmt(g1));
  c.add("closed_form_triple", g2 <= 1e-10, fmt(g2));
  return c.done();
}

Outcome criterion6() {
  Checks c;
  std::vector<cplx> psi;
  for (int n = 1; n <= 16; ++n) psi.push_back(std::polar(1.0 / n, 0.7 * n));
  const auto moments = flow::decoupling_moment_check(psi, flow::EnsembleConfig{11, 10000, 0});
  int passed = 0;
  for (const auto& m : moments.checks) passed += m.pass() ? 1 : 0;
  c.add("moment_checks_within_3sigma", passed == static_cast<int>(moments.checks.size()),
        std::to_string(passed) + "/" + std::to_string(moments.checks.size()));
  const auto tail = flow::decoupling_moment_check(psi, flow::EnsembleConfig{12, 100000, 0});
  c.add("tail_r2", tail.tail_fit.r2 > 0.9, fmt(tail.tail_fit.r2));
  c.add("tail_slope", true, fmt(tail.tail_fit.slope));
  return c.done();
}

Outcome criterion7() {
  const auto g = Grid::create(GridSpec::make(1.0, 8, 32, 1));
  const auto u = flow::rough_potential(1.2, 1.0, g);
  const auto r = flow::nonsmoothing_check(u, 1.2, 0.25, {8, 16, 32}, flow::EnsembleConfig{7, 100, 0});
  const auto& s = r.mean_smooth_sums;
  const double mean_tail = (s[2] - s[1]) / s[2];
  Checks c;
  c.add("increasing", r.increasing >= 99, std::to_string(r.increasing) + "/" + std::to_string(r.draws));
  c.add("H^1.2_tail(ensemble mean)", mean_tail < 0.05, fmt(mean_tail));
  c.add("per_draw_small_tail", true, std::to_string(r.small_tail) + "/" + std::to_string(r.draws));
  c.add("max_draw_tail", true, fmt(r.max_tail));
  return c.done();
}

Outcome criterion8() {
  est::SmoothingConfig cfg;
  const auto r = est::random_smoothing_sweep(cfg);
  const auto& ref = r.extra["refinement"];
  Checks c;
  for (const char* key : {"C_zz_rel_change", "C_zzz_rel_change", "median_rel_change"}) {
    const double v = ref[key].get<double>();
    c.add(key, v <= 0.10, fmt(v));
  }
  for (const char* level : {"m_max_64", "m_max_128"}) {
    const auto& e = r.extra[level];
    for (const char* sum : {"zz", "zzz"}) {
      const double ratio = e[sum]["ratio"].get<double>(), C = e[sum]["fitted_C"].get<double>();
      c.add(std::string(level) + "." + sum + " ratio<=C", ratio <= C * (1.0 + 1e-12), fmt(ratio) + "<=" + fmt(C));
    }
  }
  c.add("verdict", verdict(r), r.extra["verdict"].get<std::string>());
  return c.done();
}

/// Largest Picard residual ratio while the residual is above round-off.
double contraction_factor(const sol::SolverTrace& tr) {
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.contraction.size(); ++i)
    if (tr.residuals[i + 1] > 1e-13 * tr.residuals.front()) worst = std::max(worst, tr.contraction[i]);
  return worst;
}

Outcome criterion9() {
  Checks c;
  const auto g = Grid::create(sol::regression_grid());
  const auto u0 = sol::regression_data(g, 2.0);
  sol::SolverConfig cfg;
  cfg.T = 0.01;
  cfg.n_t = 33;
  cfg.picard_tol = 1e-12;
  const auto pic = sol::picard_solve(u0, cfg);
  const auto split = sol::splitstep_evolve(u0, cfg, 8);
  const double gap = sobolev_norm(split.u.back() - pic.u.back(), 0.0);
  c.add("picard_vs_split_L2", gap <= 1e-6, fmt(gap));
  c.add("mass_drift", pic.trace.mass_drift <= 1e-8, fmt(pic.trace.mass_drift));
  c.add("energy_drift", pic.trace.energy_drift <= 1e-6, fmt(pic.trace.energy_drift));
  c.add("sigma", pic.trace.sigma == -1, std::to_string(pic.trace.sigma));

  sol::SolverConfig at_cfg;
  const auto at = sol::calibrate_T(u0, at_cfg);
  at_cfg.T = at.T;
  at_cfg.n_t = sol::resolved_node_count(g->spec(), at.T);
  const auto at_run = sol::picard_solve(u0, at_cfg);
  const double q = contraction_factor(at_run.trace);
  c.add("T_auto", at_run.trace.converged, fmt(at.T));
  c.add("contraction_at_T_auto", q <= 0.5, fmt(q));

  const auto sg = Grid::create(GridSpec::make(1.0, 3, 16, 3));
  const auto r0 = cplx(40.0) * est::smoothing_field(sg, 1.5, 3.5);
  sol::SolverConfig rc;
  rc.mode = sol::Mode::randomized;
  rc.R = 2.0;
  rc.seed = 3;
  const auto rt = sol::calibrate_T(r0, rc);
  rc.T = rt.T;
  rc.n_t = sol::resolved_node_count(sg->spec(), rt.T);
  const auto rand_run = sol::picard_solve(r0, rc);
  c.add("randomized_converged", rand_run.trace.converged, fmt(rt.T));
  c.add("v_sup<=R||u0||", rand_run.trace.v_sup <= rand_run.trace.ball_radius,
        fmt(rand_run.trace.v_sup) + "<=" + fmt(rand_run.trace.ball_radius));
  return c.done();
}

int run_to_file(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string("\"") + GRUSHIN_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion10() {
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"hermite-table", "hermite-table --m-max 16"},
      {"lp-sweep", "lp-sweep --m 16,64,256"},
      {"verify", "verify --suite bilinear --m-max 64 --seed 5"},
      {"randomize", "randomize --samples 1000 --seed 9"},
      {"integrability", "integrability-sweep --samples 40 --seed 4"},
      {"evolve", "evolve --mode rand --seed 8 --split-steps 2"},
  };
  const fs::path dir = fs::current_path() / "acceptance_repro";
  fs::create_directories(dir);
  Checks c;
  for (const auto& [name, args] : commands) {
    const auto a = dir / (name + "_a.out"), b = dir / (name + "_b.out");
    const int ca = run_to_file(args, a), cb = run_to_file(args, b);
    const std::string ta = slurp(a), tb = slurp(b);
    const bool same = ca == cb && !ta.empty() && ta == tb;
    c.add(name, same, std::to_string(ta.size()) + " bytes, exit " + std::to_string(ca));
  }
  return c.done();
}

}  // namespace

int main() {
  std::cout << std::unitbuf;
  bool all = true;
  auto report = [&](int n, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    std::cout << "Criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  [" << fmt(secs) << " s] " << o.detail
              << '\n';
  };
  report(1, criterion1);
  report(2, criterion2);
  est::SweepConfig hc;
  hc.m_max = 1024;
  est::SweepReport hermite;
  try {
    hermite = est::hermite_sweep(hc);
  } catch (const std::exception& e) {
    std::cout << "hermite sweep failed: " << e.what() << '\n';
  }
  report(3, [&] { return criterion3(hermite); });
  report(4, [&] { return criterion4(hermite); });
  report(5, criterion5);
  report(6, criterion6);
  report(7, criterion7);
  report(8, criterion8);
  report(9, criterion9);
  report(10, criterion10);
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << '\n';
  return all ? 0 : 1;
}
