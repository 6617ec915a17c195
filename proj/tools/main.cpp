#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grushin/estimates.hpp"
#include "grushin/flow_random.hpp"
#include "grushin/hermite.hpp"
#include "grushin/parallel.hpp"
#include "grushin/report.hpp"
#include "grushin/snapshot.hpp"
#include "grushin/solver.hpp"
#include "grushin/spectral.hpp"

namespace {

using grushin::report::json;
using grushin::report::format_double;
namespace spectral = grushin::spectral;
namespace flow = grushin::flow_random;
namespace est = grushin::estimates;
namespace solver = grushin::solver;
namespace report = grushin::report;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_fail = 2;

// Raised for invalid combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numbers stay numbers in the serialized run configuration.
json scalar_from_string(const std::string& s) {
  if (s.empty()) return nullptr;
  if (s == "true") return true;
  if (s == "false") return false;
  std::uint64_t u = 0;
  auto [pu, eu] = std::from_chars(s.data(), s.data() + s.size(), u);
  if (eu == std::errc() && pu == s.data() + s.size()) return u;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ed == std::errc() && pd == s.data() + s.size()) return d;
  return s;
}

// Every option of the subcommand with its effective value. The worker count
// is excluded because it never changes results.
json run_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "workers" || name == "config" || name.empty()) continue;
    if (opt->get_type_size() == 0) {
      cfg[name] = opt->count() > 0 ? opt->as<bool>() : false;
    } else if (opt->count() > 0) {
      cfg[name] = scalar_from_string(opt->results().back());
    } else {
      cfg[name] = scalar_from_string(opt->get_default_str());
    }
  }
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file " + path);
  out << text;
  if (!out) throw UsageError("failed writing " + path);
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// CSV files carry the run header as a single leading comment line.
std::string csv_text(const json& header, const std::string& body) { return "# " + header.dump() + "\r\n" + body; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  if (s == "inf" || s == "infinity") return grushin::hermite::infinity;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("invalid value '" + s + "' in " + what);
  return v;
}

std::vector<double> parse_reals(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_real(item, what));
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

std::string format_p(double p) { return std::isinf(p) ? std::string("inf") : format_double(p); }

json grid_json(const spectral::GridSpec& s) {
  return {{"eta_step", s.eta_step}, {"eta_count", s.eta_count}, {"m_max", s.m_max},
          {"x_range", s.x_range},   {"x_count", s.x_count},     {"dealias_factor", s.dealias_factor}};
}

struct GridOptions {
  double eta_step = 0.25;
  int eta_count = 16;
  int m_max = 16;
};

void add_grid_options(CLI::App* sub, GridOptions& g, const char* role) {
  sub->add_option("--eta-step", g.eta_step, std::string("Lattice spacing in eta for ") + role)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--eta-count", g.eta_count, "Lattice frequencies per sign of eta")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--grid-m-max", g.m_max, "Largest Hermite index on the grid")->capture_default_str()->check(CLI::NonNegativeNumber);
}

spectral::GridPtr make_grid(const GridOptions& g, int product_order) {
  return spectral::Grid::create(spectral::GridSpec::make(g.eta_step, g.eta_count, g.m_max, product_order));
}

// Built-in initial data. 'amplitude' is the L^2 norm of the result.
struct FieldOptions {
  std::string kind = "band";
  std::string input;
  double amplitude = 1.0;
  double k = 1.2;
  double rho = 1.0;
  double decay = 3.5;
};

void add_field_options(CLI::App* sub, FieldOptions& f, const std::vector<std::string>& kinds) {
  sub->add_option("--data", f.kind, "Built-in data when no --input is given")
      ->capture_default_str()
      ->check(CLI::IsMember(kinds));
  sub->add_option("--input", f.input, "Initial data from a GRSF1 snapshot (overrides the grid flags)");
  sub->add_option("--amplitude", f.amplitude, "L^2 norm of the built-in data")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--data-k", f.k, "Regularity k of the rough and smooth data")->capture_default_str();
  sub->add_option("--data-rho", f.rho, "Partial y regularity rho of the rough data")->capture_default_str();
  sub->add_option("--decay", f.decay, "Block decay exponent of the smooth data")->capture_default_str();
}

spectral::SpectralField make_field(const FieldOptions& f, const GridOptions& g, int product_order) {
  if (!f.input.empty()) return spectral::read_snapshot(f.input);
  const auto grid = make_grid(g, product_order);
  spectral::SpectralField u(grid);
  if (f.kind == "zero") return u;
  if (f.kind == "band") return solver::regression_data(grid, f.amplitude);
  if (f.kind == "rough")
    u = flow::rough_potential(f.k, f.rho, grid);
  else
    u = est::smoothing_field(grid, f.k, f.decay);
  const double n = spectral::sobolev_norm(u, 0.0);
  if (n > 0.0) u *= f.amplitude / n;
  return u;
}

json field_json(const spectral::SpectralField& u, const FieldOptions& f, double k) {
  return {{"source", f.input.empty() ? f.kind : std::string("snapshot")},
          {"grid", grid_json(u.grid()->spec())},
          {"l2_norm", spectral::sobolev_norm(u, 0.0)},
          {"x_norm_k_1", spectral::x_norm(u, k, 1.0)}};
}

// ---------------------------------------------------------------- hermite-table

struct HermiteTableOptions {
  int m_max = 8;
  double x_range = 0.0;
  int x_count = 0;
  std::string out = "-";
};

int run_hermite_table(const CLI::App* sub, const HermiteTableOptions& o) {
  grushin::hermite::XGrid xg = grushin::hermite::XGrid::for_modes(o.m_max);
  if (o.x_range > 0.0) xg.x_range = o.x_range;
  if (o.x_count > 0) xg.x_count = o.x_count;
  const json header = report::run_header("hermite-table", run_config(sub), 0);
  std::ostringstream body;
  body << "m,x,value\r\n";
  std::vector<double> vals(static_cast<std::size_t>(o.m_max) + 1);
  const auto nodes = xg.nodes();
  std::vector<std::vector<double>> table(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    grushin::hermite::eval_all(o.m_max, nodes[j], vals.data());
    table[j] = vals;
  }
  for (int m = 0; m <= o.m_max; ++m)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      body << m << ',' << format_double(nodes[j]) << ',' << format_double(table[j][static_cast<std::size_t>(m)]) << "\r\n";
  emit(o.out, csv_text(header, body.str()));
  return exit_ok;
}

// ---------------------------------------------------------------- lp-sweep

struct LpSweepOptions {
  std::string ms = "16,32,64,128,256,512,1024";
  std::string ps = "2,3,4,6,8,inf";
  std::string out = "-";
};

int run_lp_sweep(const CLI::App* sub, const LpSweepOptions& o) {
  std::vector<int> ms;
  for (double m : parse_reals(o.ms, "--m")) {
    if (m < 0 || m != std::floor(m)) throw UsageError("--m expects non-negative integers");
    ms.push_back(static_cast<int>(m));
  }
  const auto ps = parse_reals(o.ps, "--p");
  for (double p : ps)
    if (!(p >= 1.0)) throw UsageError("--p expects exponents p >= 1");
  const auto rows = grushin::hermite::lp_sweep(ms, ps);
  std::ostringstream body;
  body << "m,p,norm,scaled_norm\r\n";
  for (const auto& r : rows)
    body << r.m << ',' << format_p(r.p) << ',' << format_double(r.norm) << ',' << format_double(r.scaled) << "\r\n";
  emit(o.out, csv_text(report::run_header("lp-sweep", run_config(sub), 0), body.str()));
  return exit_ok;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  std::string suite = "all";
  int m_max = 0;
  int samples = 0;
  std::uint64_t seed = 1;
  double tolerance = 0.10;
  std::string out = "-";
  std::string format = "auto";
};

std::vector<report::SweepReport> run_suite(const std::string& suite, const VerifyOptions& o, int workers) {
  est::SweepConfig cfg;
  if (o.m_max > 0) cfg.m_max = o.m_max;
  if (o.samples > 0) cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.workers = workers;
  cfg.tolerance = o.tolerance;
  if (suite == "hermite") {
    est::SweepConfig h = cfg;
    if (o.m_max == 0) h.m_max = 1024;
    return {est::hermite_sweep(h)};
  }
  if (suite == "bilinear") return {est::bilinear_hermite_sweep(cfg), est::rescaled_bilinear_sweep(cfg)};
  if (suite == "trilinear") return {est::trilinear_sweep(cfg)};
  if (suite == "block") return {est::block_estimate_sweep(cfg), est::derivative_split_sweep(cfg)};
  if (suite == "embedding") return {est::embedding_sweep(cfg)};
  est::SmoothingConfig s;
  if (o.m_max > 0) s.m_max = o.m_max;
  if (o.samples > 0) s.samples = o.samples;
  s.seed = o.seed;
  s.workers = workers;
  return {est::random_smoothing_sweep(s, o.tolerance)};
}

int run_verify(const CLI::App* sub, const VerifyOptions& o, int workers) {
  std::string format = o.format;
  if (format == "auto") format = o.out.size() >= 4 && o.out.substr(o.out.size() - 4) == ".csv" ? "csv" : "json";
  const std::vector<std::string> suites =
      o.suite == "all" ? std::vector<std::string>{"hermite", "bilinear", "trilinear", "block", "smoothing", "embedding"}
                       : std::vector<std::string>{o.suite};
  std::vector<report::SweepReport> reports;
  for (const auto& s : suites) {
    auto part = run_suite(s, o, workers);
    for (auto& r : part) {
      r.config["suite"] = s;
      reports.push_back(std::move(r));
    }
  }
  bool pass = true;
  for (const auto& r : reports) pass = pass && report::verdict(r);
  const json header = report::run_header("verify", run_config(sub), o.seed);
  if (format == "csv") {
    std::string body;
    for (const auto& r : reports) {
      json section = {{"report", r.name}, {"suite", r.config["suite"]}, {"verdict", report::verdict(r) ? "PASS" : "FAIL"}};
      body += "# " + section.dump() + "\r\n" + report::to_csv(r);
    }
    emit(o.out, csv_text(header, body));
  } else {
    json doc = {{"header", header}, {"kind", "verify"}, {"verdict", pass ? "PASS" : "FAIL"}, {"reports", json::array()}};
    for (const auto& r : reports) doc["reports"].push_back(report::to_json(r));
    emit(o.out, json_text(doc));
  }
  for (const auto& r : reports)
    std::cerr << (report::verdict(r) ? "PASS " : "FAIL ") << r.name << '\n';
  return pass ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------- randomize

struct RandomizeOptions {
  GridOptions grid;
  FieldOptions field;
  std::uint64_t seed = 1;
  int samples = 1000;
  int sample = 0;
  std::string levels = "0.5,0.9,0.99";
  std::string snapshot;
  std::string out = "-";
};

// Quantile level q needs at least 10 / (1 - q) samples.
void check_levels(const std::vector<double>& levels, int samples) {
  for (double q : levels) {
    if (!(q > 0.0 && q < 1.0)) throw UsageError("quantile levels must lie in (0, 1)");
    const double needed = std::ceil(10.0 / (1.0 - q) - 1e-9);
    if (samples < needed)
      throw UsageError("quantile level " + format_double(q) + " needs at least " + format_double(needed) + " samples");
  }
}

int run_randomize(const CLI::App* sub, const RandomizeOptions& o, int workers) {
  const auto levels = parse_reals(o.levels, "--levels");
  check_levels(levels, o.samples);
  const spectral::SpectralField u0 = make_field(o.field, o.grid, 3);
  const auto& spec = u0.grid()->spec();
  const double m0 = spectral::sobolev_norm(u0, 0.0);
  if (!(m0 > 0.0)) throw UsageError("randomize needs nonzero data");
  const auto ratios = grushin::parallel_map(static_cast<std::size_t>(o.samples), workers, [&](std::size_t s) {
    const auto draw = flow::Draw::generate(o.seed, s, spec);
    const double n = spectral::sobolev_norm(flow::randomize(u0, draw), 0.0);
    return n * n / (m0 * m0);
  });
  double mean = 0.0, var = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= std::max<double>(1.0, static_cast<double>(ratios.size()) - 1.0);

  flow::EnsembleReport rep;
  rep.config = run_config(sub);
  rep.statistic = "||u0^omega||^2_L2 / ||u0||^2_L2";
  for (double q : levels) rep.quantiles.push_back({q, flow::quantile(ratios, q)});
  rep.tail_fit = flow::fit_gaussian_tail(ratios);
  flow::MomentCheck mc;
  mc.name = "mean mass ratio equals E|X|^2";
  mc.estimate = mean;
  mc.expected = flow::gaussian_second_moment;
  mc.std_error = std::sqrt(var / static_cast<double>(ratios.size()));
  rep.checks.push_back(mc);
  rep.constants = {{"E|X|^2", flow::gaussian_second_moment}, {"mean", mean}, {"std_error", mc.std_error}};
  rep.pass = mc.pass();

  json doc = {{"header", report::run_header("randomize", rep.config, o.seed)},
              {"kind", "randomize"},
              {"data", field_json(u0, o.field, o.field.k)},
              {"report", flow::to_json(rep)}};
  if (!o.snapshot.empty()) {
    const auto draw = flow::Draw::generate(o.seed, static_cast<std::uint64_t>(o.sample), spec);
    spectral::write_snapshot(o.snapshot, flow::randomize(u0, draw));
    doc["snapshot"] = {{"path", o.snapshot}, {"sample", o.sample}};
  }
  emit(o.out, json_text(doc));
  return rep.pass ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------- integrability-sweep

struct IntegrabilityOptions {
  GridOptions grid{1.0, 3, 16};
  FieldOptions field;
  double k = 1.5;
  double p = 4.0;
  double q = 2.0;
  double T = 0.1;
  int n_t = 33;
  int samples = 200;
  std::uint64_t seed = 1;
  std::string out = "-";
};

int run_integrability(const CLI::App* sub, const IntegrabilityOptions& o, int workers) {
  if (!(o.p >= 2.0) || std::isinf(o.p) || !(o.q >= 2.0) || std::isinf(o.q))
    throw UsageError("--p and --q must lie in [2, inf)");
  if (o.n_t < 16) throw UsageError("--nt must be at least 16");
  const spectral::SpectralField u0 = make_field(o.field, o.grid, 3);
  flow::EnsembleConfig ec;
  ec.master_seed = o.seed;
  ec.n_samples = o.samples;
  ec.workers = workers;
  auto rep = flow::integrability_sweep(u0, o.k, o.p, o.q, o.T, ec, o.n_t);
  const json cfg = run_config(sub);
  json doc = {{"header", report::run_header("integrability-sweep", cfg, o.seed)},
              {"kind", "integrability"},
              {"data", field_json(u0, o.field, o.k)},
              {"report", flow::to_json(rep)}};
  emit(o.out, json_text(doc));
  return rep.pass ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------- evolve

struct EvolveOptions {
  GridOptions grid;
  FieldOptions field;
  double k = 1.5;
  double ell = 1.75;
  double T = 0.01;
  bool auto_T = false;
  double R = 1.0;
  int n_t = 33;
  double tol = 1e-10;
  int max_iter = 60;
  std::string mode = "det";
  bool defocusing = false;
  std::uint64_t seed = 1;
  int snapshot_every = 0;
  std::string snapshot_prefix = "snapshot";
  int split_steps = 0;
  std::string out = "-";
};

std::string snapshot_path(const std::string& prefix, int node) {
  std::ostringstream s;
  s << prefix << '_' << std::setw(4) << std::setfill('0') << node << ".grsf";
  return s.str();
}

int run_evolve(const CLI::App* sub, const EvolveOptions& o) {
  const spectral::SpectralField u0 = make_field(o.field, o.grid, 3);
  solver::SolverConfig cfg;
  cfg.k = o.k;
  cfg.ell = o.ell;
  cfg.T = o.T;
  cfg.n_t = o.n_t;
  cfg.picard_tol = o.tol;
  cfg.picard_max_iter = o.max_iter;
  cfg.R = o.R;
  cfg.mode = o.mode == "rand" ? solver::Mode::randomized : solver::Mode::deterministic;
  cfg.defocusing = o.defocusing;
  cfg.seed = o.seed;
  cfg.validate();

  const json run_cfg = run_config(sub);
  json doc = {{"header", report::run_header("evolve", run_cfg, o.seed)},
              {"kind", "evolve"},
              {"data", field_json(u0, o.field, o.k)}};
  flow::Draw draw;
  const flow::Draw* draw_ptr = nullptr;
  if (cfg.mode == solver::Mode::randomized) {
    draw = flow::Draw::generate(cfg.seed, 0, u0.grid()->spec());
    draw_ptr = &draw;
  }
  solver::PicardResult res;
  try {
    if (o.auto_T) {
      if (u0.is_zero()) {
        doc["auto_T"] = {{"notice", "zero data: automatic time skipped, --T used"}};
      } else {
        const auto at = solver::calibrate_T(u0, cfg, draw_ptr);
        cfg.T = at.T;
        doc["auto_T"] = {{"T", at.T}, {"C", at.C}, {"rounds", at.rounds}, {"C_history", at.history}};
      }
      cfg.n_t = solver::resolved_node_count(u0.grid()->spec(), cfg.T, o.n_t);
    }
    doc["solver"] = cfg.to_json();
    res = solver::picard_solve(u0, cfg, draw_ptr);
  } catch (const solver::NonContraction& e) {
    doc["solver"] = cfg.to_json();
    doc["status"] = "non_contraction";
    doc["message"] = e.what();
    doc["suggested_T"] = e.suggested_T();
    emit(o.out, json_text(doc));
    std::cerr << "FAIL evolve: " << e.what() << '\n';
    return exit_fail;
  }
  const bool accepted = res.trace.converged;
  doc["status"] = accepted ? "accepted" : "not_converged";
  doc["trace"] = solver::to_json(res.trace);
  if (cfg.mode == solver::Mode::randomized) {
    json ev = json::array();
    for (const auto& s : solver::event_statistics(res.z, u0, cfg))
      ev.push_back({{"name", s.name}, {"value", s.value}, {"bound", s.bound}, {"holds", s.holds()}});
    doc["event_statistics"] = ev;
  }
  if (o.split_steps > 0) {
    const spectral::SpectralField start = draw_ptr ? flow::randomize(u0, draw) : u0;
    const auto ss = solver::splitstep_evolve(start, cfg, o.split_steps);
    doc["cross_check"] = {{"steps_per_interval", o.split_steps},
                          {"l2_discrepancy", spectral::sobolev_norm(ss.u.back() - res.u.back(), 0.0)},
                          {"max_step_mass_change", ss.max_step_mass_change},
                          {"max_phase", ss.max_phase},
                          {"warning", ss.warning}};
  }
  if (o.snapshot_every > 0) {
    json paths = json::array();
    for (std::size_t j = 0; j < res.u.size(); j += static_cast<std::size_t>(o.snapshot_every)) {
      const std::string path = snapshot_path(o.snapshot_prefix, static_cast<int>(j));
      spectral::write_snapshot(path, res.u[j]);
      paths.push_back({{"node", j}, {"t", res.trace.t[j]}, {"path", path}});
    }
    doc["snapshots"] = paths;
  }
  emit(o.out, json_text(doc));
  if (!accepted) std::cerr << "FAIL evolve: " << res.trace.message << '\n';
  return accepted ? exit_ok : exit_fail;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::string in;
  std::string format = "summary";
  std::string out = "-";
};

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + " is not valid JSON: " + e.what());
  }
}

std::string trace_csv(const json& trace) {
  std::ostringstream out;
  out << "t,mass,energy,v_norm,h32_norm\r\n";
  const auto& t = trace.at("t");
  for (std::size_t j = 0; j < t.size(); ++j) {
    out << format_double(t[j].get<double>());
    for (const char* key : {"mass", "energy", "v_norm", "h32_norm"}) {
      const auto& col = trace.at(key);
      out << ',' << (j < col.size() ? format_double(col[j].get<double>()) : std::string());
    }
    out << "\r\n";
  }
  return out.str();
}

int run_report(const ReportOptions& o) {
  const json doc = read_json_file(o.in);
  if (!doc.contains("kind") || !doc.contains("header")) throw UsageError(o.in + " is not a grushin report");
  const std::string kind = doc.at("kind").get<std::string>();
  const json& header = doc.at("header");
  bool pass = true;
  std::ostringstream text;
  if (kind == "verify") {
    std::vector<report::SweepReport> reps;
    for (const auto& r : doc.at("reports")) reps.push_back(report::from_json(r));
    for (const auto& r : reps) pass = pass && report::verdict(r);
    if (o.format == "csv") {
      for (const auto& r : reps) {
        json section = {{"report", r.name}, {"verdict", report::verdict(r) ? "PASS" : "FAIL"}};
        text << "# " << section.dump() << "\r\n" << report::to_csv(r);
      }
      emit(o.out, csv_text(header, text.str()));
    } else if (o.format == "json") {
      json outdoc = {{"header", header}, {"kind", "verify"}, {"verdict", pass ? "PASS" : "FAIL"}, {"reports", json::array()}};
      for (const auto& r : reps) outdoc["reports"].push_back(report::to_json(r));
      emit(o.out, json_text(outdoc));
    } else {
      for (const auto& r : reps)
        text << (report::verdict(r) ? "PASS " : "FAIL ") << r.name << " rows=" << r.rows.size()
             << " scales=" << r.summary.scales << " max_ratio=" << format_double(r.summary.max_ratio) << '\n';
      text << "overall " << (pass ? "PASS" : "FAIL") << '\n';
      emit(o.out, text.str());
    }
  } else if (kind == "evolve") {
    const std::string status = doc.at("status").get<std::string>();
    pass = status == "accepted";
    if (o.format == "csv") {
      if (!doc.contains("trace")) throw UsageError("the run has no trace: " + status);
      emit(o.out, csv_text(header, trace_csv(doc.at("trace"))));
    } else if (o.format == "json") {
      emit(o.out, json_text(doc));
    } else {
      text << "status " << status << '\n';
      if (doc.contains("trace")) {
        const auto& tr = doc.at("trace");
        text << "iterations " << tr.at("iterations").get<int>() << '\n';
        text << "mass_drift " << format_double(tr.at("mass_drift").get<double>()) << '\n';
        text << "energy_drift " << format_double(tr.at("energy_drift").get<double>()) << '\n';
        text << "sigma " << tr.at("sigma").get<int>() << '\n';
        text << "v_sup " << format_double(tr.at("v_sup").get<double>()) << " ball_radius "
             << format_double(tr.at("ball_radius").get<double>()) << '\n';
      }
      if (doc.contains("suggested_T")) text << "suggested_T " << format_double(doc.at("suggested_T").get<double>()) << '\n';
      emit(o.out, text.str());
    }
  } else if (kind == "randomize" || kind == "integrability") {
    const json& rep = doc.at("report");
    pass = !rep.contains("pass") || rep.at("pass").get<bool>();
    if (o.format == "csv") {
      text << "level,value\r\n";
      for (const auto& q : rep.at("quantiles"))
        text << format_double(q.at("level").get<double>()) << ',' << format_double(q.at("value").get<double>()) << "\r\n";
      emit(o.out, csv_text(header, text.str()));
    } else if (o.format == "json") {
      emit(o.out, json_text(doc));
    } else {
      text << (pass ? "PASS " : "FAIL ") << rep.at("statistic").get<std::string>() << '\n';
      for (const auto& q : rep.at("quantiles"))
        text << "q" << format_double(q.at("level").get<double>()) << ' ' << format_double(q.at("value").get<double>()) << '\n';
      emit(o.out, text.str());
    }
  } else {
    throw UsageError("unknown report kind " + kind);
  }
  return pass ? exit_ok : exit_fail;
}

// Expands '--config FILE' into leading --key=value arguments so that flags
// given on the command line take precedence over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  std::size_t insert_at = std::string::npos;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
      auto trim = [](std::string s) {
        const auto s0 = s.find_first_not_of(" \t");
        const auto s1 = s.find_last_not_of(" \t");
        return s0 == std::string::npos ? std::string() : s.substr(s0, s1 - s0 + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
      from_file.push_back("--" + key + "=" + value);
    }
    insert_at = 1;
  }
  if (insert_at != std::string::npos && out.size() >= insert_at) {
    // The subcommand is the first argument that is not a global option.
    std::size_t pos = 0;
    while (pos < out.size() && out[pos].rfind("--", 0) == 0) {
      if (out[pos] == "--workers") ++pos;
      ++pos;
    }
    if (pos >= out.size()) throw UsageError("--config needs a subcommand");
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos) + 1, from_file.begin(), from_file.end());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier-Hermite toolkit for the Grushin operator: tables, estimate suites, ensembles and the cubic solver.",
               "grushin"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(GRUSHIN_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads (0 = available parallelism)")->capture_default_str()->check(CLI::NonNegativeNumber);
  const std::string config_help = "Read key=value defaults from a file; command-line flags take precedence";

  HermiteTableOptions ht;
  auto* c_ht = app.add_subcommand("hermite-table", "CSV table of h_m(x): columns m, x, value");
  c_ht->add_option("--m-max", ht.m_max, "Largest Hermite index")->capture_default_str()->check(CLI::NonNegativeNumber);
  c_ht->add_option("--x-range", ht.x_range, "Half-width of the x interval (0 = covers every mode)")->capture_default_str();
  c_ht->add_option("--x-count", ht.x_count, "Number of x nodes (0 = automatic)")->capture_default_str();
  c_ht->add_option("--out", ht.out, "Output file ('-' = stdout)")->capture_default_str();
  c_ht->add_option("--config", config_help)->type_name("FILE");

  LpSweepOptions lp;
  auto* c_lp = app.add_subcommand("lp-sweep", "CSV of ||h_m||_{L^p} and its scaled value: columns m, p, norm, scaled_norm");
  c_lp->add_option("--m", lp.ms, "Comma-separated Hermite indices")->capture_default_str();
  c_lp->add_option("--p", lp.ps, "Comma-separated exponents ('inf' allowed)")->capture_default_str();
  c_lp->add_option("--out", lp.out, "Output file ('-' = stdout)")->capture_default_str();
  c_lp->add_option("--config", config_help)->type_name("FILE");

  VerifyOptions vf;
  auto* c_vf = app.add_subcommand("verify", "Run estimate suites; exit 0 when every verdict passes, 2 otherwise");
  c_vf->add_option("--suite", vf.suite, "Suite to run")
      ->capture_default_str()
      ->check(CLI::IsMember({"hermite", "bilinear", "trilinear", "block", "smoothing", "embedding", "all"}));
  c_vf->add_option("--m-max", vf.m_max, "Largest Hermite index (0 = suite default)")->capture_default_str()->check(CLI::NonNegativeNumber);
  c_vf->add_option("--samples", vf.samples, "Random samples (0 = suite default)")->capture_default_str()->check(CLI::NonNegativeNumber);
  c_vf->add_option("--seed", vf.seed, "Master seed")->capture_default_str();
  c_vf->add_option("--tolerance", vf.tolerance, "Allowed top-scale growth in the dyadic verdict")->capture_default_str();
  c_vf->add_option("--out", vf.out, "Report file ('-' = stdout)")->capture_default_str();
  c_vf->add_option("--format", vf.format, "Report format (auto = from the file extension)")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "json", "csv"}));
  c_vf->add_option("--config", config_help)->type_name("FILE");

  RandomizeOptions rz;
  rz.field.kind = "rough";
  auto* c_rz = app.add_subcommand("randomize", "Randomize initial data and report ensemble statistics of the L^2 mass");
  add_grid_options(c_rz, rz.grid, "the data");
  add_field_options(c_rz, rz.field, {"rough", "smooth", "band"});
  c_rz->add_option("--seed", rz.seed, "Master seed")->capture_default_str();
  c_rz->add_option("--samples", rz.samples, "Ensemble size")->capture_default_str()->check(CLI::PositiveNumber);
  c_rz->add_option("--sample", rz.sample, "Sample index written by --snapshot")->capture_default_str()->check(CLI::NonNegativeNumber);
  c_rz->add_option("--levels", rz.levels, "Comma-separated quantile levels")->capture_default_str();
  c_rz->add_option("--snapshot", rz.snapshot, "Write the randomized field of --sample as a GRSF1 snapshot");
  c_rz->add_option("--out", rz.out, "Report file ('-' = stdout)")->capture_default_str();
  c_rz->add_option("--config", config_help)->type_name("FILE");

  IntegrabilityOptions ig;
  ig.field.kind = "smooth";
  ig.field.k = 1.5;
  auto* c_ig = app.add_subcommand("integrability-sweep", "Deterministic and ensemble L^q_T W^{k+zeta(p),p} integrability checks");
  add_grid_options(c_ig, ig.grid, "the data");
  add_field_options(c_ig, ig.field, {"rough", "smooth", "band"});
  c_ig->add_option("--k", ig.k, "Sobolev regularity k")->capture_default_str();
  c_ig->add_option("--p", ig.p, "Space exponent p in [2, inf)")->capture_default_str();
  c_ig->add_option("--q", ig.q, "Time exponent q in [2, inf)")->capture_default_str();
  c_ig->add_option("--T", ig.T, "Time horizon")->capture_default_str()->check(CLI::PositiveNumber);
  c_ig->add_option("--nt", ig.n_t, "Time nodes (at least 16)")->capture_default_str();
  c_ig->add_option("--samples", ig.samples, "Ensemble size")->capture_default_str()->check(CLI::PositiveNumber);
  c_ig->add_option("--seed", ig.seed, "Master seed")->capture_default_str();
  c_ig->add_option("--out", ig.out, "Report file ('-' = stdout)")->capture_default_str();
  c_ig->add_option("--config", config_help)->type_name("FILE");

  EvolveOptions ev;
  ev.field.amplitude = 2.0;
  ev.field.k = 1.5;
  auto* c_ev = app.add_subcommand("evolve", "Solve i u_t - Delta_G u = |u|^2 u by Picard iteration of the Duhamel map");
  add_grid_options(c_ev, ev.grid, "the data");
  add_field_options(c_ev, ev.field, {"band", "smooth", "rough", "zero"});
  c_ev->add_option("--k", ev.k, "Regularity k of the X^k_1 data norm")->capture_default_str();
  c_ev->add_option("--ell", ev.ell, "Regularity ell of the remainder")->capture_default_str();
  c_ev->add_option("--T", ev.T, "Final time (negative runs backwards)")->capture_default_str();
  c_ev->add_flag("--auto-T", ev.auto_T, "Choose T from the measured contraction constant");
  c_ev->add_option("--R", ev.R, "Event parameter R >= 1")->capture_default_str();
  c_ev->add_option("--nt", ev.n_t, "Time nodes including t = 0")->capture_default_str();
  c_ev->add_option("--tol", ev.tol, "Picard tolerance on sup_t ||v_{j+1} - v_j||_{H^ell}")->capture_default_str();
  c_ev->add_option("--max-iter", ev.max_iter, "Picard iteration limit")->capture_default_str();
  c_ev->add_option("--mode", ev.mode, "Deterministic or randomized data")->capture_default_str()->check(CLI::IsMember({"det", "rand"}));
  c_ev->add_flag("--defocusing", ev.defocusing, "Use the defocusing nonlinearity -|u|^2 u");
  c_ev->add_option("--seed", ev.seed, "Master seed of the randomization")->capture_default_str();
  c_ev->add_option("--snapshot-every", ev.snapshot_every, "Write u every N time nodes (0 = never)")->capture_default_str()->check(CLI::NonNegativeNumber);
  c_ev->add_option("--snapshot-prefix", ev.snapshot_prefix, "Snapshot path prefix")->capture_default_str();
  c_ev->add_option("--split-steps", ev.split_steps, "Cross-check with split-step using N steps per interval (0 = off)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c_ev->add_option("--out", ev.out, "Trace file ('-' = stdout)")->capture_default_str();
  c_ev->add_option("--config", config_help)->type_name("FILE");

  ReportOptions rp;
  auto* c_rp = app.add_subcommand("report", "Summarize or convert a saved JSON report");
  c_rp->add_option("--in", rp.in, "JSON report written by another subcommand")->required();
  c_rp->add_option("--format", rp.format, "Output format")->capture_default_str()->check(CLI::IsMember({"summary", "csv", "json"}));
  c_rp->add_option("--out", rp.out, "Output file ('-' = stdout)")->capture_default_str();
  c_rp->add_option("--config", config_help)->type_name("FILE");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    args = expand_config(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (c_ht->parsed()) return run_hermite_table(c_ht, ht);
    if (c_lp->parsed()) return run_lp_sweep(c_lp, lp);
    if (c_vf->parsed()) return run_verify(c_vf, vf, workers);
    if (c_rz->parsed()) return run_randomize(c_rz, rz, workers);
    if (c_ig->parsed()) return run_integrability(c_ig, ig, workers);
    if (c_ev->parsed()) return run_evolve(c_ev, ev);
    if (c_rp->parsed()) return run_report(rp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
