#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "grushin/flow_random.hpp"
#include "grushin/report.hpp"
#include "grushin/spectral.hpp"

namespace grushin::solver {

using report::json;
using spectral::cplx;
using spectral::GridPtr;
using spectral::SpectralField;

enum class Mode { deterministic, randomized };

/// Parameters of a local-in-time run of i d_t u - Delta_G u = |u|^2 u.
struct SolverConfig {
  double k = 1.5;     // regularity of the data (X^k_1 norm)
  double ell = 1.75;  // regularity of the remainder v (H^ell norm)
  double T = 0.01;    // final time; negative values run backwards
  int n_t = 33;       // time nodes including t = 0
  double picard_tol = 1e-10;
  int picard_max_iter = 60;
  double R = 1.0;     // event parameter, R >= 1
  Mode mode = Mode::deterministic;
  /// Replaces |u|^2 u by -|u|^2 u.
  bool defocusing = false;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument for inconsistent parameters. In randomized
  /// mode ell must lie in (3/2, k + 1/2).
  void validate() const;
  /// +1 for the focusing equation, -1 for the defocusing variant.
  double nonlinear_sign() const { return defocusing ? -1.0 : 1.0; }
  json to_json() const;
};

using Sequence = std::vector<SpectralField>;

/// Uniform nodes t_j = j T / (n_t - 1).
std::vector<double> time_nodes(const SolverConfig& cfg);

/// Weights w_j with sum_j w_j g(t_j) approximating the integral over [0, T]:
/// composite Simpson, with a 3/8 panel when the interval count is odd and
/// the trapezoid rule for a single interval.
std::vector<double> time_weights(int n_t, double T);

/// Free evolution e^{it Delta_G} u0 at the time nodes.
Sequence free_evolution(const SpectralField& u0, const SolverConfig& cfg);

/// Phi(v)(t) = -i s int_0^t e^{i(t-t')Delta_G} |z+v|^2 (z+v)(t') dt' at every
/// node, with s the nonlinear sign. The integrand is pulled back to t' = 0 by
/// the free flow, integrated cumulatively (Simpson pairs, a 3/8 panel for odd
/// counts, a three-point rule on the first interval) and pushed forward.
/// Throws std::invalid_argument when the sequences do not match the nodes or
/// do not share one grid.
Sequence duhamel_map(const Sequence& v, const Sequence& z, const SolverConfig& cfg);

/// sup over nodes of the H^s norm.
double sup_norm(const Sequence& v, double s);

/// Mass ||u||^2 in L^2.
double mass(const SpectralField& u);
/// E(u) = 1/2 <-Delta_G u, u> + sigma/4 ||u||^4_{L^4}.
double energy(const SpectralField& u, int sigma);

/// Grid of the standard regression scenario: eta_step 0.25, 16 lattice
/// frequencies per sign, m_max 16.
spectral::GridSpec regression_grid();
/// Single-band regression data: lattice frequencies q = 4..7 (band [1, 2))
/// carrying h_0 with coefficient 1 and h_1 with coefficient 0.5 + 0.3i,
/// scaled to the given L^2 norm. Requires q = 7 to lie on the grid.
SpectralField regression_data(const GridPtr& grid, double l2_norm);

/// Per-run diagnostics.
struct SolverTrace {
  std::vector<double> t;
  std::vector<double> mass;
  std::vector<double> energy;   // with the selected sigma
  std::vector<double> v_norm;   // ||v(t)||_{H^ell}
  std::vector<double> h32_norm; // ||u(t)||_{H^{3/2}}
  std::vector<double> residuals;    // sup_t ||v_{j+1} - v_j||_{H^ell}
  std::vector<double> contraction;  // residual ratios
  int sigma = 0;                    // 0 when the calibration was deferred
  std::string sigma_notice;
  double energy_drift_plus = 0.0;   // relative drift of the sigma = +1 candidate
  double energy_drift_minus = 0.0;  // relative drift of the sigma = -1 candidate
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  bool blowup_warning = false;
  int iterations = 0;
  bool converged = false;
  bool geometric = true;  // residual ratios <= 0.9 after the second iterate
  double ball_radius = 0.0;  // R ||u0||_{X^k_1}
  double v_sup = 0.0;        // ||v||_{L^infinity_T H^ell}
  /// Measured constants of the a priori estimates.
  double c_bound = 0.0;      // max ||Phi(v)|| / (T (||v||^3 + rho^3))
  double c_lipschitz = 0.0;  // max ||Phi(v2)-Phi(v1)|| / (T ||v2-v1|| (rho^2 + ||v1||^2 + ||v2||^2))
  std::string message;
};

json to_json(const SolverTrace& tr);

/// Sign selection for the quartic term: the candidate with the smaller
/// relative energy drift. Returns 0 with a notice when the quartic energy is
/// too small to tell the candidates apart.
int calibrate_sigma(const Sequence& u, double* drift_plus, double* drift_minus, std::string* notice);

/// Mass, energy, H^ell and H^{3/2} monitors. sigma = 0 calibrates on u. v may
/// be empty.
SolverTrace diagnostics(const Sequence& u, const Sequence& v, const SolverConfig& cfg, int sigma = 0);

/// Raised when the Picard residual ratio is at least 1 for three
/// consecutive iterations.
class NonContraction : public std::runtime_error {
 public:
  NonContraction(const std::string& what, double suggested_T) : std::runtime_error(what), suggested_T_(suggested_T) {}
  double suggested_T() const { return suggested_T_; }

 private:
  double suggested_T_;
};

struct PicardResult {
  Sequence u;  // z + v
  Sequence v;
  Sequence z;
  SolverTrace trace;
};

/// Free evolution of the data (randomised in randomized mode) plus the
/// Picard fixed point of the Duhamel map from v_0 = 0. When draw is null in
/// randomized mode the draw is generated from cfg.seed.
PicardResult picard_solve(const SpectralField& u0, const SolverConfig& cfg, const flow_random::Draw* draw = nullptr);

/// Smallest odd node count n >= min_nodes with |T| omega_max / (n - 1) <= max_phase_step,
/// where omega_max = (2 m_max + 1) eta_max is the fastest linear frequency.
int resolved_node_count(const spectral::GridSpec& spec, double T, int min_nodes = 33, double max_phase_step = 0.5);

/// Automatic time: T = 1 / (2 C (R ||u0||_{X^k_1})^2) with C the larger of the
/// two measured constants. C is re-measured at every proposed T and raised
/// until the run at T confirms it. Every run uses at least the resolved node
/// count for its T.
struct AutoTime {
  double T = 0.0;
  double C = 0.0;
  int rounds = 0;
  std::vector<double> history;  // C after every round
};
AutoTime calibrate_T(const SpectralField& u0, const SolverConfig& cfg, const flow_random::Draw* draw = nullptr,
                     double T_probe = 1e-3, int max_rounds = 12);

struct SplitStepResult {
  Sequence u;           // states at the time nodes
  std::vector<double> t;
  std::vector<double> mass;  // physical-sample mass at the nodes
  double max_step_mass_change = 0.0;  // relative, per step
  double max_phase = 0.0;    // largest nonlinear phase per step
  bool phase_warning = false;
  std::string warning;
};

/// Strang splitting with steps_per_interval steps between time nodes:
/// half nonlinear phase u e^{-i s dt |u|^2 / 2} at the physical samples, full
/// linear step on the spectral grid, half nonlinear phase. Physical content
/// outside the spectral grid is carried along unchanged by the linear step.
/// Warns when a nonlinear phase exceeds pi/4.
SplitStepResult splitstep_evolve(const SpectralField& u0, const SolverConfig& cfg, int steps_per_interval,
                                 bool nonlinear = true);

/// Convergence order by step halving: log2(|u_N - u_2N| / |u_2N - u_4N|) at t = T.
double splitstep_order(const SpectralField& u0, const SolverConfig& cfg, int steps_per_interval);

/// Relative residual sup_t ||i d_t u - Delta_G u - s P(|u|^2 u)|| / sup_t ||Delta_G u||
/// over interior nodes, with fourth-order central differences in time.
double nls_residual(const Sequence& u, const SolverConfig& cfg);

/// u_lambda(t, x, y) = lambda u(lambda^2 t, lambda x, lambda^2 y) on the grid
/// with eta_step scaled by lambda^2; the result is the ratio of the relative
/// residuals of u_lambda and u.
struct ScalingCheck {
  double lambda = 2.0;
  double residual = 0.0;
  double scaled_residual = 0.0;
  double ratio = 0.0;
};
ScalingCheck scaling_check(const Sequence& u, const SolverConfig& cfg, double lambda = 2.0);

/// One statistic defining the good event, with its bound.
struct EventStatistic {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool holds() const { return value <= bound; }
};

/// The four statistics of the good event for z = e^{it Delta_G} u0^omega:
/// ||z^2||_{L^1_T H^ell} + ||z|^2||_{L^1_T H^ell} <= T R^2 ||u0||^2,
/// |||z|^2 z||_{L^1_T H^ell} <= T R^3 ||u0||^3,
/// ||z v w||_{L^1_T H^ell} <= T R ||u0|| ||v|| ||w|| for a fixed probe v = w,
/// ||z||^2_{L^2_T L^infinity} <= T R^2 ||u0||^2,
/// with ||u0|| the X^k_1 norm. Products are projected onto the grid.
std::vector<EventStatistic> event_statistics(const Sequence& z, const SpectralField& u0, const SolverConfig& cfg);

}  // namespace grushin::solver
