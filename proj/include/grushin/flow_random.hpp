#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "grushin/report.hpp"
#include "grushin/spectral.hpp"

namespace grushin::flow_random {

using spectral::cplx;
using spectral::GridPtr;
using spectral::GridSpec;
using spectral::SpectralField;

/// Free Grushin-Schrodinger flow: multiplies mode (m, eta_q) by exp(i t (2m+1)|eta_q|).
SpectralField linear_propagate(const SpectralField& f, double t);

/// E|X|^2 for the complex Gaussian X = g + i h with g, h independent N(0, 1).
inline constexpr double gaussian_second_moment = 2.0;

struct EnsembleConfig {
  std::uint64_t master_seed = 1;
  int n_samples = 1000;
  /// Worker threads for ensemble members; 0 selects the hardware count.
  int workers = 0;
};

/// Random engine for one (sample, channel) pair. The seed depends only on
/// (master_seed, sample, channel), so streams never overlap between samples
/// and reruns reproduce them exactly.
std::mt19937_64 sample_stream(std::uint64_t master_seed, std::uint64_t sample, std::int64_t channel);

/// Draws X = g + i h from an engine (two standard normals, real part first).
cplx complex_gaussian(std::mt19937_64& engine);

/// Table of scalars X_{I,m} indexed by band exponent j (I = 2^j) and mode m.
class Draw {
 public:
  Draw() = default;
  Draw(int band_min, int band_max, int m_max, cplx fill = cplx(0.0));

  /// One Gaussian per (band, mode). Band j uses its own stream and draws
  /// m = 0, 1, ... in order, so enlarging the grid keeps existing entries.
  static Draw generate(std::uint64_t master_seed, std::uint64_t sample, const GridSpec& spec);
  /// The table with every entry equal to value.
  static Draw constant(const GridSpec& spec, cplx value);

  int band_min() const { return band_min_; }
  int band_max() const { return band_max_; }
  int m_max() const { return m_max_; }
  bool covers(const GridSpec& spec) const;

  /// Throws std::out_of_range outside the table.
  cplx at(int band_exp, int m) const;
  cplx& at(int band_exp, int m);
  const std::vector<cplx>& values() const { return values_; }

 private:
  std::size_t index(int band_exp, int m) const;
  int band_min_ = 0;
  int band_max_ = -1;
  int m_max_ = -1;
  std::vector<cplx> values_;
};

/// u0^omega = sum X_{I,m} u_{I,m}. Throws std::out_of_range when the draw
/// misses a band or mode carrying a non-zero coefficient of u0.
SpectralField randomize(const SpectralField& u0, const Draw& draw);

/// Potential with blocks constant in eta inside each band I >= 1 and
/// ||u_{I,m}||^2 = 1 / ((1+(2m+1)I)^k <I>^rho log(1+I)^2 (m+1) log(m+2)^2),
/// normalised with the discrete L^2_G norm of the band. Bands I < 1 are zero.
SpectralField rough_potential(double k, double rho, const GridPtr& grid);

/// |(I,m)| = max(|log(1+I)|, m).
double block_size(int band_exp, int m);

/// Squared H^s norm restricted to modes with |(I(eta), m)| <= K.
double truncated_sobolev2(const SpectralField& f, double s, double K);
/// Squared X^k_rho norm restricted to blocks with |(I, m)| <= K.
double truncated_x2(const SpectralField& f, double k, double rho, double K);

struct Quantile {
  double level = 0.0;
  double value = 0.0;
};

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// A Monte Carlo comparison: estimate +- standard error against an expected value.
struct MomentCheck {
  std::string name;
  double estimate = 0.0;
  double expected = 0.0;
  double std_error = 0.0;
  double tolerance_sigmas = 3.0;
  bool pass() const;
};

/// Ensemble output, serialised as {config, statistic, quantiles[], tail_fit{slope, r2}, constants{}, checks[]}.
struct EnsembleReport {
  report::json config = report::json::object();
  std::string statistic;
  std::vector<Quantile> quantiles;
  TailFit tail_fit;
  report::json constants = report::json::object();
  std::vector<MomentCheck> checks;
  bool pass = true;
};

report::json to_json(const EnsembleReport& r);

/// Empirical quantile by the nearest-rank rule on a sorted copy.
double quantile(std::vector<double> values, double level);

/// Least-squares fit of log P(stat > R) against R^2 at the thresholds R
/// given by the empirical quantiles at levels 0.5 .. 1 - min_count/n.
TailFit fit_gaussian_tail(std::vector<double> values, int min_count = 10);

/// Monte Carlo check of the decoupling identities for S = sum psi_n X_n:
/// E|S|^2 = E|X|^2 sum |psi_n|^2, E X = E X^2 = 0, vanishing off-pairing
/// quartic moments and the paired values E|X_1|^2|X_2|^2 = 4, E|X|^4 = 8,
/// plus a fit of log P(|S| > R (sum |psi|^2)^{1/2}) against R^2 over
/// R^2 = 1 .. r2_max. Throws std::invalid_argument when n_samples cannot
/// resolve probabilities down to exp(-r2_max / 2) with ten expected hits.
EnsembleReport decoupling_moment_check(const std::vector<cplx>& psi, const EnsembleConfig& cfg, double r2_max = 8.0);

/// Composite Simpson weights on n uniform nodes over [0, T]; n odd, n >= 3.
std::vector<double> simpson_weights(int n, double T);

/// Integrability statistics for z = e^{it Delta_G} u0 (deterministic side)
/// and z^omega (ensemble side), with s = k + zeta(p):
///   det: sum_{(I,m)} (1+(2m+1)I)^s ||z_{I,m}||^2_{L^q_T L^p}  against
///        T^{2/q} ||u0||^2 in X^k with rho = zeta(p) + 3/2 - 3/p,
///   ensemble: ||z^omega||_{L^q_T W^{s,p}} / (T^{1/q} ||u0||_X).
/// Time integrals use composite Simpson on n_t nodes.
EnsembleReport integrability_sweep(const SpectralField& u0, double k, double p, double q, double T,
                                   const EnsembleConfig& cfg, int n_t = 33);

/// Non-smoothing surrogate for a rough potential: per draw, the truncated
/// H^{k+eps} norms of u0^omega over |(I,m)| <= K for each K, and the H^k
/// tail fraction (S(K_last) - S(K_prev)) / S(K_last).
struct NonSmoothingResult {
  int draws = 0;
  int increasing = 0;        // draws with strictly increasing H^{k+eps} sums
  int small_tail = 0;        // draws with H^k tail fraction below tail_limit
  double max_tail = 0.0;
  double mean_tail = 0.0;
  std::vector<double> mean_rough_sums;   // ensemble mean of H^{k+eps} sums per K
  std::vector<double> mean_smooth_sums;  // ensemble mean of H^k sums per K
  std::vector<double> oracle_rough_sums; // deterministic sums times E|X|^2
  std::vector<double> oracle_smooth_sums;
};
NonSmoothingResult nonsmoothing_check(const SpectralField& u0, double k, double eps, const std::vector<double>& Ks,
                                      const EnsembleConfig& cfg, double tail_limit = 0.05);

}  // namespace grushin::flow_random
