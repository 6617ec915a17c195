#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace grushin::report {

using json = nlohmann::ordered_json;

/// One cell of an inequality sweep. `scale` is the dyadic level used by the
/// boundedness verdict (for example log2 of a Hermite index or packet).
struct Row {
  json params = json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double scale = 0.0;
};

struct Summary {
  double max_ratio = 0.0;
  /// Least-squares slope of log2(max ratio per scale) against the scale.
  double trend_slope = 0.0;
  /// Largest ratio over the two largest scales, and over all other scales.
  double top_max = 0.0;
  double rest_max = 0.0;
  int scales = 0;
  bool pass = false;
};

struct SweepReport {
  std::string name;
  json config = json::object();
  std::vector<Row> rows;
  Summary summary;
  /// Oracle comparisons, fitted constants and other named results.
  json extra = json::object();
};

/// Fills the summary. The verdict passes when the largest ratio over the two
/// largest scales is at most (1 + tolerance) times the largest ratio over the
/// remaining scales; fewer than three distinct scales is a failure.
void summarize(SweepReport& r, double tolerance = 0.10);

json to_json(const SweepReport& r);
/// Inverse of to_json. Throws std::invalid_argument on a malformed document.
SweepReport from_json(const json& j);

/// Gate of a report: extra["verdict"] when the sweep sets one (a sweep whose
/// acceptance rule differs from the dyadic summary), otherwise the summary.
bool verdict(const SweepReport& r);
/// RFC-4180 CSV: scale, the parameter columns of the first row, lhs, rhs, ratio.
std::string to_csv(const SweepReport& r);

/// Version string compiled into the library.
std::string version();

/// Header embedded in every output file: {tool, version, command, seed, config}.
json run_header(const std::string& command, const json& config, std::uint64_t seed);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& s);

/// Least-squares line y = a + b x; returns {slope b, intercept a, r^2}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace grushin::report
