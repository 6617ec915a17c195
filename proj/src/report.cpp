#include "grushin/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace grushin::report {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

void summarize(SweepReport& r, double tolerance) {
  std::map<double, double> per_scale;
  Summary s;
  for (const auto& row : r.rows) {
    if (!std::isfinite(row.ratio)) continue;
    auto [it, fresh] = per_scale.emplace(row.scale, row.ratio);
    if (!fresh) it->second = std::max(it->second, row.ratio);
    s.max_ratio = std::max(s.max_ratio, row.ratio);
  }
  s.scales = static_cast<int>(per_scale.size());
  if (s.scales >= 3) {
    std::vector<double> xs, ys;
    int index = 0;
    for (const auto& [scale, mx] : per_scale) {
      if (index >= s.scales - 2)
        s.top_max = std::max(s.top_max, mx);
      else
        s.rest_max = std::max(s.rest_max, mx);
      if (mx > 0) {
        xs.push_back(scale);
        ys.push_back(std::log2(mx));
      }
      ++index;
    }
    if (xs.size() >= 2) s.trend_slope = fit_line(xs, ys).slope;
    s.pass = s.top_max <= (1.0 + tolerance) * s.rest_max;
  }
  r.summary = s;
}

json to_json(const SweepReport& r) {
  json j;
  j["name"] = r.name;
  j["config"] = r.config;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json e;
    e["params"] = row.params;
    e["scale"] = row.scale;
    e["lhs"] = row.lhs;
    e["rhs"] = row.rhs;
    e["ratio"] = row.ratio;
    rows.push_back(std::move(e));
  }
  j["rows"] = std::move(rows);
  json s;
  s["max_ratio"] = r.summary.max_ratio;
  s["trend_slope"] = r.summary.trend_slope;
  s["top_scales_max"] = r.summary.top_max;
  s["other_scales_max"] = r.summary.rest_max;
  s["scales"] = r.summary.scales;
  s["verdict"] = r.summary.pass ? "PASS" : "FAIL";
  j["summary"] = std::move(s);
  j["extra"] = r.extra;
  return j;
}

SweepReport from_json(const json& j) {
  try {
    SweepReport r;
    r.name = j.at("name").get<std::string>();
    r.config = j.at("config");
    for (const auto& e : j.at("rows")) {
      Row row;
      row.params = e.at("params");
      row.scale = e.at("scale").get<double>();
      row.lhs = e.at("lhs").get<double>();
      row.rhs = e.at("rhs").get<double>();
      row.ratio = e.at("ratio").get<double>();
      r.rows.push_back(std::move(row));
    }
    const auto& s = j.at("summary");
    r.summary.max_ratio = s.at("max_ratio").get<double>();
    r.summary.trend_slope = s.at("trend_slope").get<double>();
    r.summary.top_max = s.at("top_scales_max").get<double>();
    r.summary.rest_max = s.at("other_scales_max").get<double>();
    r.summary.scales = s.at("scales").get<int>();
    r.summary.pass = s.at("verdict").get<std::string>() == "PASS";
    r.extra = j.value("extra", json::object());
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("report: malformed sweep report: ") + e.what());
  }
}

bool verdict(const SweepReport& r) {
  if (r.extra.is_object() && r.extra.contains("verdict") && r.extra["verdict"].is_string())
    return r.extra["verdict"].get<std::string>() == "PASS";
  return r.summary.pass;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {
std::string cell(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return csv_escape(v.get<std::string>());
  return csv_escape(v.dump());
}
}  // namespace

std::string to_csv(const SweepReport& r) {
  std::vector<std::string> keys;
  if (!r.rows.empty())
    for (auto it = r.rows.front().params.begin(); it != r.rows.front().params.end(); ++it) keys.push_back(it.key());
  std::ostringstream out;
  out << "scale";
  for (const auto& k : keys) out << ',' << csv_escape(k);
  out << ",lhs,rhs,ratio\r\n";
  for (const auto& row : r.rows) {
    out << format_double(row.scale);
    for (const auto& k : keys) out << ',' << (row.params.contains(k) ? cell(row.params.at(k)) : std::string());
    out << ',' << format_double(row.lhs) << ',' << format_double(row.rhs) << ',' << format_double(row.ratio) << "\r\n";
  }
  return out.str();
}

std::string version() { return GRUSHIN_VERSION; }

json run_header(const std::string& command, const json& config, std::uint64_t seed) {
  json h;
  h["tool"] = "grushin";
  h["version"] = version();
  h["command"] = command;
  h["seed"] = seed;
  h["config"] = config;
  return h;
}

}  // namespace grushin::report
