#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

/// Runs the CLI with `args`, capturing stdout; stderr is discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GRUSHIN_CLI_PATH + "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch";
  fs::create_directories(dir);
  return dir / name;
}

/// Drops the "# {header}" line of a CSV output.
std::string body(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

json header(const std::string& csv) { return json::parse(csv.substr(2, csv.find('\r') - 2)); }

}  // namespace

TEST_CASE("help text matches the golden files") {
  const bool update = std::getenv("GRUSHIN_UPDATE_GOLDEN") != nullptr;
  for (std::string sub : {"", "hermite-table", "lp-sweep", "verify", "randomize", "integrability-sweep", "evolve", "report"}) {
    CAPTURE(sub);
    const auto r = cli(sub + " --help");
    CHECK(r.code == 0);
    const fs::path golden = fs::path(GRUSHIN_GOLDEN_DIR) / ("help_" + (sub.empty() ? std::string("main") : sub) + ".txt");
    if (update) spit(golden, r.out);
    REQUIRE(fs::exists(golden));
    CHECK(r.out == slurp(golden));
  }
}

TEST_CASE("version flag") {
  const auto r = cli("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("verify is byte-identical across runs and worker counts") {
  const auto a = cli("verify --suite hermite --m-max 64 --seed 7");
  const auto b = cli("verify --suite hermite --m-max 64 --seed 7");
  const auto c = cli("--workers 1 verify --suite hermite --m-max 64 --seed 7");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const auto j = json::parse(a.out);
  CHECK(j["kind"] == "verify");
  CHECK(j["verdict"] == "PASS");
  CHECK(j["header"]["seed"] == 7);
}

TEST_CASE("failing verdict exits 2 and still writes the report") {
  const auto path = scratch("strict.json");
  fs::remove(path);
  const auto r = cli("verify --suite trilinear --m-max 64 --tolerance -1 --out \"" + path.string() + "\"");
  CHECK(r.code == 2);
  REQUIRE(fs::exists(path));
  CHECK(json::parse(slurp(path))["verdict"] == "FAIL");
  const auto summary = cli("report --in \"" + path.string() + "\"");
  CHECK(summary.code == 2);
  CHECK(summary.out.find("FAIL") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli("verify --bogus").code == 1);
  CHECK(cli("verify --suite nonsense").code == 1);
  CHECK(cli("verify --config \"" + scratch("missing.cfg").string() + "\"").code == 1);
  CHECK(cli("report").code == 1);
  CHECK(cli("").code == 1);
}

TEST_CASE("config file supplies defaults and flags take precedence") {
  const auto cfg = scratch("verify.cfg");
  spit(cfg, "# defaults\nsuite=hermite\nm-max=64\nseed=9\n");
  const auto from_file = cli("verify --config \"" + cfg.string() + "\"");
  CHECK(from_file.code == 0);
  const auto h1 = json::parse(from_file.out)["header"];
  CHECK(h1["seed"] == 9);
  CHECK(h1["config"]["m-max"] == 64);
  CHECK(h1["config"]["suite"] == "hermite");

  const auto overridden = cli("verify --config \"" + cfg.string() + "\" --seed 3");
  CHECK(json::parse(overridden.out)["header"]["seed"] == 3);
}

TEST_CASE("evolve with zero data returns the zero solution") {
  const auto r = cli("evolve --data zero --nt 5");
  CHECK(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["status"] == "accepted");
  for (const auto& m : j["trace"]["mass"]) CHECK(m.get<double>() == 0.0);
  for (const auto& v : j["trace"]["v_norm"]) CHECK(v.get<double>() == 0.0);
}

TEST_CASE("quantile levels need enough samples") {
  CHECK(cli("randomize --samples 50 --levels 0.99").code == 1);
  const auto ok = cli("randomize --samples 100 --levels 0.5,0.9");
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out)["header"]["command"] == "randomize");
}

TEST_CASE("table outputs carry a JSON header line and CRLF rows") {
  const auto t = cli("hermite-table --m-max 2 --x-range 1 --x-count 3");
  CHECK(t.code == 0);
  CHECK(header(t.out)["command"] == "hermite-table");
  const auto rows = body(t.out);
  CHECK(rows.rfind("m,x,value\r\n", 0) == 0);
  CHECK(rows.find("0,0,0.7511255444649425\r\n") != std::string::npos);  // pi^{-1/4}

  const auto lp = cli("lp-sweep --m 16,32 --p 2,inf");
  CHECK(lp.code == 0);
  CHECK(header(lp.out)["command"] == "lp-sweep");
  CHECK(body(lp.out).rfind("m,p,norm,scaled_norm\r\n", 0) == 0);
  // Third row field of the p = 2 line is ||h_16||_2 = 1.
  const auto rest = body(lp.out);
  const auto line = rest.substr(rest.find('\n') + 1);
  REQUIRE(line.rfind("16,2,", 0) == 0);
  CHECK(std::stod(line.substr(5)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("report converts a verify report") {
  const auto path = scratch("verify.json");
  REQUIRE(cli("verify --suite hermite --m-max 64 --out \"" + path.string() + "\"").code == 0);
  const auto summary = cli("report --in \"" + path.string() + "\"");
  CHECK(summary.code == 0);
  CHECK(summary.out.find("PASS hermite") != std::string::npos);
  const auto csv = cli("report --in \"" + path.string() + "\" --format csv");
  CHECK(csv.code == 0);
  CHECK(csv.out.find("\r\n") != std::string::npos);
  const auto again = cli("report --in \"" + path.string() + "\" --format json");
  CHECK(json::parse(again.out) == json::parse(slurp(path)));
}
