#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ridgelab/cli.hpp"

using namespace ridgelab;
namespace fs = std::filesystem;

namespace {

// A scratch directory per test case, removed afterwards.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("ridgelab_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string write(const std::string& name, const std::string& body) const {
    std::ofstream(path(name)) << body;
    return path(name);
  }
};

int ridgelab_main(std::vector<std::string> args) {
  args.insert(args.begin(), "ridgelab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load(const std::string& path) { return Json::parse(slurp(path)); }

std::vector<std::string> csv_rows(const std::string& path) {
  std::vector<std::string> rows;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  return rows;
}

}  // namespace

TEST_CASE("verify-lemmas passes and writes its table") {
  Scratch s("verify");
  CHECK(ridgelab_main({"verify-lemmas", "--out", s.path("o")}) == cli::kOk);
  const Json report = load(s.path("o/lemmas.json"));
  CHECK(report["passed"] == true);
  const auto rows = csv_rows(s.path("o/lemmas.csv"));
  CHECK(rows.size() == report["checks"].size() + 1);
}

TEST_CASE("verify-lemmas --only filters groups") {
  Scratch s("only");
  CHECK(ridgelab_main({"verify-lemmas", "--only", "bump", "--out", s.path("o")}) == cli::kOk);
  const Json report = load(s.path("o/lemmas.json"));
  REQUIRE(report["checks"].size() > 0);
  for (const auto& c : report["checks"]) CHECK(c["group"] == "bump");
  CHECK(ridgelab_main({"verify-lemmas", "--only", "bump,limits", "--out", s.path("p")}) == cli::kOk);
  CHECK(ridgelab_main({"verify-lemmas", "--only", "calculus", "--out", s.path("q")}) == cli::kConfigError);
}

TEST_CASE("a broken activation fails named checks") {
  Scratch s("broken");
  CHECK(ridgelab_main({"verify-lemmas", "--inject-broken-activation", "--out", s.path("o")}) == cli::kCheckFailed);
  const Json report = load(s.path("o/lemmas.json"));
  CHECK(report["passed"] == false);
  bool named = false;
  for (const auto& c : report["checks"])
    if (c["passed"] == false) named = named || c["check"].get<std::string>().find("relu") != std::string::npos;
  CHECK(named);
}

TEST_CASE("argument and config errors exit with 2") {
  Scratch s("errors");
  CHECK(ridgelab_main({}) == cli::kConfigError);
  CHECK(ridgelab_main({"frobnicate"}) == cli::kConfigError);
  CHECK(ridgelab_main({"bump", "--config", s.path("missing.json")}) == cli::kConfigError);
  CHECK(ridgelab_main({"bump", "--config", s.write("bad.json", "{ not json")}) == cli::kConfigError);
  CHECK(ridgelab_main({"bump", "--config", s.write("extra.json", R"({"n": 2, "m": 3})"), "--out", s.path("o")}) ==
        cli::kConfigError);
  CHECK(ridgelab_main({"approximate", "--config", s.write("inf.json", R"({"box": [["-inf", 4], [-4, 4]]})"), "--out",
                       s.path("o")}) == cli::kConfigError);
  CHECK(ridgelab_main({"approximate", "--config", s.write("m.json", R"({"method": "magic"})"), "--out", s.path("o")}) ==
        cli::kConfigError);
  CHECK(ridgelab_main({"inexpressivity", "--config", s.write("t.json", R"({"target": "sinc"})"), "--out",
                       s.path("o")}) == cli::kConfigError);
  CHECK(ridgelab_main({"--help"}) == cli::kOk);
  CHECK(ridgelab_main({"approximate", "--help"}) == cli::kOk);
}

TEST_CASE("divergent norms exit with 3") {
  Scratch s("diverge");
  const auto cfg = s.write("n.json", R"({"net": {"dim": 1, "activation": "relu", "t0": 0,
      "neurons": [{"t": 1, "y": [1], "rho": 0}]}, "quadrature": {"max_doublings": 3}})");
  CHECK(ridgelab_main({"norm", "--config", cfg, "--out", s.path("o")}) == cli::kNonConvergence);
}

TEST_CASE("norm of a serialized net") {
  Scratch s("norm");
  const auto cfg = s.write("n.json", R"({"net": {"dim": 2, "activation": "relu", "t0": 0,
      "neurons": [{"t": 1, "y": [1, 0], "rho": 0}]}, "domain": {"box": [[0, 1], [0, 1]]}, "p": 1})");
  CHECK(ridgelab_main({"norm", "--config", cfg, "--out", s.path("o")}) == cli::kOk);
  CHECK(load(s.path("o/norm.json"))["result"]["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ridgelab_main({"norm", "--config", cfg, "--p", "2", "--out", s.path("q")}) == cli::kOk);
  CHECK(load(s.path("q/norm.json"))["result"]["value"].get<double>() ==
        doctest::Approx(std::sqrt(1.0 / 3)).epsilon(1e-12));

  // A deep net written by `bump`, read back by path.
  CHECK(ridgelab_main({"bump", "--out", s.path("b")}) == cli::kOk);
  const auto deep = s.write("d.json", R"({"net_path": ")" + s.path("b/bump_1d.json") + R"(", "p": 1})");
  CHECK(ridgelab_main({"norm", "--config", deep, "--out", s.path("d")}) == cli::kOk);
  CHECK(load(s.path("d/norm.json"))["result"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cone experiment") {
  Scratch s("cone");
  CHECK(ridgelab_main({"inexpressivity", "--config", s.write("c.json", R"({"experiment": "cone", "c": 1})"), "--out",
                       s.path("o")}) == cli::kOk);
  CHECK(std::abs(load(s.path("o/cone.json"))["result"]["value"].get<double>() - 2.0) < 1e-3);
  CHECK(ridgelab_main({"inexpressivity", "--config",
                       s.write("one.json", R"({"experiment": "cone", "c": 1, "two_sided": false})"), "--out",
                       s.path("p")}) == cli::kOk);
  CHECK(std::abs(load(s.path("p/cone.json"))["result"]["value"].get<double>()) < 1e-9);
}

TEST_CASE("probe verdicts") {
  Scratch s("probe");
  CHECK(ridgelab_main({"inexpressivity", "--config", s.write("z.json", R"({"target": "zero"})"), "--out",
                       s.path("z")}) == cli::kOk);
  CHECK(load(s.path("z/probe_report.json"))["probe"]["verdict"] == "net_vanishes");
  CHECK(ridgelab_main({"inexpressivity", "--out", s.path("g")}) == cli::kOk);
  CHECK(load(s.path("g/probe_report.json"))["probe"]["verdict"] == "consistent_with_inexpressivity");
  CHECK(csv_rows(s.path("g/growth.csv")).size() == 4);
}

TEST_CASE("determinism with --no-timestamp") {
  Scratch s("determinism");
  for (const char* run : {"a", "b"}) {
    const std::string out = s.path(run);
    CHECK(ridgelab_main({"bump", "--no-timestamp", "--out", out}) == cli::kOk);
    CHECK(ridgelab_main({"inexpressivity", "--config", s.write("g.json", R"({"experiment": "growth"})"),
                         "--no-timestamp", "--seed", "7", "--out", out + "/growth"}) == cli::kOk);
    CHECK(ridgelab_main({"inexpressivity", "--config", s.write("p.json", R"({"neurons": 20})"), "--no-timestamp",
                         "--out", out + "/probe"}) == cli::kOk);
  }
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(s.dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto twin = s.dir / "b" / fs::relative(e.path(), s.dir / "a");
    CHECK(slurp(e.path().string()) == slurp(twin.string()));
    ++compared;
  }
  CHECK(compared >= 6);
  CHECK(load(s.path("a/growth/growth.json"))["config"]["seed"] == 7);
  CHECK_FALSE(load(s.path("a/bump.json")).contains("generated"));
}

TEST_CASE("reports embed a resolved config that reproduces them") {
  Scratch s("roundtrip");
  const auto first = s.write("g.json", R"({"experiment": "growth", "radii": [1, 2, 3]})");
  CHECK(ridgelab_main({"inexpressivity", "--config", first, "--no-timestamp", "--out", s.path("a")}) == cli::kOk);
  const Json resolved = load(s.path("a/growth.json"))["config"];
  CHECK(resolved.contains("quadrature"));
  CHECK(resolved.contains("growth_floor"));
  const auto second = s.write("resolved.json", resolved.dump());
  CHECK(ridgelab_main({"inexpressivity", "--config", second, "--no-timestamp", "--out", s.path("b")}) == cli::kOk);
  CHECK(slurp(s.path("a/growth.json")) == slurp(s.path("b/growth.json")));
  CHECK(slurp(s.path("a/growth.csv")) == slurp(s.path("b/growth.csv")));
}

TEST_CASE("depth-3 schedule writes non-increasing residuals") {
  Scratch s("schedule");
  const auto cfg = s.write("s.json", R"({"box": [[-3, 3], [-3, 3]], "schedule": [1, 0.5, 0.25],
      "quadrature": {"base_cells_per_axis": 16}})");
  CHECK(ridgelab_main({"approximate", "--config", cfg, "--out", s.path("o")}) == cli::kOk);
  const auto rows = csv_rows(s.path("o/residuals.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "sigma,density,dictionary_size,residual_lp,relative_residual");
  double prev = INFINITY;
  for (size_t i = 1; i < rows.size(); ++i) {
    const double residual = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    CHECK(residual <= prev);
    prev = residual;
  }
  const Json report = load(s.path("o/fit_report.json"));
  CHECK(report["depth"] == 3);
  CHECK(csv_rows(s.path("o/coefficients.csv")).size() == report["report"]["dictionary_size"].get<size_t>() + 1);
}

TEST_CASE("lifted method reports the scaling ratio") {
  Scratch s("lifted");
  const auto cfg = s.write("l.json", R"({"method": "lifted", "y": [[2, 0.5], [0.5, 0.2, 0.1]],
      "quadrature": {"base_cells_per_axis": 8}})");
  CHECK(ridgelab_main({"approximate", "--config", cfg, "--out", s.path("o")}) == cli::kOk);
  const auto rows = csv_rows(s.path("o/lifted.csv"));
  REQUIRE(rows.size() == 3);
  for (size_t i = 1; i < rows.size(); ++i) {
    std::vector<double> cols;
    std::stringstream ss(rows[i].substr(rows[i].find(',') + 1));
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(std::stod(c));
    REQUIRE(cols.size() == 4);
    CHECK(cols[2] == doctest::Approx(cols[3]).epsilon(1e-3));
  }
  CHECK(ridgelab_main({"approximate", "--config", s.write("y0.json", R"({"method": "lifted", "y": [0, 1]})"), "--out",
                       s.path("p")}) == cli::kConfigError);
}

TEST_CASE("shallow1d method") {
  Scratch s("shallow");
  const auto cfg = s.write("s.json", R"({"method": "shallow1d", "activation": "relu", "dictionary_size": 40,
      "knots": {"lo": -4, "hi": 4, "count": 10}})");
  CHECK(ridgelab_main({"approximate", "--config", cfg, "--out", s.path("o")}) == cli::kOk);
  const Json report = load(s.path("o/fit_report.json"));
  CHECK(report["difference_order"] == 2);
  CHECK(report["report"]["relative_residual"].get<double>() < 0.05);
  CHECK(load(s.path("o/net.json"))["activation"]["name"] == "relu");
}

TEST_CASE("the installed binary maps --help to 0") {
  const char* bin = std::getenv("RIDGELAB_BIN");
  if (!bin) return;
  const std::string cmd = std::string(bin) + " --help > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string bad = std::string(bin) + " approximate --bogus > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
