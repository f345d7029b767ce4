#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>

#include "ridgelab/cli.hpp"
#include "ridgelab/constructors.hpp"
#include "ridgelab/errors.hpp"
#include "ridgelab/expressivity.hpp"

namespace ridgelab::cli {

namespace {

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
  return (std::filesystem::path(g.out_dir) / name).string();
}

Json envelope(const GlobalOptions& g, const std::string& command, const Json& config) {
  Json j = Json::object();
  if (!g.no_timestamp) j["generated"] = timestamp();
  j["command"] = command;
  j["config"] = config;
  return j;
}

void write_json(const GlobalOptions& g, const std::string& name, const Json& j) {
  write_file_atomic(out_path(g, name), j.dump(2) + "\n");
}

void write_csv(const GlobalOptions& g, const std::string& name, const std::string& body) {
  const std::string header = g.no_timestamp ? "" : "# generated " + timestamp() + "\n";
  write_file_atomic(out_path(g, name), header + body);
}

std::uint64_t resolve_seed(ConfigReader& r, const GlobalOptions& g) {
  std::uint64_t seed = 0;
  if (r.has("seed")) {
    const Json j = r.raw("seed");
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
      throw ConfigError("seed must be a non-negative integer");
    seed = j.get<std::uint64_t>();
  }
  if (g.seed) seed = *g.seed;
  r.set("seed", seed);
  return seed;
}

double resolve_p(ConfigReader& r, const GlobalOptions& g, double fallback) {
  double p = r.number("p", fallback);
  if (g.p) p = *g.p;
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p must be finite and >= 1");
  r.set("p", p);
  return p;
}

QuadratureConfig resolve_quadrature(ConfigReader& r, const QuadratureConfig& base = {}) {
  const QuadratureConfig q = quadrature_config_from_json(r.raw("quadrature", Json::object()), base);
  r.set("quadrature", quadrature_config_to_json(q));
  return q;
}

Activationd resolve_activation(ConfigReader& r, const std::string& fallback) {
  const Activationd a = activation_from_json(r.raw("activation", fallback));
  r.set("activation", activation_to_json(a));
  return a;
}

Target resolve_target(ConfigReader& r, const Json& fallback, int default_dim) {
  Json resolved;
  Target t = make_target(r.raw("target", fallback), default_dim, &resolved);
  r.set("target", resolved);
  return t;
}

FitMode resolve_mode(ConfigReader& r) {
  const std::string m = r.text("mode", "least_squares");
  if (m == "least_squares") return FitMode::LeastSquares;
  if (m == "sample") return FitMode::Sample;
  throw ConfigError("mode must be \"least_squares\" or \"sample\"");
}

std::vector<double> resolve_knots(ConfigReader& r, double span, int count_default) {
  const Json spec = r.raw("knots", Json{{"lo", -span}, {"hi", span}, {"count", count_default}});
  if (spec.is_array()) {
    std::vector<double> knots;
    for (const auto& k : spec) knots.push_back(number_from_json(k));
    return knots;
  }
  ConfigReader k(spec, "knots");
  const double lo = k.number("lo"), hi = k.number("hi");
  const int count = k.integer("count", count_default);
  k.finish();
  if (count < 1 || !(hi >= lo)) throw ConfigError("knots need count >= 1 and hi >= lo");
  r.set("knots", k.resolved());
  return ShallowFitOptions::even_knots(lo, hi, count);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

std::string joined(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

Json load_config(const GlobalOptions& g) {
  if (g.config_path.empty()) return Json::object();
  try {
    return Json::parse(read_file(g.config_path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(g.config_path + ": " + e.what());
  }
}

int cmd_verify_lemmas(const GlobalOptions& global, const VerifyOptions& options) {
  const auto checks = run_lemma_suite(options);
  std::string csv = "group,check,status,detail\n";
  Json rows = Json::array();
  int failed = 0;
  for (const auto& c : checks) {
    std::printf("%-4s  %-10s  %-40s  %s\n", c.passed ? "ok" : "FAIL", c.group.c_str(), c.name.c_str(), c.detail.c_str());
    csv += c.group + "," + c.name + "," + (c.passed ? "pass" : "fail") + ",\"" + c.detail + "\"\n";
    rows.push_back({{"group", c.group}, {"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!c.passed) ++failed;
  }
  Json config{{"only", options.only}};
  if (options.inject_broken_activation) config["inject_broken_activation"] = true;
  Json report = envelope(global, "verify-lemmas", config);
  report["passed"] = failed == 0;
  report["checks"] = std::move(rows);
  write_csv(global, "lemmas.csv", csv);
  write_json(global, "lemmas.json", report);
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  for (const auto& c : checks)
    if (!c.passed) std::fprintf(stderr, "failed check: %s/%s\n", c.group.c_str(), c.name.c_str());
  return failed == 0 ? kOk : kCheckFailed;
}

int cmd_approximate(const GlobalOptions& global, const Json& config) {
  ConfigReader r(config, "approximate");
  resolve_seed(r, global);
  const std::string method = r.text("method", "depth3");
  QuadratureConfig quad_base;
  // Lifted domains are R x [0,1]^n; 64 cells on every axis is slow past n = 1.
  if (method == "lifted") quad_base.base_cells_per_axis = 16;
  const QuadratureConfig quad = resolve_quadrature(r, quad_base);

  if (method == "depth3") {
    const Domain box_domain = domain_from_json({{"box", r.raw("box", Json::parse(R"([[-4, 4], [-4, 4]])"))}});
    const Box box = box_domain.as_box();
    if (!box.finite()) throw ConfigError("method depth3 needs a finite box");
    const Target target = resolve_target(r, "gaussian", box.dim());
    if (target.dim != box.dim()) throw ConfigError("target dimension does not match the box");
    const double p = resolve_p(r, global, 2.0);
    const FitMode mode = resolve_mode(r);
    const int density = r.integer("density", 2);
    const auto schedule = r.numbers("schedule", {});
    const double sigma = r.number("sigma", 0.5);
    r.finish();
    if (density < 1) throw ConfigError("density must be >= 1");

    std::vector<GridSpec> grids;
    if (schedule.empty())
      grids.push_back({box, sigma, mode, density});
    else
      grids = refinement_schedule(box, schedule, mode, density);
    std::string csv = "sigma,density,dictionary_size,residual_lp,relative_residual\n";
    std::optional<Depth3Approximation> last;
    for (const auto& grid : grids) {
      last = build_depth3_approximator(target.f, grid, p, quad, target.hints);
      csv += format_double(grid.sigma) + "," + std::to_string(grid.density) + "," +
             std::to_string(last->report.dictionary_size) + "," + format_double(last->report.residual_lp) + "," +
             format_double(last->report.relative_residual) + "\n";
      std::printf("sigma %-8g density %d  members %-6lld  residual %.6g (relative %.6g)\n", grid.sigma, grid.density,
                  last->report.dictionary_size, last->report.residual_lp, last->report.relative_residual);
    }
    Json report = envelope(global, "approximate", r.resolved());
    report["report"] = to_json(last->report);
    report["sigma"] = last->sigma;
    report["density"] = grids.back().density;
    report["depth"] = last->net.depth();
    if (!schedule.empty()) write_csv(global, "residuals.csv", csv);
    write_csv(global, "coefficients.csv", coefficients_csv(*last));
    write_json(global, "net.json", deep_to_json(last->net));
    write_json(global, "fit_report.json", report);
    return kOk;
  }

  if (method == "shallow1d" || method == "lifted") {
    const Target target = resolve_target(r, "gaussian", 1);
    if (target.dim != 1) throw ConfigError("method " + method + " needs a target on R");
    const Activationd activation = resolve_activation(r, "logistic");
    // The lifted ratio is only meaningful above the rounding floor, so its
    // default dictionary is much smaller.
    const bool lifted = method == "lifted";
    ShallowFitOptions options;
    options.dictionary_size = r.integer("dictionary_size", lifted ? 24 : 200);
    options.knots = lifted ? resolve_knots(r, 3.0, 8) : resolve_knots(r, 6.0, 25);
    options.mode = resolve_mode(r);
    const double p = resolve_p(r, global, 2.0);

    if (method == "shallow1d") {
      r.finish();
      const auto fit = build_shallow_1d(target.f, activation, options, p, quad, target.hints);
      std::printf("dictionary %lld  neurons %zu  residual %.6g (relative %.6g)\n", fit.report.dictionary_size,
                  fit.net.neurons().size(), fit.report.residual_lp, fit.report.relative_residual);
      Json report = envelope(global, "approximate", r.resolved());
      report["report"] = to_json(fit.report);
      report["difference_order"] = fit.difference_order;
      report["neurons"] = fit.net.neurons().size();
      write_json(global, "net.json", shallow_to_json(fit.net));
      write_json(global, "fit_report.json", report);
      return kOk;
    }

    Json ys = r.raw("y", Json::parse("[2.0, 0.5]"));
    if (!ys.is_array() || ys.empty()) throw ConfigError("y must be a vector or a list of vectors");
    if (!ys[0].is_array()) ys = Json::array({ys});
    r.finish();
    std::string csv = "y,residual_1d,residual_lifted,ratio,expected_ratio\n";
    Json runs = Json::array();
    for (size_t i = 0; i < ys.size(); ++i) {
      std::vector<double> yv;
      for (const auto& e : ys[i]) yv.push_back(number_from_json(e));
      const Eigen::VectorXd y = to_vector(yv);
      const auto fit = build_lifted_approximator(target.f, y, activation, options, p, quad, target.hints);
      csv += joined(y) + "," + format_double(fit.residual_1d) + "," + format_double(fit.report.residual_lp) + "," +
             format_double(fit.ratio) + "," + format_double(fit.expected_ratio) + "\n";
      std::printf("y %-16s residual_1d %.6g  lifted %.6g  ratio %.8g (expected %.8g)\n", joined(y).c_str(),
                  fit.residual_1d, fit.report.residual_lp, fit.ratio, fit.expected_ratio);
      runs.push_back({{"y", yv},
                      {"residual_1d", fit.residual_1d},
                      {"ratio", fit.ratio},
                      {"expected_ratio", fit.expected_ratio},
                      {"report", to_json(fit.report)}});
      write_json(global, "lifted_net_" + std::to_string(i) + ".json", shallow_to_json(fit.net));
      if (i == 0) write_json(global, "net.json", shallow_to_json(fit.net1d));
    }
    Json report = envelope(global, "approximate", r.resolved());
    report["runs"] = std::move(runs);
    write_csv(global, "lifted.csv", csv);
    write_json(global, "fit_report.json", report);
    return kOk;
  }
  throw ConfigError("unknown method \"" + method + "\" (expected depth3, shallow1d or lifted)");
}

int cmd_inexpressivity(const GlobalOptions& global, const Json& config) {
  ConfigReader r(config, "inexpressivity");
  const std::string experiment = r.text("experiment", "probe");
  const std::uint64_t seed = resolve_seed(r, global);
  const QuadratureConfig quad = resolve_quadrature(r);

  if (experiment == "probe") {
    ProbeConfig probe;
    probe.seed = seed;
    const Target target = resolve_target(r, "gaussian", 2);
    if (target.dim != 2) throw ConfigError("probe targets live on R^2");
    const Activationd activation = resolve_activation(r, "relu");
    probe.neurons = r.integer("neurons", probe.neurons);
    probe.inner_radius = r.number("inner_radius", probe.inner_radius);
    probe.outer_radii = r.numbers("outer_radii", probe.outer_radii);
    probe.p = resolve_p(r, global, 1.0);
    probe.growth_floor = r.number("growth_floor", probe.growth_floor);
    probe.fit_fraction = r.number("fit_fraction", probe.fit_fraction);
    probe.vanish_threshold = r.number("vanish_threshold", probe.vanish_threshold);
    r.finish();
    try {
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const ProbeReport result = fit_and_probe(target.f, activation, probe, quad);
    std::printf("verdict %s  inner residual %.6g of %.6g\n", verdict_name(result.verdict).c_str(),
                result.inner_residual, result.target_inner_norm);
    for (size_t i = 0; i < result.outer_norms.radii.size(); ++i)
      std::printf("  R %-8g norm %.6g\n", result.outer_norms.radii[i], result.outer_norms.norms[i]);
    Json report = envelope(global, "inexpressivity", r.resolved());
    report["probe"] = to_json(result);
    write_csv(global, "growth.csv", growth_csv(result.outer_norms));
    write_json(global, "probe_report.json", report);
    return kOk;
  }

  if (experiment == "cone") {
    const double c = r.number("c", 1.0);
    const bool two_sided = r.boolean("two_sided", true);
    r.finish();
    if (!(c > 0)) throw ConfigError("cone c must be positive");
    const QuadratureResult q = cone_example_integral(c, two_sided, quad);
    std::printf("cone c=%g %s: %.10g\n", c, two_sided ? "two-sided" : "one-sided", q.value);
    Json report = envelope(global, "inexpressivity", r.resolved());
    report["result"] = to_json(q);
    write_json(global, "cone.json", report);
    return kOk;
  }

  if (experiment == "growth") {
    const Json default_net = Json::parse(
        R"({"dim": 2, "activation": {"name": "relu"}, "t0": 0, "neurons": [{"t": 1, "y": [1, 0], "rho": 0}]})");
    const ShallowNetd net = shallow_from_json(r.raw("net", default_net));
    const auto radii = r.numbers("radii", kDefaultGrowthRadii);
    const double p = resolve_p(r, global, 1.0);
    const double floor = r.number("growth_floor", 1.5);
    r.finish();
    GrowthProfile profile;
    try {
      profile = ridge_norm_growth(net, radii, p, quad);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    for (size_t i = 0; i < profile.radii.size(); ++i)
      std::printf("R %-8g norm %.10g\n", profile.radii[i], profile.norms[i]);
    Json report = envelope(global, "inexpressivity", r.resolved());
    report["profile"] = to_json(profile);
    report["grows_at_floor"] = grows_at_least(profile, floor);
    write_csv(global, "growth.csv", growth_csv(profile));
    write_json(global, "growth.json", report);
    return kOk;
  }
  throw ConfigError("unknown experiment \"" + experiment + "\" (expected probe, cone or growth)");
}

int cmd_norm(const GlobalOptions& global, const Json& config) {
  ConfigReader r(config, "norm");
  Json net_json;
  if (r.has("net_path")) {
    const std::string path = r.text("net_path", "");
    try {
      net_json = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
  } else {
    net_json = r.raw("net");
  }
  Target t;
  if (net_json.contains("layers")) {
    t = make_target(Json{{"name", "deep-net"}, {"net", net_json}}, 1);
  } else {
    t = make_target(Json{{"name", "shallow-net"}, {"net", net_json}}, 1);
  }
  Json default_domain = Json::object();
  default_domain["box"] = Json::array();
  for (int i = 0; i < t.dim; ++i) default_domain["box"].push_back(Json::array({"-inf", "inf"}));
  const Domain domain = domain_from_json(r.raw("domain", default_domain));
  if (domain.dim() != t.dim) throw ConfigError("domain dimension does not match the net");
  const double p = resolve_p(r, global, 2.0);
  const QuadratureConfig quad = resolve_quadrature(r);
  r.finish();
  const QuadratureResult q = lp_norm(t.f, domain, p, quad, t.hints);
  std::printf("L^%g norm %.12g  (error estimate %.3g, radius %g)\n", p, q.value, q.abs_error_estimate,
              q.truncation_radius);
  Json report = envelope(global, "norm", r.resolved());
  report["result"] = to_json(q);
  write_json(global, "norm.json", report);
  return kOk;
}

int cmd_bump(const GlobalOptions& global, const Json& config) {
  ConfigReader r(config, "bump");
  const int n = r.integer("n", 2);
  r.finish();
  if (n < 1 || n > 16) throw ConfigError("bump dimension must be in [1, 16]");
  const auto g = bump_1d();
  const auto f = bump_nd(n);
  write_json(global, "bump_1d.json", deep_to_json(g));
  write_json(global, "bump_nd.json", deep_to_json(f));
  Json report = envelope(global, "bump", r.resolved());
  report["files"] = {{"G", "bump_1d.json"}, {"F", "bump_nd.json"}};
  report["depth"] = {{"G", g.depth()}, {"F", f.depth()}};
  write_json(global, "bump.json", report);
  std::printf("G: depth %d, F on R^%d: depth %d\n", g.depth(), n, f.depth());
  return kOk;
}

}  // namespace ridgelab::cli
