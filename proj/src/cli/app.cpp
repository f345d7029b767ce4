#include <CLI11.hpp>
#include <cstdio>

#include "ridgelab/cli.hpp"
#include "ridgelab/errors.hpp"

namespace ridgelab::cli {

namespace {

constexpr const char* kApproximateHelp = R"(Config fields (JSON object, all optional):
  method           "depth3" | "shallow1d" | "lifted"            (default "depth3")
  target           registry name or {"name": ..., ...}           (default "gaussian")
                   gaussian {dim}, zero {dim}, bump {dim, corner, sigma=1, t=1},
                   difference-logistic {step=1, scale=1, shift=0},
                   shallow-net {net}, deep-net {net}
  p                residual exponent                             (default 2)
  mode             "least_squares" | "sample"                    (default "least_squares")
  quadrature       {rel_tol=1e-6, abs_tol=1e-9, base_cells_per_axis=64,
                    initial_radius=4, max_doublings=12, order=8}
                   lifted uses base_cells_per_axis=16 unless set
  seed             integer                                       (default 0)
 depth3:
  box              [[lo, hi], ...], finite                       (default [[-4,4],[-4,4]])
  sigma            bump scale for a single fit                   (default 0.5)
  density          lattice points per sigma per axis             (default 2)
  schedule         decreasing sigmas; writes residuals.csv       (default none)
 shallow1d / lifted:
  activation       name or {"name", "alpha"}                     (default "logistic")
  dictionary_size  K                                  (default 200; lifted 24)
  knots            [..] or {"lo", "hi", "count"}      (default {-6, 6, 25}; lifted {-3, 3, 8})
  y                lifting direction or list of them (lifted)    (default [2, 0.5]))";

constexpr const char* kInexpressivityHelp = R"(Config fields (JSON object, all optional):
  experiment       "probe" | "cone" | "growth"                   (default "probe")
  quadrature       as for approximate
 probe:
  target           as for approximate, on R^2                    (default "gaussian")
  activation                                                     (default "relu")
  neurons          K                                             (default 100)
  inner_radius                                                   (default 4)
  outer_radii                                                    (default [8, 16, 32])
  p                                                              (default 1)
  growth_floor     required growth per doubling                  (default 1.5)
  fit_fraction     inner residual / target norm bound            (default 0.5)
  vanish_threshold                                               (default 1e-10)
  seed                                                           (default 0)
 cone:
  c                                                              (default 1)
  two_sided                                                      (default true)
 growth:
  net              shallow net JSON on R^2                       (default one ReLU unit, y=(1,0))
  radii                                                          (default [1, 2, 4, 8, 16])
  p                                                              (default 1)
  growth_floor                                                   (default 1.5))";

constexpr const char* kNormHelp = R"(Config fields:
  net | net_path   serialized shallow or deep net (inline or file)  (required)
  domain           {"box": [[lo, hi], ...]} or {"cone": {"c", "two_sided"}}
                   ("inf"/"-inf" allowed)                        (default all of R^n)
  p                                                              (default 2)
  quadrature       as for approximate)";

constexpr const char* kBumpHelp = R"(Config fields:
  n                dimension of F                                (default 2))";

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"ridgelab: ridge-function and ReLU-network approximation lab"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  std::uint64_t seed = 0;
  double p = 0;
  app.add_option("--config", global.config_path, "JSON config for the subcommand")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config; default 0)");
  app.add_option("--out", global.out_dir, "Output directory")->capture_default_str();
  auto* p_opt = app.add_option("--p", p, "Exponent p (overrides the config)");
  app.add_flag("--no-timestamp", global.no_timestamp, "Omit timestamps so outputs are byte-identical");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify-lemmas", "Run the lemma-level check suite");
  verify_cmd->add_option("--only", verify.only, "Check groups: difference, limits, bump, lifting")->delimiter(',');
  verify_cmd->add_flag("--inject-broken-activation", verify.inject_broken_activation)->group("");
  auto* approx_cmd = app.add_subcommand("approximate", "Fit depth-3, shallow or lifted approximators");
  approx_cmd->footer(kApproximateHelp);
  auto* inexp_cmd = app.add_subcommand("inexpressivity", "Probe, cone and norm-growth experiments");
  inexp_cmd->footer(kInexpressivityHelp);
  auto* norm_cmd = app.add_subcommand("norm", "L^p norm of a serialized net over a domain");
  norm_cmd->footer(kNormHelp);
  auto* bump_cmd = app.add_subcommand("bump", "Write the G and F bump nets as JSON");
  bump_cmd->footer(kBumpHelp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (seed_opt->count() > 0) global.seed = seed;
  if (p_opt->count() > 0) global.p = p;

  try {
    if (verify_cmd->parsed()) return cmd_verify_lemmas(global, verify);
    const Json config = load_config(global);
    if (approx_cmd->parsed()) return cmd_approximate(global, config);
    if (inexp_cmd->parsed()) return cmd_inexpressivity(global, config);
    if (norm_cmd->parsed()) return cmd_norm(global, config);
    if (bump_cmd->parsed()) return cmd_bump(global, config);
  } catch (const NonConvergenceError& e) {
    std::fprintf(stderr, "nonconvergence: %s (partial value %.6g)\n", e.what(), e.partial().value);
    return kNonConvergence;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const UnsupportedError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kCheckFailed;
  }
  return kConfigError;
}

}  // namespace ridgelab::cli
