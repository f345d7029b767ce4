#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ridgelab/quadrature.hpp"
#include "ridgelab/serialization.hpp"

namespace ridgelab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNonConvergence = 3 };

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "ridgelab-out";
  std::optional<double> p;
  bool no_timestamp = false;
};

/// Reads a JSON object field by field, records the value actually used
/// (given or default) and rejects fields nobody asked for.
class ConfigReader {
 public:
  explicit ConfigReader(Json source, std::string context = "config");

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  double number(const std::string& key);
  int integer(const std::string& key, int fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  /// Raw subobject; recorded verbatim.
  Json raw(const std::string& key, const Json& fallback);
  Json raw(const std::string& key);
  /// Records a value that did not come from the source.
  void set(const std::string& key, Json value);

  /// Throws ConfigError naming the first unknown field.
  void finish() const;
  const Json& resolved() const { return resolved_; }

 private:
  const Json* find(const std::string& key);
  Json source_;
  Json resolved_ = Json::object();
  std::set<std::string> used_;
  std::string context_;
};

/// A target function picked from the named registry.
struct Target {
  Integrand f;
  KinkHints hints;
  int dim = 1;
};

/// Names: gaussian, zero, bump, difference-logistic, shallow-net, deep-net.
Target make_target(ConfigReader& spec, int default_dim);
Target make_target(const Json& spec, int default_dim, Json* resolved = nullptr);

struct VerifyOptions {
  std::vector<std::string> only;
  bool inject_broken_activation = false;
};

struct LemmaCheck {
  std::string group;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Groups: difference, limits, bump, lifting.
std::vector<LemmaCheck> run_lemma_suite(const VerifyOptions& options);

/// The --config file, or an empty object.
Json load_config(const GlobalOptions& global);

int cmd_verify_lemmas(const GlobalOptions& global, const VerifyOptions& options);
int cmd_approximate(const GlobalOptions& global, const Json& config);
int cmd_inexpressivity(const GlobalOptions& global, const Json& config);
int cmd_norm(const GlobalOptions& global, const Json& config);
int cmd_bump(const GlobalOptions& global, const Json& config);

/// Parses arguments, runs a subcommand and maps errors to exit codes.
int run(int argc, const char* const* argv);

}  // namespace ridgelab::cli
