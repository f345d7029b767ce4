#include <memory>

#include "ridgelab/cli.hpp"
#include "ridgelab/constructors.hpp"
#include "ridgelab/errors.hpp"

namespace ridgelab::cli {

ConfigReader::ConfigReader(Json source, std::string context)
    : source_(source.is_null() ? Json::object() : std::move(source)), context_(std::move(context)) {
  if (!source_.is_object()) throw ConfigError(context_ + " must be a JSON object");
}

bool ConfigReader::has(const std::string& key) const { return source_.contains(key); }

const Json* ConfigReader::find(const std::string& key) {
  used_.insert(key);
  auto it = source_.find(key);
  return it == source_.end() ? nullptr : &*it;
}

double ConfigReader::number(const std::string& key, double fallback) {
  const Json* j = find(key);
  const double v = j ? number_from_json(*j) : fallback;
  resolved_[key] = number_to_json(v);
  return v;
}

double ConfigReader::number(const std::string& key) {
  if (!has(key)) throw ConfigError(context_ + ": missing field \"" + key + "\"");
  return number(key, 0.0);
}

int ConfigReader::integer(const std::string& key, int fallback) {
  const Json* j = find(key);
  int v = fallback;
  if (j) {
    if (!j->is_number_integer()) throw ConfigError(context_ + ": \"" + key + "\" must be an integer");
    v = j->get<int>();
  }
  resolved_[key] = v;
  return v;
}

bool ConfigReader::boolean(const std::string& key, bool fallback) {
  const Json* j = find(key);
  bool v = fallback;
  if (j) {
    if (!j->is_boolean()) throw ConfigError(context_ + ": \"" + key + "\" must be true or false");
    v = j->get<bool>();
  }
  resolved_[key] = v;
  return v;
}

std::string ConfigReader::text(const std::string& key, const std::string& fallback) {
  const Json* j = find(key);
  std::string v = fallback;
  if (j) {
    if (!j->is_string()) throw ConfigError(context_ + ": \"" + key + "\" must be a string");
    v = j->get<std::string>();
  }
  resolved_[key] = v;
  return v;
}

std::vector<double> ConfigReader::numbers(const std::string& key, const std::vector<double>& fallback) {
  const Json* j = find(key);
  std::vector<double> v = fallback;
  if (j) {
    if (!j->is_array()) throw ConfigError(context_ + ": \"" + key + "\" must be an array of numbers");
    v.clear();
    for (const auto& e : *j) v.push_back(number_from_json(e));
  }
  Json arr = Json::array();
  for (double d : v) arr.push_back(number_to_json(d));
  resolved_[key] = std::move(arr);
  return v;
}

Json ConfigReader::raw(const std::string& key, const Json& fallback) {
  const Json* j = find(key);
  Json v = j ? *j : fallback;
  resolved_[key] = v;
  return v;
}

Json ConfigReader::raw(const std::string& key) {
  if (!has(key)) throw ConfigError(context_ + ": missing field \"" + key + "\"");
  return raw(key, Json());
}

void ConfigReader::set(const std::string& key, Json value) {
  used_.insert(key);
  resolved_[key] = std::move(value);
}

void ConfigReader::finish() const {
  for (const auto& [key, _] : source_.items())
    if (!used_.count(key)) throw ConfigError(context_ + ": unknown field \"" + key + "\"");
}

// ---------------------------------------------------------------------------

Target make_target(ConfigReader& spec, int default_dim) {
  const std::string name = spec.text("name", "");
  Target t;
  if (name == "gaussian" || name == "zero") {
    t.dim = spec.integer("dim", default_dim);
    if (t.dim < 1 || t.dim > 4) throw ConfigError("target dimension must be in [1, 4]");
    if (name == "gaussian")
      t.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return std::exp(-x.squaredNorm()); };
    else
      t.f = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; };
  } else if (name == "bump") {
    t.dim = spec.integer("dim", default_dim);
    if (t.dim < 1 || t.dim > 4) throw ConfigError("target dimension must be in [1, 4]");
    const auto corner = spec.numbers("corner", std::vector<double>(t.dim, 0.0));
    const double sigma = spec.number("sigma", 1.0);
    const double scale = spec.number("t", 1.0);
    if (static_cast<int>(corner.size()) != t.dim) throw ConfigError("bump corner must have dim entries");
    if (!(sigma > 0)) throw ConfigError("bump sigma must be positive");
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(corner.data(), t.dim);
    auto net = std::make_shared<DeepReluNetd>(family_member(t.dim, z, sigma, scale));
    t.f = [net](const Eigen::Ref<const Eigen::VectorXd>& x) { return deep_eval(*net, x); };
    Box cell;
    for (int i = 0; i < t.dim; ++i) cell.axes.push_back({z[i] + 0.5 * sigma, z[i] + 1.5 * sigma});
    const BumpLattice single(cell, sigma);
    t.hints = single.hints(single.support_box());
  } else if (name == "difference-logistic") {
    t.dim = 1;
    const double step = spec.number("step", 1.0);
    const double a = spec.number("scale", 1.0);
    const double b = spec.number("shift", 0.0);
    const DifferenceUnit<double> unit{Activationd::logistic(), 1, step};
    t.f = [unit, a, b](const Eigen::Ref<const Eigen::VectorXd>& x) { return difference_eval(unit, a * x[0] + b); };
  } else if (name == "shallow-net") {
    auto net = std::make_shared<ShallowNetd>(shallow_from_json(spec.raw("net")));
    t.dim = net->dim();
    t.hints = kink_hints(*net);
    t.f = [net](const Eigen::Ref<const Eigen::VectorXd>& x) { return (*net)(x); };
  } else if (name == "deep-net") {
    auto net = std::make_shared<DeepReluNetd>(deep_from_json(spec.raw("net")));
    if (net->dim_out() != 1) throw ConfigError("deep-net targets must have one output");
    t.dim = net->dim_in();
    t.hints = kink_hints(*net);
    t.f = [net](const Eigen::Ref<const Eigen::VectorXd>& x) { return deep_eval(*net, x); };
  } else {
    throw ConfigError("unknown target \"" + name +
                      "\" (expected gaussian, zero, bump, difference-logistic, shallow-net or deep-net)");
  }
  return t;
}

Target make_target(const Json& spec, int default_dim, Json* resolved) {
  ConfigReader reader(spec.is_string() ? Json{{"name", spec}} : spec, "target");
  Target t = make_target(reader, default_dim);
  reader.finish();
  if (resolved) *resolved = reader.resolved();
  return t;
}

}  // namespace ridgelab::cli
