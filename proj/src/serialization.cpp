#include "ridgelab/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ridgelab/errors.hpp"

namespace ridgelab {

namespace {

constexpr long long kDenseLimit = 65536;

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i]);
  return v;
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

void known_fields(const Json& j, const char* what, std::initializer_list<const char*> keys) {
  for (const auto& [key, _] : j.items())
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end())
      throw ConfigError(std::string("unknown ") + what + " field \"" + key + "\"");
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError("expected a number or \"inf\"/\"-inf\", got " + j.dump());
}

Json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json activation_to_json(const Activationd& a) {
  if (a.kind() == ActivationKind::Custom) throw UnsupportedError("custom activations cannot be serialized");
  Json j{{"name", std::string(activation_name(a.kind()))}};
  if (a.has_alpha()) j["alpha"] = a.alpha();
  return j;
}

Activationd activation_from_json(const Json& j) {
  if (j.is_string()) {
    try {
      return Activationd::from_name(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  require_object(j, "activation");
  for (const auto& [key, _] : j.items())
    if (key != "name" && key != "alpha") throw ConfigError("unknown activation field \"" + key + "\"");
  std::optional<double> alpha;
  if (j.contains("alpha")) alpha = number_from_json(j["alpha"]);
  try {
    return Activationd::from_name(field(j, "name").get<std::string>(), alpha);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Json shallow_to_json(const ShallowNetd& net) {
  Json neurons = Json::array();
  for (const auto& n : net.neurons()) neurons.push_back({{"t", n.coeff}, {"y", vector_to_json(n.weight)}, {"rho", n.bias}});
  return {{"dim", net.dim()}, {"activation", activation_to_json(net.activation())}, {"t0", net.constant()},
          {"neurons", std::move(neurons)}};
}

ShallowNetd shallow_from_json(const Json& j) {
  require_object(j, "shallow net");
  known_fields(j, "shallow net", {"dim", "activation", "t0", "neurons"});
  std::vector<Neuron<double>> neurons;
  for (const auto& n : field(j, "neurons")) {
    require_object(n, "neuron");
    known_fields(n, "neuron", {"t", "y", "rho"});
    neurons.push_back({number_from_json(field(n, "t")), vector_from_json(field(n, "y")), number_from_json(field(n, "rho"))});
  }
  try {
    return ShallowNetd(field(j, "dim").get<int>(), activation_from_json(field(j, "activation")),
                       j.contains("t0") ? number_from_json(j["t0"]) : 0.0, std::move(neurons));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Json deep_to_json(const DeepReluNetd& net) {
  Json layers = Json::array();
  for (const auto& layer : net.layers()) {
    const auto& w = layer.weight;
    Json wj;
    if (static_cast<long long>(w.rows()) * w.cols() <= kDenseLimit) {
      const Eigen::MatrixXd dense(w);
      wj = Json::array();
      for (Eigen::Index r = 0; r < dense.rows(); ++r) wj.push_back(vector_to_json(dense.row(r).transpose()));
    } else {
      Json triplets = Json::array();
      for (Eigen::Index r = 0; r < w.outerSize(); ++r)
        for (DeepReluNetd::SparseMatrix::InnerIterator it(w, r); it; ++it)
          triplets.push_back(Json::array({it.row(), it.col(), it.value()}));
      wj = {{"rows", w.rows()}, {"cols", w.cols()}, {"triplets", std::move(triplets)}};
    }
    layers.push_back({{"w", std::move(wj)}, {"b", vector_to_json(layer.bias)}});
  }
  return {{"dim_in", net.dim_in()}, {"layers", std::move(layers)}};
}

DeepReluNetd deep_from_json(const Json& j) {
  require_object(j, "deep net");
  known_fields(j, "deep net", {"dim_in", "layers"});
  std::vector<AffineLayer<double>> layers;
  for (const auto& lj : field(j, "layers")) {
    require_object(lj, "layer");
    known_fields(lj, "layer", {"w", "b"});
    const Json& wj = field(lj, "w");
    DeepReluNetd::SparseMatrix w;
    if (wj.is_array()) {
      const auto rows = static_cast<Eigen::Index>(wj.size());
      const auto cols = rows > 0 ? static_cast<Eigen::Index>(wj[0].size()) : 0;
      Eigen::MatrixXd dense(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(wj[r].size()) != cols) throw ConfigError("ragged weight matrix");
        dense.row(r) = vector_from_json(wj[r]).transpose();
      }
      w = dense.sparseView(0.0, 0.0);
    } else {
      require_object(wj, "sparse weight");
      known_fields(wj, "sparse weight", {"rows", "cols", "triplets"});
      const auto rows = field(wj, "rows").get<Eigen::Index>();
      const auto cols = field(wj, "cols").get<Eigen::Index>();
      std::vector<Eigen::Triplet<double>> triplets;
      for (const auto& t : field(wj, "triplets")) {
        const auto r = t.at(0).get<Eigen::Index>(), c = t.at(1).get<Eigen::Index>();
        if (r < 0 || r >= rows || c < 0 || c >= cols) throw ConfigError("sparse weight index out of range");
        triplets.emplace_back(r, c, number_from_json(t.at(2)));
      }
      w.resize(rows, cols);
      w.setFromTriplets(triplets.begin(), triplets.end());
    }
    layers.push_back({std::move(w), vector_from_json(field(lj, "b"))});
  }
  try {
    DeepReluNetd net(std::move(layers));
    if (j.contains("dim_in") && j["dim_in"].get<int>() != net.dim_in()) throw ConfigError("dim_in does not match layers");
    return net;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Json domain_to_json(const Domain& d) {
  if (!d.is_box()) return {{"cone", {{"c", d.as_cone().c}, {"two_sided", d.as_cone().two_sided}}}};
  Json axes = Json::array();
  for (const auto& a : d.as_box().axes) axes.push_back(Json::array({number_to_json(a.lo), number_to_json(a.hi)}));
  return {{"box", std::move(axes)}};
}

Domain domain_from_json(const Json& j) {
  require_object(j, "domain");
  if (j.size() != 1) throw ConfigError("domain must have exactly one of \"box\" or \"cone\"");
  try {
    if (j.contains("box")) {
      std::vector<Interval> axes;
      for (const auto& a : j["box"]) {
        if (!a.is_array() || a.size() != 2) throw ConfigError("box axes must be [lo, hi] pairs");
        axes.push_back({number_from_json(a[0]), number_from_json(a[1])});
      }
      return Domain::box(std::move(axes));
    }
    if (j.contains("cone")) {
      const Json& c = j["cone"];
      require_object(c, "cone");
      known_fields(c, "cone", {"c", "two_sided"});
      return Domain::cone(number_from_json(field(c, "c")), c.value("two_sided", false));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("domain must have exactly one of \"box\" or \"cone\"");
}

Json quadrature_config_to_json(const QuadratureConfig& cfg) {
  return {{"rel_tol", cfg.rel_tol},         {"abs_tol", cfg.abs_tol},
          {"base_cells_per_axis", cfg.base_cells_per_axis}, {"initial_radius", cfg.initial_radius},
          {"max_doublings", cfg.max_doublings}, {"order", cfg.order}};
}

QuadratureConfig quadrature_config_from_json(const Json& j, QuadratureConfig cfg) {
  require_object(j, "quadrature");
  for (const auto& [key, value] : j.items()) {
    if (key == "rel_tol") cfg.rel_tol = value.get<double>();
    else if (key == "abs_tol") cfg.abs_tol = value.get<double>();
    else if (key == "base_cells_per_axis") cfg.base_cells_per_axis = value.get<int>();
    else if (key == "initial_radius") cfg.initial_radius = value.get<double>();
    else if (key == "max_doublings") cfg.max_doublings = value.get<int>();
    else if (key == "order") cfg.order = value.get<int>();
    else throw ConfigError("unknown quadrature field \"" + key + "\"");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

Json to_json(const QuadratureResult& r) {
  return {{"value", r.value},
          {"abs_error_estimate", r.abs_error_estimate},
          {"truncation_radius", r.truncation_radius},
          {"cells_evaluated", r.cells_evaluated},
          {"converged", r.converged}};
}

Json to_json(const FitReport& r) {
  return {{"p", r.p},
          {"residual_lp", r.residual_lp},
          {"target_norm", r.target_norm},
          {"relative_residual", r.relative_residual},
          {"dictionary_size", r.dictionary_size},
          {"condition_estimate", r.condition_estimate},
          {"regularized", r.regularized},
          {"coefficients", vector_to_json(r.coefficients)}};
}

Json to_json(const GrowthProfile& g) {
  Json rows = Json::array();
  for (size_t i = 0; i < g.radii.size(); ++i) rows.push_back({{"R", g.radii[i]}, {"norm", g.norms[i]}});
  return {{"p", g.p}, {"domain_family", g.domain_family}, {"profile", std::move(rows)}};
}

Json to_json(const ProbeReport& r) {
  return {{"verdict", verdict_name(r.verdict)},
          {"inner_residual", r.inner_residual},
          {"target_inner_norm", r.target_inner_norm},
          {"net_inner_norm", r.net_inner_norm},
          {"condition_estimate", r.condition_estimate},
          {"regularized", r.regularized},
          {"outer_norms", to_json(r.outer_norms)},
          {"net", shallow_to_json(r.net)}};
}

std::string growth_csv(const GrowthProfile& g) {
  std::string out = "R,norm\n";
  for (size_t i = 0; i < g.radii.size(); ++i) out += format_double(g.radii[i]) + "," + format_double(g.norms[i]) + "\n";
  return out;
}

std::string coefficients_csv(const Depth3Approximation& a) {
  std::string out = "index,z,sigma,t\n";
  for (Eigen::Index i = 0; i < a.corners.cols(); ++i) {
    std::string z;
    for (Eigen::Index k = 0; k < a.corners.rows(); ++k) {
      if (k > 0) z += ';';
      z += format_double(a.corners(k, i));
    }
    out += std::to_string(i) + "," + z + "," + format_double(a.sigma) + "," +
           format_double(a.report.coefficients[i]) + "\n";
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ridgelab
