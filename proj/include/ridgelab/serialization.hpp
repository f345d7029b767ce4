#pragma once

#include <json.hpp>
#include <string>

#include "ridgelab/constructors.hpp"
#include "ridgelab/expressivity.hpp"
#include "ridgelab/networks.hpp"
#include "ridgelab/quadrature.hpp"

namespace ridgelab {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that reads back to the same double ("%.17g").
std::string format_double(double v);

/// Reads a number, or one of the strings "inf", "-inf".
double number_from_json(const Json& j);
Json number_to_json(double v);

Json activation_to_json(const Activationd& a);
/// Accepts {"name": ..., "alpha": ...} or a bare name string.
Activationd activation_from_json(const Json& j);

Json shallow_to_json(const ShallowNetd& net);
ShallowNetd shallow_from_json(const Json& j);

/// Layers with at most 65536 entries store "w" as nested rows; larger ones
/// as {"rows", "cols", "triplets": [[i, j, v], ...]}.
Json deep_to_json(const DeepReluNetd& net);
DeepReluNetd deep_from_json(const Json& j);

Json domain_to_json(const Domain& d);
Domain domain_from_json(const Json& j);

Json quadrature_config_to_json(const QuadratureConfig& cfg);
/// Overrides fields of `base`; unknown fields raise ConfigError.
QuadratureConfig quadrature_config_from_json(const Json& j, QuadratureConfig base = {});

Json to_json(const QuadratureResult& r);
Json to_json(const FitReport& r);
Json to_json(const GrowthProfile& g);
Json to_json(const ProbeReport& r);

/// "R,norm" rows.
std::string growth_csv(const GrowthProfile& g);
/// "index,z,sigma,t" rows; z is the corner with coordinates joined by ';'.
std::string coefficients_csv(const Depth3Approximation& a);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace ridgelab
