#pragma once

#include <string>

#include <json.hpp>

#include "witten/poly.hpp"
#include "witten/potential.hpp"

namespace witten {

using json = nlohmann::ordered_json;

/// {"dimension": n, "terms": [{"exponents": [...], "coeff": c}, ...]}
json polynomial_to_json(const Polynomial& p);
/// Rejects duplicate exponent vectors, wrong exponent lengths and non-numeric fields.
Polynomial polynomial_from_json(const json& j);
Polynomial read_polynomial_file(const std::string& path);

json point_analysis_to_json(const PointAnalysis& pa);

json vector_to_json(std::span<const double> v);
std::vector<double> vector_from_json(const json& j);

void write_text_file(const std::string& path, const std::string& body);

}  // namespace witten
