#include "witten/registry.hpp"

#include <cmath>
#include <cstdlib>

#include "witten/errors.hpp"
#include "witten/json_io.hpp"

namespace witten {

namespace {

Term term(int e1, int e2, double c) { return Term{MultiIndex({e1, e2}), c}; }

std::optional<double> parse_real(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

Polynomial vdelta_polynomial(double delta) {
    return Polynomial(2, {term(2, 2, 1.0), term(2, 0, delta), term(0, 2, delta)});
}

Polynomial phidelta_polynomial(double delta) {
    // (x1^2 - x2)^2 + delta x2^2 = x1^4 - 2 x1^2 x2 + (1 + delta) x2^2
    return Polynomial(2, {term(4, 0, 1.0), term(2, 1, -2.0), term(0, 2, 1.0 + delta)});
}

std::optional<PotentialSource> parse_registered_name(const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos) return std::nullopt;
    const std::string family = name.substr(0, colon);
    const auto delta = parse_real(name.substr(colon + 1));
    if (!delta) return std::nullopt;
    if (family == "vdelta") return PotentialSource{ExampleFamily::vdelta, *delta, name};
    if (family == "phidelta") return PotentialSource{ExampleFamily::phidelta, *delta, name};
    return std::nullopt;
}

Potential expand_registered_potential(const std::string& name) {
    const auto src = parse_registered_name(name);
    if (!src) throw ArgumentError("unknown registered potential '" + name + "'");
    if (src->family == ExampleFamily::vdelta) return Potential(vdelta_polynomial(src->delta), 4);
    return Potential(phidelta_polynomial(src->delta), 4);
}

LoadedPotential load_potential(const std::string& spec, int k) {
    if (auto src = parse_registered_name(spec)) return {expand_registered_potential(spec), *src};
    if (spec.rfind("vdelta:", 0) == 0 || spec.rfind("phidelta:", 0) == 0) {
        throw ArgumentError("malformed registered potential '" + spec + "'");
    }
    return {Potential(read_polynomial_file(spec), k), PotentialSource{ExampleFamily::none, 0.0, spec}};
}

}  // namespace witten
