#pragma once

#include <optional>
#include <string>

#include "witten/potential.hpp"

namespace witten {

enum class ExampleFamily { none, vdelta, phidelta };

/// Where a potential came from; registered families carry their parameter so
/// samplers can add the family-specific paths.
struct PotentialSource {
    ExampleFamily family = ExampleFamily::none;
    double delta = 0.0;
    std::string name;
};

/// V_delta = x1^2 x2^2 + delta (x1^2 + x2^2)
Polynomial vdelta_polynomial(double delta);
/// Phi_delta = (x1^2 - x2)^2 + delta x2^2
Polynomial phidelta_polynomial(double delta);

/// Parses "vdelta:<real>" or "phidelta:<real>"; nullopt for anything else.
std::optional<PotentialSource> parse_registered_name(const std::string& name);

/// Registered name -> Potential with k = 4. Throws ArgumentError for unknown names.
Potential expand_registered_potential(const std::string& name);

struct LoadedPotential {
    Potential potential;
    PotentialSource source;
};

/// Registered name, or a polynomial JSON file paired with the given k.
LoadedPotential load_potential(const std::string& spec, int k);

}  // namespace witten
