#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "witten/json_io.hpp"
#include "witten/potential.hpp"
#include "witten/registry.hpp"

namespace witten {

/// Curve x(R) = origin + R * direction + R^2 * curvature sampled along a radii schedule.
/// Straight rays have zero curvature.
struct SamplePath {
    std::string label;
    std::vector<double> origin;
    std::vector<double> direction;
    std::vector<double> curvature;

    std::vector<double> point_at(double radius) const;
    bool curved() const;
};

/// Where the universally quantified conditions are probed.
///
/// Any combination of a tensor grid, uniform random points in the box and
/// paths along the radii schedule may be enabled. Paths drive divergence
/// detection, grid and random points only feed the best-constant estimate.
struct SamplingPlan {
    std::vector<std::pair<double, double>> box;
    std::size_t grid_points = 0;   // per dimension; 0 disables the grid
    std::size_t random_count = 0;
    std::vector<SamplePath> paths;
    std::vector<double> radii;         // strictly increasing, used by paths
    std::vector<double> sphere_radii;  // strictly increasing, used by condition (iii)
    std::uint64_t seed = 42;

    std::size_t dimension() const { return box.size(); }
    /// "grid", "rays", "random" or "mixed" depending on what is enabled.
    std::string mode() const;
    std::size_t sample_count() const;
    /// Throws ArgumentError when the plan is empty or a schedule is not strictly increasing.
    void validate() const;
};

/// Axes, diagonals and, for registered example families in 2-d, the loci from
/// their case analyses ({x1^2 + delta = 0} lines for V_delta, the parabolas
/// x2 = x1^2 and x2 = x1^2 / (1 + delta) for Phi_delta).
std::vector<SamplePath> default_paths(std::size_t dimension, const PotentialSource& source);
/// Powers of ten from 1 up to a cap chosen so |grad V|^2 stays finite for the given degree.
std::vector<double> default_radii(int degree);
SamplingPlan default_plan(const Potential& pot, const PotentialSource& source);

json plan_to_json(const SamplingPlan& plan);
/// Missing keys keep the values of `defaults`.
SamplingPlan plan_from_json(const json& j, const SamplingPlan& defaults);

enum class Condition { i, ii, iii };
enum class Verdict { satisfied_on_samples, divergence_detected, violated };

std::string to_string(Condition c);
std::string to_string(Verdict v);

struct Witness {
    std::vector<double> x;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::string source;
};

struct PathTrend {
    std::string label;
    std::vector<double> radii;
    std::vector<double> ratios;
    bool divergent = false;
};

struct CriterionReport {
    Condition condition = Condition::i;
    Verdict verdict = Verdict::satisfied_on_samples;
    /// (i), (ii): sup of LHS / RHS over samples. (iii): last sphere minimum of ftilde.
    double best_constant = 0.0;
    std::vector<Witness> witnesses;
    std::vector<PathTrend> trend;
    double parameter = 0.0;  // delta_1 for (i), delta_2 for (ii), 0 for (iii)
    std::size_t sample_count = 0;
    std::string note;

    /// (i), (ii) pass when satisfied on samples; (iii) passes when ftilde diverges.
    bool passed() const;
};

/// Left and right side of the condition (i) inequality at one point.
struct ConditionOneTerms {
    double lhs = 0.0;
    double rhs = 0.0;
    double laplacian = 0.0;
    bool auto_satisfied = false;  // Laplacian V(x) <= 0
};
ConditionOneTerms condition_i_terms(const Potential& pot, std::span<const double> x, double delta1);

/// Largest |d^a V(x)| over |a| = k + 1 and (1 + ftilde(x))^{k+1-delta2}.
std::pair<double, double> condition_ii_terms(const Potential& pot, std::span<const double> x, double delta2);

/// Minimum of ftilde over sampled points of the sphere |x| = radius, with its argmin.
std::pair<double, std::vector<double>> sphere_minimum(const Potential& pot, double radius);

/// True when the sequence grows by `factor` from its first positive entry to its
/// last, and the last `tail` entries are increasing (strictly if `strict`).
/// In strict mode the log increments over the tail must also shrink by less
/// than a factor 0.9 per step, which separates power-law growth from a ratio
/// converging to a finite limit.
bool divergent_trend(std::span<const double> values, double factor = 10.0, std::size_t tail = 5, bool strict = true);

CriterionReport check_condition_i(const Potential& pot, double delta1, const SamplingPlan& plan);
CriterionReport check_condition_ii(const Potential& pot, double delta2, const SamplingPlan& plan);
CriterionReport check_condition_iii(const Potential& pot, std::span<const double> radii);

struct FullCheckReport {
    std::array<CriterionReport, 3> reports;
    bool holds = false;
    std::string verdict;  // "criterion_holds_on_samples" or "criterion_fails_on_samples"
};

FullCheckReport full_check(const Potential& pot, double delta1, double delta2, const SamplingPlan& plan);

json report_to_json(const CriterionReport& r);
json full_report_to_json(const FullCheckReport& r);

}  // namespace witten
