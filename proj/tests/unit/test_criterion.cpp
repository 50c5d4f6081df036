#include <doctest.h>

#include <cmath>

#include "witten/criterion.hpp"
#include "witten/registry.hpp"

using namespace witten;

namespace {

struct Loaded {
    Potential pot;
    SamplingPlan plan;
};

Loaded load(const std::string& name) {
    auto lp = load_potential(name, 4);
    auto plan = default_plan(lp.potential, lp.source);
    return {lp.potential, plan};
}

}  // namespace

TEST_CASE("condition (i) along the x1-axis for V_0 matches the closed form") {
    const Potential v0 = expand_registered_potential("vdelta:0");
    for (double r : {1.0, 10.0, 1e3, 1e6}) {
        const auto t = condition_i_terms(v0, std::vector<double>{r, 0.0}, 0.1);
        // Hessian diag(0, 2R^2), gradient 0, nonzero derivatives 2R^2, 4R, 4
        const double rhs = std::pow(2 * r * r, 1.9 / 2) + std::pow(4 * r, 1.9 / 3) + std::pow(4.0, 1.9 / 4) + 1.0;
        CHECK(t.lhs == doctest::Approx(2 * r * r).epsilon(1e-12));
        CHECK(t.rhs == doctest::Approx(rhs).epsilon(1e-12));
        CHECK_FALSE(t.auto_satisfied);
    }
}

TEST_CASE("example verdicts") {
    for (const char* name : {"vdelta:1", "vdelta:-1", "vdelta:0.5", "vdelta:-0.5", "phidelta:1", "phidelta:-0.5", "phidelta:2"}) {
        CAPTURE(name);
        const Loaded l = load(name);
        const FullCheckReport r = full_check(l.pot, 0.1, 0.1, l.plan);
        CHECK(r.holds);
        CHECK(r.verdict == "criterion_holds_on_samples");
        CHECK(r.reports[1].best_constant == 0.0);
    }
    {
        const Loaded l = load("vdelta:0");
        const CriterionReport r = check_condition_i(l.pot, 0.1, l.plan);
        CHECK(r.verdict == Verdict::divergence_detected);
        bool x1_axis = false;
        for (const auto& t : r.trend) x1_axis = x1_axis || (t.label == "axis+x1" && t.divergent);
        CHECK(x1_axis);
    }
    {
        const Loaded l = load("phidelta:-1");
        const FullCheckReport r = full_check(l.pot, 0.1, 0.1, l.plan);
        CHECK_FALSE(r.holds);
        CHECK(r.reports[0].verdict == Verdict::divergence_detected);
        for (const auto& w : r.reports[0].witnesses) {
            if (w.source.rfind("path:", 0) != 0) continue;
            CHECK(w.x[0] == 0.0);
            CHECK(w.x[1] < 0.0);
        }
        CHECK(r.reports[0].witnesses.front().x[0] == 0.0);
        CHECK(r.reports[0].witnesses.front().x[1] < 0.0);
    }
}

TEST_CASE("a ratio creeping up to a finite limit is not divergence") {
    std::vector<double> converging, power;
    for (int k = 0; k <= 24; ++k) {
        converging.push_back(2.0 - 1.9 * std::pow(10.0, -0.1 * k));
        power.push_back(0.3 * std::pow(10.0, 0.1 * k));
    }
    CHECK_FALSE(divergent_trend(converging));
    CHECK(divergent_trend(power));
    CHECK_FALSE(divergent_trend(std::vector<double>{1, 2, 3}));
    CHECK(divergent_trend(std::vector<double>{1, 1, 5, 5, 20, 20, 20}, 10.0, 5, false));
}

TEST_CASE("witness values are reproducible and never auto-satisfied") {
    const Loaded l = load("vdelta:-1");
    const CriterionReport r = check_condition_i(l.pot, 0.1, l.plan);
    double best = 0.0;
    for (const auto& w : r.witnesses) {
        const auto t = condition_i_terms(l.pot, w.x, 0.1);
        CHECK(t.lhs == doctest::Approx(w.lhs).epsilon(1e-12));
        CHECK(t.rhs == doctest::Approx(w.rhs).epsilon(1e-12));
        CHECK_FALSE(t.auto_satisfied);
        best = std::max(best, w.ratio);
    }
    CHECK(r.best_constant == doctest::Approx(best));
}

TEST_CASE("condition (ii)") {
    const Potential x6(Polynomial::monomial(MultiIndex(std::vector<int>{6})), 2);
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {2.0, 10.0, 100.0, 1000.0}) {
        const auto [num, den] = condition_ii_terms(x6, std::vector<double>{r}, 0.5);
        CHECK(num == doctest::Approx(120 * r * r * r));
        const double ratio = num / den;
        CHECK(ratio < prev);
        prev = ratio;
    }
    CHECK(prev < 1e-6);

    SamplingPlan plan;
    plan.box = {{-10, 10}};
    plan.grid_points = 21;
    plan.sphere_radii = {1, 2};
    const CriterionReport zero = check_condition_ii(Potential(Polynomial(1), 2), 0.1, plan);
    CHECK(zero.verdict == Verdict::satisfied_on_samples);
    CHECK(zero.best_constant == 0.0);
    CHECK_THROWS_AS(check_condition_ii(x6, 1.5, plan), ArgumentError);
}

TEST_CASE("condition (iii)") {
    std::vector<double> radii;
    for (int i = 0; i <= 12; ++i) radii.push_back(std::pow(2.0, i));
    const Potential harm(Polynomial(1, {{MultiIndex(std::vector<int>{2}), 0.5}}), 2);
    const CriterionReport h = check_condition_iii(harm, radii);
    CHECK(h.verdict == Verdict::divergence_detected);
    for (std::size_t i = 0; i < radii.size(); ++i) CHECK(h.trend[0].ratios[i] == doctest::Approx(radii[i] + 1.0));

    const Potential x1sq(Polynomial(2, {{MultiIndex(std::vector<int>{2, 0}), 1.0}}), 2);
    const CriterionReport v = check_condition_iii(x1sq, radii);
    CHECK(v.verdict == Verdict::violated);
    const auto& arg = v.witnesses.back().x;
    CHECK(std::abs(arg[0]) < 1e-9);
    CHECK(std::abs(std::abs(arg[1]) - radii.back()) < 1e-9);
    CHECK(v.best_constant == doctest::Approx(std::sqrt(2.0)));

    // scaling by 2 does not change the verdict on the example family
    for (const char* name : {"vdelta:1", "vdelta:0", "phidelta:-1"}) {
        const Potential p = expand_registered_potential(name);
        const Potential p2(p.polynomial().scaled(2.0), 4);
        const Loaded l = load(name);
        CHECK(check_condition_iii(p, l.plan.sphere_radii).verdict == check_condition_iii(p2, l.plan.sphere_radii).verdict);
    }
}

TEST_CASE("plans") {
    const Loaded l = load("vdelta:1");
    CHECK(l.plan.mode() == "mixed");
    CHECK(l.plan.seed == 42);
    const SamplingPlan back = plan_from_json(plan_to_json(l.plan), SamplingPlan{});
    CHECK(plan_to_json(back).dump() == plan_to_json(l.plan).dump());
    SamplingPlan empty;
    empty.box = {{-1, 1}};
    CHECK_THROWS_AS(empty.validate(), ArgumentError);
    SamplingPlan bad = l.plan;
    bad.radii = {1, 3, 2};
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    CHECK_THROWS_AS(check_condition_i(l.pot, 0.0, l.plan), ArgumentError);
}

TEST_CASE("reports are deterministic") {
    const Loaded l = load("phidelta:-0.5");
    const auto a = full_report_to_json(full_check(l.pot, 0.1, 0.1, l.plan)).dump();
    const auto b = full_report_to_json(full_check(l.pot, 0.1, 0.1, l.plan)).dump();
    CHECK(a == b);
}
