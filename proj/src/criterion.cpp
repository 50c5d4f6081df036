#include "witten/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "witten/errors.hpp"
#include "witten/parallel.hpp"

namespace witten {

std::vector<double> SamplePath::point_at(double radius) const {
    std::vector<double> x(origin.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = origin[i] + radius * direction[i];
        if (!curvature.empty()) x[i] += radius * radius * curvature[i];
    }
    return x;
}

bool SamplePath::curved() const {
    return std::any_of(curvature.begin(), curvature.end(), [](double c) { return c != 0.0; });
}

std::string SamplingPlan::mode() const {
    const int enabled = (grid_points > 0) + (random_count > 0) + (!paths.empty() && !radii.empty());
    if (enabled > 1) return "mixed";
    if (grid_points > 0) return "grid";
    if (random_count > 0) return "random";
    return "rays";
}

std::size_t SamplingPlan::sample_count() const {
    std::size_t count = random_count + paths.size() * radii.size();
    if (grid_points > 0) {
        std::size_t g = 1;
        for (std::size_t d = 0; d < dimension(); ++d) g *= grid_points;
        count += g;
    }
    return count;
}

void SamplingPlan::validate() const {
    if (box.empty()) throw ArgumentError("sampling plan has no box");
    for (const auto& [lo, hi] : box) {
        if (!(lo < hi)) throw ArgumentError("sampling box bounds must satisfy lo < hi");
    }
    if (grid_points == 1) throw ArgumentError("grid needs at least 2 points per dimension");
    auto strictly_increasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return true;
    };
    if (!strictly_increasing(radii)) throw ArgumentError("radii schedule must be strictly increasing");
    if (!strictly_increasing(sphere_radii)) throw ArgumentError("sphere radii schedule must be strictly increasing");
    for (const auto& p : paths) {
        if (p.origin.size() != dimension() || p.direction.size() != dimension() ||
            (!p.curvature.empty() && p.curvature.size() != dimension())) {
            throw ArgumentError("sample path '" + p.label + "' has wrong dimension");
        }
    }
    if (sample_count() == 0) throw ArgumentError("sampling plan is empty");
}

std::vector<SamplePath> default_paths(std::size_t n, const PotentialSource& source) {
    std::vector<SamplePath> paths;
    const std::vector<double> zero(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> d(n, 0.0);
            d[i] = s;
            paths.push_back({std::string("axis") + (s > 0 ? "+" : "-") + "x" + std::to_string(i + 1), zero, d, {}});
        }
    }
    if (n >= 2) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::vector<double> d(n);
            std::string label = "diag";
            for (std::size_t i = 0; i < n; ++i) {
                const bool neg = (mask >> i) & 1u;
                d[i] = neg ? -scale : scale;
                label += neg ? "-" : "+";
            }
            paths.push_back({label, zero, d, {}});
        }
    }
    if (n != 2) return paths;

    if (source.family == ExampleFamily::vdelta && source.delta < 0.0) {
        const double a = std::sqrt(-source.delta);
        for (std::size_t fixed = 0; fixed < 2; ++fixed) {
            for (double off : {a, -a}) {
                for (double s : {1.0, -1.0}) {
                    std::vector<double> o(2, 0.0);
                    std::vector<double> d(2, 0.0);
                    o[fixed] = off;
                    d[1 - fixed] = s;
                    std::ostringstream label;
                    label << "locus x" << fixed + 1 << "=" << off << (s > 0 ? " +" : " -") << "x" << 2 - fixed;
                    paths.push_back({label.str(), o, d, {}});
                }
            }
        }
    }
    if (source.family == ExampleFamily::phidelta) {
        std::vector<double> curvatures{1.0};
        if (1.0 + source.delta != 0.0) curvatures.push_back(1.0 / (1.0 + source.delta));
        for (double c : curvatures) {
            for (double s : {1.0, -1.0}) {
                std::ostringstream label;
                label << "parabola x2=" << c << "*x1^2" << (s > 0 ? " +" : " -");
                paths.push_back({label.str(), zero, {s, 0.0}, {0.0, c}});
            }
        }
    }
    return paths;
}

std::vector<double> default_radii(int degree) {
    const int cap = std::min(24, 120 / std::max(degree, 1));
    std::vector<double> r;
    for (int e = 0; e <= cap; ++e) r.push_back(std::pow(10.0, e));
    return r;
}

SamplingPlan default_plan(const Potential& pot, const PotentialSource& source) {
    const std::size_t n = pot.dimension();
    SamplingPlan plan;
    plan.box.assign(n, {-10.0, 10.0});
    plan.grid_points = n <= 2 ? 41 : (n == 3 ? 21 : 7);
    plan.random_count = 1000;
    plan.paths = default_paths(n, source);
    plan.radii = default_radii(pot.polynomial().degree());
    for (int e = 0; e <= 16; ++e) plan.sphere_radii.push_back(std::ldexp(1.0, e));
    return plan;
}

json plan_to_json(const SamplingPlan& plan) {
    json box = json::array();
    for (const auto& [lo, hi] : plan.box) box.push_back({lo, hi});
    json paths = json::array();
    for (const auto& p : plan.paths) {
        json jp = {{"label", p.label}, {"origin", p.origin}, {"direction", p.direction}};
        if (!p.curvature.empty()) jp["curvature"] = p.curvature;
        paths.push_back(jp);
    }
    return {{"mode", plan.mode()},
            {"box", box},
            {"grid_points", plan.grid_points},
            {"random_count", plan.random_count},
            {"paths", paths},
            {"radii", plan.radii},
            {"sphere_radii", plan.sphere_radii},
            {"seed", plan.seed}};
}

SamplingPlan plan_from_json(const json& j, const SamplingPlan& defaults) {
    SamplingPlan plan = defaults;
    try {
        if (j.contains("box")) {
            plan.box.clear();
            for (const auto& b : j.at("box")) plan.box.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
        }
        if (j.contains("grid_points")) plan.grid_points = j.at("grid_points").get<std::size_t>();
        if (j.contains("random_count")) plan.random_count = j.at("random_count").get<std::size_t>();
        if (j.contains("radii")) plan.radii = j.at("radii").get<std::vector<double>>();
        if (j.contains("sphere_radii")) plan.sphere_radii = j.at("sphere_radii").get<std::vector<double>>();
        if (j.contains("seed")) plan.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("paths")) {
            plan.paths.clear();
            for (const auto& jp : j.at("paths")) {
                SamplePath p;
                p.label = jp.value("label", std::string("path") + std::to_string(plan.paths.size()));
                p.direction = jp.at("direction").get<std::vector<double>>();
                p.origin = jp.contains("origin") ? jp.at("origin").get<std::vector<double>>()
                                                 : std::vector<double>(p.direction.size(), 0.0);
                if (jp.contains("curvature")) p.curvature = jp.at("curvature").get<std::vector<double>>();
                plan.paths.push_back(std::move(p));
            }
        }
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("malformed sampling plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::i: return "i";
        case Condition::ii: return "ii";
        case Condition::iii: return "iii";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::satisfied_on_samples: return "satisfied_on_samples";
        case Verdict::divergence_detected: return "divergence_detected";
        case Verdict::violated: return "violated";
    }
    return "?";
}

bool CriterionReport::passed() const {
    if (condition == Condition::iii) return verdict == Verdict::divergence_detected;
    return verdict == Verdict::satisfied_on_samples;
}

ConditionOneTerms condition_i_terms(const Potential& pot, std::span<const double> x, double delta1) {
    const PointAnalysis pa = analyze_point(pot, x);
    ConditionOneTerms t;
    t.lhs = pa.pos_sum;
    double rhs = pa.m_neg + pa.grad_norm_sq() + 1.0;
    for (int m = 2; m <= pot.k(); ++m) {
        const double e = (2.0 - delta1) / m;
        for (const auto& d : pot.derivatives_of_order(m)) rhs += std::pow(std::abs(d.poly(x)), e);
    }
    t.rhs = rhs;
    t.laplacian = pot.laplacian()(x);
    t.auto_satisfied = t.laplacian <= 0.0;
    return t;
}

std::pair<double, double> condition_ii_terms(const Potential& pot, std::span<const double> x, double delta2) {
    double worst = 0.0;
    for (const auto& d : pot.derivatives_of_order(pot.k() + 1)) worst = std::max(worst, std::abs(d.poly(x)));
    const double rhs = std::pow(1.0 + ftilde(pot, x), pot.k() + 1 - delta2);
    return {worst, rhs};
}

namespace {

std::vector<std::vector<double>> sphere_directions(std::size_t n) {
    std::vector<std::vector<double>> dirs;
    if (n == 1) return {{1.0}, {-1.0}};
    if (n == 2) {
        constexpr int count = 720;
        for (int k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * k / count;
            dirs.push_back({std::cos(t), std::sin(t)});
        }
        // exact axis points, where cos/sin of multiples of pi/2 would round
        dirs[0] = {1.0, 0.0};
        dirs[count / 4] = {0.0, 1.0};
        dirs[count / 2] = {-1.0, 0.0};
        dirs[3 * count / 4] = {0.0, -1.0};
        return dirs;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> d(n, 0.0);
            d[i] = s;
            dirs.push_back(d);
        }
    }
    if (n == 3) {
        constexpr int count = 2000;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(1.0 - z * z);
            dirs.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
        }
        return dirs;
    }
    Rng rng(0x5EED5EEDULL);
    for (int k = 0; k < 4000; ++k) {
        std::vector<double> d(n);
        for (auto& v : d) v = rng.normal();
        const double nrm = norm2(d);
        for (auto& v : d) v /= nrm;
        dirs.push_back(d);
    }
    return dirs;
}

struct Sample {
    std::vector<double> x;
    int path = -1;
    int radius_index = -1;
    std::string source;
};

std::vector<Sample> build_samples(const SamplingPlan& plan, std::size_t n) {
    std::vector<Sample> samples;
    if (plan.grid_points > 0) {
        std::vector<std::size_t> idx(n, 0);
        const std::size_t g = plan.grid_points;
        while (true) {
            std::vector<double> x(n);
            for (std::size_t d = 0; d < n; ++d) {
                const auto [lo, hi] = plan.box[d];
                x[d] = lo + (hi - lo) * static_cast<double>(idx[d]) / static_cast<double>(g - 1);
            }
            samples.push_back({std::move(x), -1, -1, "grid"});
            std::size_t d = 0;
            while (d < n && ++idx[d] == g) idx[d++] = 0;
            if (d == n) break;
        }
    }
    Rng rng(plan.seed);
    for (std::size_t s = 0; s < plan.random_count; ++s) {
        std::vector<double> x(n);
        for (std::size_t d = 0; d < n; ++d) x[d] = rng.uniform(plan.box[d].first, plan.box[d].second);
        samples.push_back({std::move(x), -1, -1, "random"});
    }
    // Curved paths grow like R^2, so they only use the first half of the exponent range.
    for (std::size_t p = 0; p < plan.paths.size(); ++p) {
        const auto& path = plan.paths[p];
        const double limit = path.curved() ? std::sqrt(plan.radii.empty() ? 0.0 : plan.radii.back()) : INFINITY;
        for (std::size_t r = 0; r < plan.radii.size(); ++r) {
            if (plan.radii[r] > limit) break;
            samples.push_back({path.point_at(plan.radii[r]), static_cast<int>(p), static_cast<int>(r),
                               "path:" + path.label});
        }
    }
    return samples;
}

struct Evaluated {
    double lhs = 0.0;
    double rhs = 1.0;
    double ratio = 0.0;
    bool witness_eligible = true;
};

constexpr std::size_t kTopWitnesses = 10;
constexpr std::size_t kTailWitnesses = 5;

CriterionReport run_sampled(Condition condition, double parameter, const SamplingPlan& plan, std::size_t n,
                            const std::function<Evaluated(std::span<const double>)>& eval_fn) {
    plan.validate();
    if (plan.dimension() != n) throw ArgumentError("sampling plan dimension differs from potential dimension");
    const std::vector<Sample> samples = build_samples(plan, n);
    std::vector<Evaluated> results(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { results[i] = eval_fn(samples[i].x); });

    CriterionReport report;
    report.condition = condition;
    report.parameter = parameter;
    report.sample_count = samples.size();

    double best = 0.0;
    for (const auto& r : results) best = std::max(best, r.ratio);
    report.best_constant = best;

    std::vector<std::size_t> chosen;
    report.trend.resize(plan.paths.size());
    for (std::size_t p = 0; p < plan.paths.size(); ++p) report.trend[p].label = plan.paths[p].label;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].path < 0) continue;
        auto& t = report.trend[static_cast<std::size_t>(samples[i].path)];
        t.radii.push_back(plan.radii[static_cast<std::size_t>(samples[i].radius_index)]);
        t.ratios.push_back(results[i].ratio);
    }
    bool any_divergent = false;
    for (std::size_t p = 0; p < report.trend.size(); ++p) {
        auto& t = report.trend[p];
        t.divergent = divergent_trend(t.ratios);
        if (!t.divergent) continue;
        any_divergent = true;
        std::size_t seen = 0;
        for (std::size_t i = samples.size(); i-- > 0 && seen < kTailWitnesses;) {
            if (samples[i].path == static_cast<int>(p) && results[i].witness_eligible) {
                chosen.push_back(i);
                ++seen;
            }
        }
    }

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].ratio > results[b].ratio; });
    std::size_t taken = 0;
    for (std::size_t i : order) {
        if (taken == kTopWitnesses) break;
        if (!results[i].witness_eligible) continue;
        chosen.push_back(i);
        ++taken;
    }
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    std::stable_sort(chosen.begin(), chosen.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].ratio > results[b].ratio; });
    for (std::size_t i : chosen) {
        report.witnesses.push_back({samples[i].x, results[i].lhs, results[i].rhs, results[i].ratio, samples[i].source});
    }

    if (!std::isfinite(best)) {
        report.verdict = Verdict::violated;
        report.note = "non-finite ratio encountered";
    } else if (any_divergent) {
        report.verdict = Verdict::divergence_detected;
    } else {
        report.verdict = Verdict::satisfied_on_samples;
    }
    return report;
}

}  // namespace

std::pair<double, std::vector<double>> sphere_minimum(const Potential& pot, double radius) {
    static thread_local std::size_t cached_n = 0;
    static thread_local std::vector<std::vector<double>> dirs;
    if (cached_n != pot.dimension()) {
        dirs = sphere_directions(pot.dimension());
        cached_n = pot.dimension();
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg;
    std::vector<double> x(pot.dimension());
    for (const auto& d : dirs) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = radius * d[i];
        const double v = ftilde(pot, x);
        if (v < best) {
            best = v;
            arg = x;
        }
    }
    return {best, arg};
}

bool divergent_trend(std::span<const double> values, double factor, std::size_t tail, bool strict) {
    if (values.size() < std::max<std::size_t>(tail, 2)) return false;
    auto first = std::find_if(values.begin(), values.end(), [](double v) { return v > 0.0; });
    if (first == values.end()) return false;
    if (!(values.back() >= factor * *first)) return false;
    for (std::size_t i = values.size() - tail + 1; i < values.size(); ++i) {
        if (strict ? !(values[i] > values[i - 1]) : !(values[i] >= values[i - 1])) return false;
    }
    if (!strict || tail < 3) return true;
    // Power-law growth on a geometric schedule has constant log increments; a
    // ratio creeping up to a finite limit has geometrically shrinking ones.
    const std::size_t last = values.size() - 1;
    const double d_first = std::log(values[last - tail + 2] / values[last - tail + 1]);
    const double d_last = std::log(values[last] / values[last - 1]);
    return std::pow(d_last / d_first, 1.0 / static_cast<double>(tail - 2)) >= 0.9;
}

CriterionReport check_condition_i(const Potential& pot, double delta1, const SamplingPlan& plan) {
    if (!(delta1 > 0.0 && delta1 < 1.0)) throw ArgumentError("delta1 must lie in (0, 1)");
    return run_sampled(Condition::i, delta1, plan, pot.dimension(), [&](std::span<const double> x) {
        const auto t = condition_i_terms(pot, x, delta1);
        return Evaluated{t.lhs, t.rhs, t.lhs / t.rhs, !t.auto_satisfied};
    });
}

CriterionReport check_condition_ii(const Potential& pot, double delta2, const SamplingPlan& plan) {
    if (!(delta2 > 0.0 && delta2 < 1.0)) throw ArgumentError("delta2 must lie in (0, 1)");
    if (pot.polynomial().degree() <= pot.k()) {
        plan.validate();
        CriterionReport r;
        r.condition = Condition::ii;
        r.verdict = Verdict::satisfied_on_samples;
        r.best_constant = 0.0;
        r.parameter = delta2;
        r.note = "degree(V) <= k: every derivative of order k+1 vanishes";
        return r;
    }
    return run_sampled(Condition::ii, delta2, plan, pot.dimension(), [&](std::span<const double> x) {
        const auto [lhs, rhs] = condition_ii_terms(pot, x, delta2);
        return Evaluated{lhs, rhs, lhs / rhs, true};
    });
}

CriterionReport check_condition_iii(const Potential& pot, std::span<const double> radii) {
    if (radii.empty()) throw ArgumentError("condition (iii) needs a radii schedule");
    for (std::size_t i = 1; i < radii.size(); ++i) {
        if (!(radii[i] > radii[i - 1])) throw ArgumentError("radii schedule must be strictly increasing");
    }
    CriterionReport report;
    report.condition = Condition::iii;
    PathTrend trend;
    trend.label = "sphere minima of ftilde";
    std::vector<std::vector<double>> argmins;
    for (double r : radii) {
        auto [m, arg] = sphere_minimum(pot, r);
        trend.radii.push_back(r);
        trend.ratios.push_back(m);
        argmins.push_back(std::move(arg));
    }
    report.sample_count = radii.size();
    const std::size_t tail = std::min<std::size_t>(5, radii.size());
    trend.divergent = divergent_trend(trend.ratios, 10.0, tail, false);
    report.best_constant = trend.ratios.back();
    const double first = trend.ratios.front();
    for (std::size_t i = 0; i < radii.size(); ++i) {
        report.witnesses.push_back({argmins[i], trend.ratios[i], radii[i], first > 0 ? trend.ratios[i] / first : 0.0,
                                    "sphere argmin"});
    }
    if (trend.divergent) {
        report.verdict = Verdict::divergence_detected;
    } else {
        report.verdict = Verdict::violated;
        std::vector<double> dir = argmins.back();
        const double nrm = norm2(dir);
        for (auto& v : dir) v /= nrm;
        std::ostringstream os;
        os.precision(6);
        os << "ftilde stays bounded along direction (";
        for (std::size_t i = 0; i < dir.size(); ++i) os << (i ? ", " : "") << dir[i];
        os << ")";
        report.note = os.str();
    }
    report.trend.push_back(std::move(trend));
    return report;
}

FullCheckReport full_check(const Potential& pot, double delta1, double delta2, const SamplingPlan& plan) {
    FullCheckReport out;
    out.reports[0] = check_condition_i(pot, delta1, plan);
    out.reports[1] = check_condition_ii(pot, delta2, plan);
    out.reports[2] = check_condition_iii(pot, plan.sphere_radii);
    out.holds = std::all_of(out.reports.begin(), out.reports.end(), [](const auto& r) { return r.passed(); });
    out.verdict = out.holds ? "criterion_holds_on_samples" : "criterion_fails_on_samples";
    return out;
}

json report_to_json(const CriterionReport& r) {
    json witnesses = json::array();
    for (const auto& w : r.witnesses) {
        witnesses.push_back({{"x", w.x}, {"lhs", w.lhs}, {"rhs", w.rhs}, {"ratio", w.ratio}, {"source", w.source}});
    }
    json trend = json::array();
    for (const auto& t : r.trend) {
        trend.push_back({{"label", t.label}, {"radii", t.radii}, {"values", t.ratios}, {"divergent", t.divergent}});
    }
    json j = {{"condition", to_string(r.condition)},
              {"verdict", to_string(r.verdict)},
              {"passed", r.passed()},
              {"best_constant", r.best_constant},
              {"parameter", r.parameter},
              {"sample_count", r.sample_count},
              {"witnesses", witnesses},
              {"trend", trend}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

json full_report_to_json(const FullCheckReport& r) {
    json conditions = json::array();
    for (const auto& c : r.reports) conditions.push_back(report_to_json(c));
    return {{"verdict", r.verdict}, {"holds", r.holds}, {"conditions", conditions}};
}

}  // namespace witten
