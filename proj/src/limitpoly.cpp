#include "witten/limitpoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "witten/errors.hpp"
#include "witten/parallel.hpp"

namespace witten {

std::vector<double> ScalingSequence::y(double j) const {
    std::vector<double> out(v.size());
    const double s = std::pow(j, -a);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * s;
    return out;
}

double ScalingSequence::tau(double j) const { return std::pow(j, b); }
double ScalingSequence::h(double j) const { return std::pow(j, -c); }

void ScalingSequence::validate() const {
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw ArgumentError("power-law exponents a, b, c must be positive");
    if (v.empty()) throw ArgumentError("scaling direction v must have the ambient dimension");
}

std::string ScalingSequence::describe() const {
    std::ostringstream os;
    os << "y=(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ")/j^" << a << ", tau=j^" << b << ", h=j^-" << c;
    return os.str();
}

Polynomial scaled_member(const Polynomial& p, const ScalingSequence& seq, double j) {
    if (seq.v.size() != p.dimension()) throw ArgumentError("scaling direction has wrong dimension");
    const std::vector<double> y = seq.y(j);
    const double tau = seq.tau(j);
    const double h = seq.h(j);
    std::vector<Term> terms;
    for (const auto& alpha : multi_indices_between(p.dimension(), 1, p.degree())) {
        const double d = derive(p, alpha)(y);
        if (d == 0.0) continue;
        terms.push_back(Term{alpha, tau * std::pow(h, alpha.order()) * d / alpha.factorial()});
    }
    return Polynomial(p.dimension(), std::move(terms));
}

std::string to_string(LimitStatus s) {
    switch (s) {
        case LimitStatus::converged: return "converged";
        case LimitStatus::divergent: return "divergent";
        case LimitStatus::indeterminate: return "indeterminate";
    }
    return "?";
}

namespace {

enum class CoeffFate { converged, divergent, unsettled };

struct CoeffOutcome {
    CoeffFate fate = CoeffFate::unsettled;
    double limit = 0.0;
};

std::optional<double> aitken(double c0, double c1, double c2) {
    const double d1 = c1 - c0;
    const double d2 = c2 - c1;
    if (d1 == 0.0) return d2 == 0.0 ? std::optional<double>(c2) : std::nullopt;
    const double rho = d2 / d1;
    if (!(std::abs(rho) < 1.0)) return std::nullopt;
    return c2 + d2 * rho / (1.0 - rho);
}

CoeffOutcome classify(std::span<const double> c, std::span<const double> j, double tol, double scale) {
    const std::size_t n = c.size();
    const double last = c[n - 1];
    if (std::abs(last) > 1.0 / tol || !std::isfinite(last)) return {CoeffFate::divergent, last};

    bool cauchy = true;
    for (std::size_t a = n - 4; a < n && cauchy; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (std::abs(c[a] - c[b]) > tol * scale) {
                cauchy = false;
                break;
            }
    if (cauchy) return {CoeffFate::converged, last};

    const auto l1 = aitken(c[n - 4], c[n - 3], c[n - 2]);
    const auto l2 = aitken(c[n - 3], c[n - 2], c[n - 1]);
    if (l1 && l2 && std::abs(*l1 - *l2) <= tol * scale) return {CoeffFate::converged, *l2};

    bool growing = true;
    for (std::size_t i = n - 3; i < n && growing; ++i) {
        const double prev = std::abs(c[i - 1]);
        const double cur = std::abs(c[i]);
        if (!(prev > 0.0 && cur > prev)) {
            growing = false;
            break;
        }
        const double slope = std::log(cur / prev) / std::log(j[i] / j[i - 1]);
        if (slope < 0.5) growing = false;
    }
    if (growing) return {CoeffFate::divergent, last};
    return {CoeffFate::unsettled, last};
}

}  // namespace

LimitResult limit_polynomial(const Polynomial& p, const ScalingSequence& seq, std::span<const double> j_schedule,
                             double tol) {
    seq.validate();
    if (j_schedule.size() < 4) throw ArgumentError("limit_polynomial needs at least 4 schedule entries");
    for (std::size_t i = 1; i < j_schedule.size(); ++i) {
        if (!(j_schedule[i] > j_schedule[i - 1])) throw ArgumentError("j schedule must be strictly increasing");
    }
    if (j_schedule.front() <= 0.0) throw ArgumentError("j schedule must be positive");
    if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");

    LimitResult out;
    out.schedule.assign(j_schedule.begin(), j_schedule.end());
    for (double j : j_schedule) out.members.push_back(scaled_member(p, seq, j));

    const auto alphas = multi_indices_between(p.dimension(), 1, p.degree());
    double scale = 1.0;
    for (const auto& t : out.members.back().terms()) scale = std::max(scale, std::abs(t.coeff));

    bool any_divergent = false;
    bool all_converged = true;
    std::vector<Term> limit_terms;
    std::vector<double> series(j_schedule.size());
    for (const auto& alpha : alphas) {
        for (std::size_t s = 0; s < series.size(); ++s) series[s] = out.members[s].coefficient(alpha);
        const CoeffOutcome o = classify(series, j_schedule, tol, scale);
        switch (o.fate) {
            case CoeffFate::divergent:
                any_divergent = true;
                out.offending.push_back(alpha);
                break;
            case CoeffFate::unsettled:
                all_converged = false;
                out.offending.push_back(alpha);
                break;
            case CoeffFate::converged:
                if (std::abs(o.limit) > tol * scale) limit_terms.push_back(Term{alpha, o.limit});
                break;
        }
    }
    if (any_divergent) {
        out.status = LimitStatus::divergent;
        out.note = "coefficient sequence grows without bound";
    } else if (all_converged) {
        out.status = LimitStatus::converged;
        out.limit = Polynomial(p.dimension(), std::move(limit_terms));
    } else {
        out.status = LimitStatus::indeterminate;
        out.note = "coefficient sequence neither settles nor grows on the schedule tail";
    }
    return out;
}

std::string to_string(CertificateStatus s) {
    switch (s) {
        case CertificateStatus::certified_no_local_min: return "certified_no_local_min";
        case CertificateStatus::inequality_violated: return "inequality_violated";
        case CertificateStatus::constant_q: return "constant_q";
    }
    return "?";
}

CoefficientField coefficient_field(const DenseMatrix& hess, double c_tilde) {
    const std::size_t n = hess.size();
    CoefficientField cf;
    cf.hess_eigen = jacobi_eigen(hess);
    const SymmetricEigen& e = cf.hess_eigen;
    const double snap = zero_threshold(hess);
    // Q has the eigenvectors as rows, so Q^T diag(lambda) Q = Hess.
    const DenseMatrix q = e.vectors.transposed();
    std::vector<double> b2(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = std::abs(e.values[k]) <= snap ? 0.0 : e.values[k];
        b2[k] = lam > 0.0 ? 1.0 : c_tilde;
    }
    cf.a = DenseMatrix(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b2[k] * q(k, i) * q(k, j);
            cf.a(i, j) = s;
        }
    // keep a exactly symmetric for the inner Jacobi run
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) cf.a(j, i) = cf.a(i, j);
    cf.min_eigenvalue = jacobi_eigen(cf.a).values.front();

    double term = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) term += cf.a(i, j) * hess(i, j);
    cf.elliptic_term = term;

    const DenseMatrix qtq = q.transposed() * q;
    DenseMatrix lam(n);
    for (std::size_t k = 0; k < n; ++k) lam(k, k) = e.values[k];
    const DenseMatrix rec = q.transposed() * lam * q;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cf.orthogonality_error = std::max(cf.orthogonality_error, std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)));
            cf.reconstruction_error = std::max(cf.reconstruction_error, std::abs(rec(i, j) - hess(i, j)));
        }
    return cf;
}

Certificate no_local_min_certificate(const Polynomial& q, double c_tilde, std::span<const std::vector<double>> samples) {
    if (!(c_tilde >= 1.0)) throw ArgumentError("certificate constant C~ must be >= 1");
    Certificate cert;
    cert.q = q;
    cert.c_tilde = c_tilde;
    cert.sample_count = samples.size();
    if (q.is_constant()) {
        cert.status = CertificateStatus::constant_q;
        return cert;
    }
    const std::size_t n = q.dimension();
    const auto grad = gradient(q);
    const auto hess = hessian(q);
    cert.min_a_eigenvalue = std::numeric_limits<double>::infinity();
    cert.max_margin = -std::numeric_limits<double>::infinity();
    for (const auto& x : samples) {
        if (x.size() != n) throw ArgumentError("certificate sample has wrong dimension");
        DenseMatrix h(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h(i, j) = hess(i, j)(x);
        double g2 = 0.0;
        for (const auto& g : grad) {
            const double v = g(x);
            g2 += v * v;
        }
        const CoefficientField cf = coefficient_field(h, c_tilde);
        const double margin = cf.elliptic_term - c_tilde * g2;
        cert.min_a_eigenvalue = std::min(cert.min_a_eigenvalue, cf.min_eigenvalue);
        cert.max_margin = std::max(cert.max_margin, margin);
        cert.max_orthogonality_error = std::max(cert.max_orthogonality_error, cf.orthogonality_error);
        cert.max_reconstruction_error = std::max(cert.max_reconstruction_error, cf.reconstruction_error);
        if (cf.min_eigenvalue < 1.0 - 1e-9 || margin > 1e-9) cert.violations.push_back(x);
    }
    cert.status = cert.violations.empty() ? CertificateStatus::certified_no_local_min
                                          : CertificateStatus::inequality_violated;
    return cert;
}

std::vector<std::vector<double>> grid_samples(std::span<const std::pair<double, double>> box, std::size_t points) {
    if (box.empty() || points < 2) throw ArgumentError("grid needs a box and at least 2 points per dimension");
    const std::size_t n = box.size();
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        std::vector<double> x(n);
        for (std::size_t d = 0; d < n; ++d) {
            x[d] = box[d].first + (box[d].second - box[d].first) * static_cast<double>(idx[d]) /
                                      static_cast<double>(points - 1);
        }
        out.push_back(std::move(x));
        std::size_t d = 0;
        while (d < n && ++idx[d] == points) idx[d++] = 0;
        if (d == n) break;
    }
    return out;
}

std::vector<std::vector<double>> ball_samples(std::size_t n, double sigma, std::size_t count, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw ArgumentError("ball radius must be positive");
    std::vector<std::vector<double>> out;
    out.emplace_back(n, 0.0);
    Rng rng(seed);
    while (out.size() < count) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-sigma, sigma);
        if (norm2(x) < sigma) out.push_back(std::move(x));
    }
    return out;
}

std::vector<std::vector<double>> refine_critical_points(const Polynomial& q,
                                                        std::span<const std::vector<double>> starts) {
    const std::size_t n = q.dimension();
    const auto grad = gradient(q);
    const PolyMatrix hess = hessian(q);
    std::vector<std::vector<double>> out;
    for (auto x : starts) {
        bool done = false;
        for (int it = 0; it < 60 && !done; ++it) {
            std::vector<double> g(n);
            double gn = 0.0, scale = 1.0;
            for (std::size_t d = 0; d < n; ++d) {
                g[d] = eval(grad[d], x);
                gn = std::max(gn, std::abs(g[d]));
            }
            DenseMatrix h(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    h(i, j) = eval(hess(i, j), x);
                    scale = std::max(scale, std::abs(h(i, j)));
                }
            if (gn <= 1e-13 * scale * (1.0 + norm2(x))) {
                done = true;
                break;
            }
            // step = -H^+ g, dropping directions with negligible curvature
            const SymmetricEigen e = jacobi_eigen(h);
            std::vector<double> step(n, 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                if (std::abs(e.values[k]) <= 1e-12 * scale) continue;
                double c = 0.0;
                for (std::size_t d = 0; d < n; ++d) c += e.vectors(d, k) * g[d];
                for (std::size_t d = 0; d < n; ++d) step[d] -= c / e.values[k] * e.vectors(d, k);
            }
            for (std::size_t d = 0; d < n; ++d) x[d] += step[d];
        }
        if (done) out.push_back(std::move(x));
    }
    return out;
}

std::vector<std::vector<double>> certificate_samples(const Polynomial& q, std::span<const std::pair<double, double>> box,
                                                     std::size_t points) {
    auto samples = grid_samples(box, points);
    for (auto& x : refine_critical_points(q, grid_local_minima(q, box, points))) samples.push_back(std::move(x));
    return samples;
}

std::vector<std::vector<double>> grid_local_minima(const Polynomial& q, std::span<const std::pair<double, double>> box,
                                                   std::size_t points) {
    const std::size_t n = box.size();
    if (n != q.dimension()) throw ArgumentError("box dimension differs from polynomial dimension");
    const auto nodes = grid_samples(box, points);
    std::vector<double> values(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = q(nodes[i]);

    std::vector<std::size_t> stride(n, 1);
    for (std::size_t d = 1; d < n; ++d) stride[d] = stride[d - 1] * points;
    std::size_t neighbours = 1;
    for (std::size_t d = 0; d < n; ++d) neighbours *= 3;

    std::vector<std::vector<double>> minima;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::vector<std::size_t> idx(n);
        bool interior = true;
        for (std::size_t d = 0; d < n; ++d) {
            idx[d] = (i / stride[d]) % points;
            if (idx[d] == 0 || idx[d] + 1 == points) interior = false;
        }
        if (!interior) continue;
        bool is_min = true;
        for (std::size_t k = 0; k < neighbours && is_min; ++k) {
            std::size_t code = k;
            std::size_t other = i;
            bool self = true;
            for (std::size_t d = 0; d < n; ++d) {
                const int off = static_cast<int>(code % 3) - 1;
                code /= 3;
                if (off != 0) self = false;
                other = static_cast<std::size_t>(static_cast<long long>(other) + off * static_cast<long long>(stride[d]));
            }
            if (!self && values[other] < values[i]) is_min = false;
        }
        // a flat neighbourhood is a plateau, not a detected minimum
        if (is_min) {
            bool strict_somewhere = false;
            for (std::size_t d = 0; d < n; ++d) {
                if (values[i - stride[d]] > values[i] || values[i + stride[d]] > values[i]) strict_somewhere = true;
            }
            if (strict_somewhere) minima.push_back(nodes[i]);
        }
    }
    return minima;
}

double hessian_gradient_ratio(const Polynomial& p, std::span<const std::vector<double>> samples) {
    const std::size_t n = p.dimension();
    const auto grad = gradient(p);
    const auto hess = hessian(p);
    double sup = 0.0;
    for (const auto& x : samples) {
        DenseMatrix h(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h(i, j) = hess(i, j)(x);
        const SymmetricEigen e = jacobi_eigen(h);
        const double snap = zero_threshold(h);
        double pos = 0.0;
        double neg = 0.0;
        for (double lam : e.values) {
            if (std::abs(lam) <= snap) continue;
            if (lam > 0.0) pos += lam;
            else neg -= lam;
        }
        double g2 = 0.0;
        for (const auto& g : grad) {
            const double v = g(x);
            g2 += v * v;
        }
        const double denom = neg + g2;
        double ratio = 0.0;
        if (pos > 0.0) ratio = denom > 0.0 ? pos / denom : std::numeric_limits<double>::infinity();
        sup = std::max(sup, ratio);
    }
    return sup;
}

StabilityReport stability_check(const Polynomial& p, double sigma, double c, std::span<const ScalingSequence> catalog,
                                std::span<const double> j_schedule, std::span<const std::vector<double>> ball_points,
                                std::span<const std::vector<double>> box_points) {
    if (!(sigma > 0.0) || !(c > 0.0)) throw ArgumentError("stability_check requires sigma > 0 and C > 0");
    for (const auto& x : ball_points) {
        if (norm2(x) >= sigma) throw ArgumentError("hypothesis sample lies outside B_sigma");
    }
    StabilityReport r;
    r.sigma = sigma;
    r.hypothesis_c = c;
    r.hypothesis_constant = hessian_gradient_ratio(p, ball_points);
    r.hypothesis_holds = r.hypothesis_constant <= c;
    for (const auto& seq : catalog) {
        LimitCheck lc;
        lc.sequence = seq;
        lc.limit = limit_polynomial(p, seq, j_schedule);
        if (lc.limit.status == LimitStatus::converged) {
            const Polynomial& q = *lc.limit.limit;
            std::vector<std::vector<double>> samples(box_points.begin(), box_points.end());
            if (!box_points.empty()) {
                // brute-force minima on the bounding box of the samples, at matching density
                const std::size_t n = q.dimension();
                std::vector<std::pair<double, double>> bounds(n, {box_points[0][0], box_points[0][0]});
                for (std::size_t d = 0; d < n; ++d) bounds[d] = {box_points[0][d], box_points[0][d]};
                for (const auto& x : box_points)
                    for (std::size_t d = 0; d < n; ++d)
                        bounds[d] = {std::min(bounds[d].first, x[d]), std::max(bounds[d].second, x[d])};
                const auto per_dim = static_cast<std::size_t>(
                    std::lround(std::pow(static_cast<double>(box_points.size()), 1.0 / static_cast<double>(n))));
                const auto minima = grid_local_minima(q, bounds, std::max<std::size_t>(per_dim, 3));
                lc.grid_minima = minima.size();
                for (auto& x : refine_critical_points(q, minima)) samples.push_back(std::move(x));
            }
            lc.c_tilde_estimate = hessian_gradient_ratio(q, samples);
            const double c_tilde = std::isfinite(lc.c_tilde_estimate) ? std::max(1.0, lc.c_tilde_estimate) : 1.0;
            lc.certificate = no_local_min_certificate(q, c_tilde, samples);
        }
        r.limits.push_back(std::move(lc));
    }
    return r;
}

json limit_result_to_json(const LimitResult& r) {
    json members = json::array();
    for (std::size_t i = 0; i < r.members.size(); ++i) {
        members.push_back({{"j", r.schedule[i]}, {"polynomial", polynomial_to_json(r.members[i])}});
    }
    json offending = json::array();
    for (const auto& a : r.offending) offending.push_back(a.exponents());
    json j = {{"status", to_string(r.status)}, {"members", members}, {"offending_exponents", offending}};
    j["limit"] = r.limit ? polynomial_to_json(*r.limit) : json(nullptr);
    if (r.limit) j["limit_text"] = r.limit->to_string();
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

json certificate_to_json(const Certificate& c) {
    json viol = json::array();
    for (const auto& x : c.violations) viol.push_back(x);
    return {{"q", polynomial_to_json(c.q)},
            {"q_text", c.q.to_string()},
            {"c_tilde", c.c_tilde},
            {"status", to_string(c.status)},
            {"sample_count", c.sample_count},
            {"min_a_eigenvalue", c.status == CertificateStatus::constant_q ? json(nullptr) : json(c.min_a_eigenvalue)},
            {"max_margin", c.status == CertificateStatus::constant_q ? json(nullptr) : json(c.max_margin)},
            {"max_orthogonality_error", c.max_orthogonality_error},
            {"max_reconstruction_error", c.max_reconstruction_error},
            {"violations", viol}};
}

json stability_report_to_json(const StabilityReport& r) {
    json limits = json::array();
    for (const auto& lc : r.limits) {
        json e = {{"sequence", lc.sequence.describe()}, {"limit", limit_result_to_json(lc.limit)}};
        if (lc.certificate) {
            e["c_tilde_estimate"] = lc.c_tilde_estimate;
            e["certificate"] = certificate_to_json(*lc.certificate);
            e["grid_local_minima"] = lc.grid_minima;
        }
        limits.push_back(e);
    }
    return {{"sigma", r.sigma},
            {"hypothesis_c", r.hypothesis_c},
            {"hypothesis_constant", r.hypothesis_constant},
            {"hypothesis_holds", r.hypothesis_holds},
            {"limits", limits},
            {"disclaimer", "power-law catalog only; the set of limiting polynomials may be larger"}};
}

}  // namespace witten
