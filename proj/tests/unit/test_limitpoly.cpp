#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "witten/limitpoly.hpp"
#include "witten/localization.hpp"

using namespace witten;

namespace {

const MultiIndex X2{std::vector<int>{2}};
const MultiIndex X1{std::vector<int>{1}};

Polynomial quad2(double a, double b, double c) {
    return Polynomial(2, {{MultiIndex(std::vector<int>{2, 0}), a},
                          {MultiIndex(std::vector<int>{1, 1}), b},
                          {MultiIndex(std::vector<int>{0, 2}), c}});
}

const std::vector<double> kSchedule{4, 8, 16, 32, 64};

}  // namespace

TEST_CASE("limit of the x^2 family") {
    const Polynomial p = Polynomial::monomial(X2);
    const LimitResult r = limit_polynomial(p, ScalingSequence{{1.0}, 1, 2, 1}, kSchedule);
    REQUIRE(r.status == LimitStatus::converged);
    CHECK(std::abs(r.limit->coefficient(X2) - 1.0) <= 1e-9);
    CHECK(std::abs(r.limit->coefficient(X1) - 2.0) <= 1e-9);
    CHECK(r.limit->degree() <= p.degree());

    const LimitResult d = limit_polynomial(p, ScalingSequence{{1.0}, 1, 3, 1}, kSchedule);
    CHECK(d.status == LimitStatus::divergent);
    CHECK_FALSE(d.offending.empty());
}

TEST_CASE("members agree with the binomial expansion at every j") {
    const Polynomial p(2, {{MultiIndex(std::vector<int>{2, 2}), 1.0}});
    const ScalingSequence seq{{1.0, 0.0}, 1, 6, 2};
    const LimitResult r = limit_polynomial(p, seq, kSchedule);
    for (std::size_t s = 0; s < kSchedule.size(); ++s) {
        const double j = kSchedule[s];
        const Polynomial exact = affine_rescale(p, seq.y(j), seq.h(j), seq.tau(j));
        for (const auto& a : multi_indices_between(2, 1, 4))
            CHECK(r.members[s].coefficient(a) == doctest::Approx(exact.coefficient(a)).epsilon(1e-12).scale(1e-12));
    }
    // (1 + x1/j)^2 x2^2 -> x2^2
    REQUIRE(r.status == LimitStatus::converged);
    CHECK(r.limit->coefficient(MultiIndex(std::vector<int>{0, 2})) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.limit->terms().size() == 1);
}

TEST_CASE("argument checks") {
    const Polynomial p = Polynomial::monomial(X2);
    CHECK_THROWS_AS(limit_polynomial(p, ScalingSequence{{1.0}, 1, 2, 1}, std::vector<double>{1, 2, 3}), ArgumentError);
    CHECK_THROWS_AS(limit_polynomial(p, ScalingSequence{{1.0}, 0, 2, 1}, kSchedule), ArgumentError);
    CHECK_THROWS_AS(no_local_min_certificate(p, 0.5, std::vector<std::vector<double>>{{0.0}}), ArgumentError);
}

TEST_CASE("certificate examples") {
    const Box box{{-3, 3}, {-3, 3}};
    const auto samples = grid_samples(box, 31);
    const Certificate saddle = no_local_min_certificate(quad2(1, 0, -1), 1.0, samples);
    CHECK(saddle.status == CertificateStatus::certified_no_local_min);
    CHECK(grid_local_minima(quad2(1, 0, -1), box, 31).empty());

    const Certificate bowl = no_local_min_certificate(quad2(1, 0, 1), 1.0, std::vector<std::vector<double>>{{0.0, 0.0}});
    CHECK(bowl.status == CertificateStatus::inequality_violated);
    REQUIRE(bowl.violations.size() == 1);
    for (double c : {1.0, 3.0, 100.0}) {
        const Certificate b = no_local_min_certificate(quad2(1, 0, 1), c, samples);
        CHECK(b.status == CertificateStatus::inequality_violated);
        bool origin = false;
        for (const auto& v : b.violations) origin = origin || (v[0] == 0.0 && v[1] == 0.0);
        CHECK(origin);
    }

    const Polynomial q(1, {{X2, 1.0}, {X1, 2.0}});
    const Certificate c1 = no_local_min_certificate(q, 1.0, grid_samples(Box{{-3, 3}}, 61));
    CHECK(c1.status == CertificateStatus::inequality_violated);
    bool at_min = false;
    for (const auto& v : c1.violations) at_min = at_min || std::abs(v[0] + 1.0) < 1e-12;
    CHECK(at_min);
    const auto minima = grid_local_minima(q, Box{{-3, 3}}, 61);
    REQUIRE(minima.size() == 1);
    CHECK(minima[0][0] == doctest::Approx(-1.0));

    CHECK(no_local_min_certificate(Polynomial::constant(2, 3.0), 1.0, samples).status == CertificateStatus::constant_q);
}

TEST_CASE("coefficient field invariants on random quadratics") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 2 + t % 3;
        DenseMatrix h(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) h(i, j) = h(j, i) = nd(gen);
        for (double c : {1.0, 2.5}) {
            const CoefficientField cf = coefficient_field(h, c);
            CHECK(cf.orthogonality_error <= 1e-10);
            CHECK(cf.reconstruction_error <= 1e-9 * (1.0 + h.frobenius_norm()));
            CHECK(cf.min_eigenvalue >= 1.0 - 1e-9);
            for (int k = 0; k < 20; ++k) {
                std::vector<double> eta(n);
                double nrm = 0.0;
                for (auto& e : eta) {
                    e = nd(gen);
                    nrm += e * e;
                }
                double form = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) form += cf.a(i, j) * eta[i] * eta[j];
                CHECK(form >= nrm * (1.0 - 1e-9));
            }
            if (c == 1.0) {
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(cf.a(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
                CHECK(cf.elliptic_term == doctest::Approx(h.trace()));
            }
        }
    }
}

TEST_CASE("hypothesis ratio and stability check") {
    const auto ball = ball_samples(2, 1.0, 400, 42);
    CHECK(ball.front() == std::vector<double>{0.0, 0.0});
    for (const auto& x : ball) CHECK(norm2(x) < 1.0);
    CHECK(hessian_gradient_ratio(quad2(1, 0, -1), ball) == doctest::Approx(1.0));
    CHECK(hessian_gradient_ratio(quad2(0, 1, 0), ball) <= 1.0 + 1e-12);
    CHECK(std::isinf(hessian_gradient_ratio(quad2(1, 0, 1), ball)));

    const Polynomial p = Polynomial::monomial(X2);
    const std::vector<ScalingSequence> catalog{{{1.0}, 1, 2, 1}, {{1.0}, 1, 3, 1}};
    const auto box = grid_samples(Box{{-3, 3}}, 61);
    const StabilityReport r = stability_check(p, 1.0, 1.0, catalog, kSchedule, ball_samples(1, 1.0, 100, 1), box);
    REQUIRE(r.limits.size() == 2);
    // x^2 has a minimum, so neither it nor its limit x^2 + 2x meets the hypothesis
    CHECK_FALSE(r.hypothesis_holds);
    CHECK(r.limits[0].limit.status == LimitStatus::converged);
    CHECK(std::isinf(r.limits[0].c_tilde_estimate));
    CHECK(r.limits[0].grid_minima == 1);
    CHECK(r.limits[1].limit.status == LimitStatus::divergent);
    CHECK_FALSE(r.limits[1].certificate.has_value());

    const std::vector<ScalingSequence> fixed{{{0.0, 0.0}, 1, 2, 1}};
    const StabilityReport s = stability_check(quad2(1, 0, -1), 1.0, 1.0, fixed, kSchedule, ball,
                                              grid_samples(Box{{-2, 2}, {-2, 2}}, 21));
    CHECK(s.hypothesis_holds);
    REQUIRE(s.limits[0].limit.status == LimitStatus::converged);
    CHECK(s.limits[0].c_tilde_estimate == doctest::Approx(1.0));
    REQUIRE(s.limits[0].certificate.has_value());
    CHECK(s.limits[0].certificate->status == CertificateStatus::certified_no_local_min);
    CHECK(s.limits[0].grid_minima == 0);
}

TEST_CASE("critical points between grid nodes are not missed") {
    // x^2 + 2x on a grid that skips x = -1
    const Polynomial q(1, {{X2, 1.0}, {X1, 2.0}});
    const Box box{{-3.1, 2.9}};
    const auto coarse = grid_samples(box, 40);
    for (const auto& x : coarse) CHECK(std::abs(x[0] + 1.0) > 1e-3);
    const double est = hessian_gradient_ratio(q, coarse);
    CHECK(std::isfinite(est));
    CHECK(no_local_min_certificate(q, std::max(1.0, est), coarse).status == CertificateStatus::certified_no_local_min);

    const auto refined = refine_critical_points(q, grid_local_minima(q, box, 40));
    REQUIRE(refined.size() == 1);
    CHECK(refined[0][0] == doctest::Approx(-1.0).epsilon(1e-14));
    const auto samples = certificate_samples(q, box, 40);
    CHECK(samples.size() == coarse.size() + 1);
    CHECK(std::isinf(hessian_gradient_ratio(q, samples)));
    CHECK(no_local_min_certificate(q, 1.0, samples).status == CertificateStatus::inequality_violated);

    // a saddle in 2D refines onto the origin only if it is a grid minimum, which it is not
    CHECK(refine_critical_points(quad2(1, 0, -1), grid_local_minima(quad2(1, 0, -1), Box{{-1.05, 0.95}, {-1.05, 0.95}}, 21)).empty());
    const auto bowl = refine_critical_points(quad2(2, 1, 1), std::vector<std::vector<double>>{{0.3, -0.2}});
    REQUIRE(bowl.size() == 1);
    CHECK(std::abs(bowl[0][0]) < 1e-12);
    CHECK(std::abs(bowl[0][1]) < 1e-12);
}
