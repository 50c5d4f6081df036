#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "witten/registry.hpp"
#include "witten/spectral.hpp"

using namespace witten;
using namespace oracle;

namespace {

Potential harmonic1() { return Potential(Polynomial(1, {{MultiIndex(std::vector<int>{2}), 0.5}}), 2); }

SparseSymOperator random_operator(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
    std::vector<std::map<std::size_t, double>> rows(dim);
    for (std::size_t i = 0; i < dim; ++i) rows[i][i] = 4.0 * ud(gen);
    for (std::size_t e = 0; e < 3 * dim; ++e) {
        const std::size_t i = pick(gen), j = pick(gen);
        if (i == j) continue;
        const double v = ud(gen);
        rows[i][j] += v;
        rows[j][i] += v;
    }
    SparseSymOperator op;
    op.dimension = dim;
    op.row_start.push_back(0);
    for (const auto& r : rows) {
        for (const auto& [c, v] : r) {
            op.column.push_back(c);
            op.value.push_back(v);
        }
        op.row_start.push_back(op.column.size());
    }
    op.symmetric = true;
    return op;
}

}  // namespace

TEST_CASE("V = 0 reproduces the discrete Dirichlet Laplacian") {
    const Potential zero(Polynomial(1), 2);
    const std::size_t m = 63;
    const Grid grid(Box{{0, 1}}, m + 2);
    REQUIRE(grid.unknowns() == m);
    const SparseSymOperator op = assemble_witten(zero, 1.0, grid);
    CHECK(op.symmetric);
    const auto expected = discrete_laplacian_spectrum(m);
    const Eigen::VectorXd ev = dense_eigenvalues(op);
    for (std::size_t k = 0; k < m; ++k) CHECK(ev(static_cast<Eigen::Index>(k)) == doctest::Approx(expected[k]).epsilon(1e-10));

    // tensor product in 2D
    const std::size_t m2 = 15;
    const Potential zero2(Polynomial(2), 2);
    const SparseSymOperator op2 = assemble_witten(zero2, 1.0, Grid(Box{{0, 1}, {0, 1}}, m2 + 2));
    const auto one = discrete_laplacian_spectrum(m2);
    std::vector<double> sums;
    for (double a : one)
        for (double b : one) sums.push_back(a + b);
    std::sort(sums.begin(), sums.end());
    const Eigen::VectorXd ev2 = dense_eigenvalues(op2);
    for (std::size_t k = 0; k < sums.size(); ++k) CHECK(ev2(static_cast<Eigen::Index>(k)) == doctest::Approx(sums[k]).epsilon(1e-10));
}

TEST_CASE("diagonal entries and quadratic form") {
    const Potential v = expand_registered_potential("vdelta:0.5");
    const double tau = 1.7;
    const Grid grid(Box{{-2, 2}, {-1, 1.5}}, std::vector<std::size_t>{23, 19});
    const SparseSymOperator op = assemble_witten(v, tau, grid);
    CHECK(op.asymmetry() <= 1e-13);
    const double hx = grid.spacing()[0], hy = grid.spacing()[1];
    for (std::size_t i = 0; i < grid.unknowns(); i += 7) {
        const auto x = grid.coordinates(i);
        // V = x^2 y^2 + d (x^2 + y^2)
        const double gx = 2 * x[0] * x[1] * x[1] + 2 * 0.5 * x[0];
        const double gy = 2 * x[0] * x[0] * x[1] + 2 * 0.5 * x[1];
        const double lap = 2 * x[1] * x[1] + 2 * x[0] * x[0] + 4 * 0.5;
        const double expected = 2 / (hx * hx) + 2 / (hy * hy) + tau * tau * (gx * gx + gy * gy) - tau * lap;
        CHECK(op.diagonal(i) == doctest::Approx(expected).epsilon(1e-12));
    }

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> ud(-1, 1);
    std::vector<double> u(grid.unknowns()), w(grid.unknowns()), au(grid.unknowns()), aw(grid.unknowns());
    for (auto& a : u) a = ud(gen);
    for (auto& a : w) a = ud(gen);
    op.apply(u, au);
    op.apply(w, aw);
    double auw = 0, uaw = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        auw += au[i] * w[i];
        uaw += u[i] * aw[i];
    }
    CHECK(auw == doctest::Approx(uaw).epsilon(1e-12));

    // <A u, u> = sum of squared forward differences (zero boundary) + sum W u^2
    const auto& pts = grid.nodes().points();
    auto value = [&](std::ptrdiff_t ix, std::ptrdiff_t iy) {
        if (ix < 0 || iy < 0 || ix >= static_cast<std::ptrdiff_t>(pts[0]) || iy >= static_cast<std::ptrdiff_t>(pts[1])) return 0.0;
        const std::vector<std::size_t> idx{static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)};
        const auto k = grid.unknown(grid.nodes().node_of(idx));
        return k < 0 ? 0.0 : u[static_cast<std::size_t>(k)];
    };
    double form = 0;
    for (std::ptrdiff_t ix = 0; ix < static_cast<std::ptrdiff_t>(pts[0]); ++ix)
        for (std::ptrdiff_t iy = 0; iy < static_cast<std::ptrdiff_t>(pts[1]); ++iy) {
            const double dx = (value(ix + 1, iy) - value(ix, iy)) / hx;
            const double dy = (value(ix, iy + 1) - value(ix, iy)) / hy;
            form += dx * dx + dy * dy;
        }
    for (std::size_t i = 0; i < u.size(); ++i)
        form += (op.diagonal(i) - 2 / (hx * hx) - 2 / (hy * hy)) * u[i] * u[i];
    double uau = 0;
    for (std::size_t i = 0; i < u.size(); ++i) uau += u[i] * au[i];
    CHECK(uau == doctest::Approx(form).epsilon(1e-10));
    CHECK_THROWS_AS(assemble_witten(v, 0.0, grid), ArgumentError);
}

TEST_CASE("Lanczos agrees with a dense solver") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        const std::size_t dim = 60 + 37 * s;
        const SparseSymOperator op = random_operator(dim, s);
        const Eigen::VectorXd ev = dense_eigenvalues(op);
        for (bool inv : {false, true}) {
            LanczosOptions opt;
            opt.shift_invert = inv;
            const SpectrumResult r = lanczos_smallest(op, 5, 1e-10, dim, 42, opt);
            REQUIRE(r.all_converged());
            for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(r.eigenvalues[k] - ev(static_cast<Eigen::Index>(k))) <= 1e-8);
            for (std::size_t k = 0; k < 5; ++k) {
                std::vector<double> av(dim);
                op.apply(r.vectors[k], av);
                double res = 0;
                for (std::size_t i = 0; i < dim; ++i) res += std::pow(av[i] - r.eigenvalues[k] * r.vectors[k][i], 2);
                CHECK(std::sqrt(res) <= 1e-8);
            }
        }
    }
}

TEST_CASE("repeated eigenvalues are found with their multiplicity") {
    const Potential zero2(Polynomial(2), 2);
    const SparseSymOperator op = assemble_witten(zero2, 1.0, Grid(Box{{0, 1}, {0, 1}}, 22));
    const Eigen::VectorXd ev = dense_eigenvalues(op);
    LanczosOptions opt;
    opt.shift_invert = true;
    const SpectrumResult r = lanczos_smallest(op, 6, 1e-10, 200, 7, opt);
    REQUIRE(r.all_converged());
    for (std::size_t k = 0; k < 6; ++k) CHECK(r.eigenvalues[k] == doctest::Approx(ev(static_cast<Eigen::Index>(k))).epsilon(1e-9));
    CHECK(eigenvalues_below(op, 0.5 * (ev(2) + ev(3))) == 3);
}

TEST_CASE("shifting the operator shifts the spectrum") {
    const SparseSymOperator op = random_operator(200, 11);
    const SpectrumResult a = lanczos_smallest(op, 4, 1e-10, 200, 1);
    const SpectrumResult b = lanczos_smallest(op.shifted(3.25), 4, 1e-10, 200, 1);
    for (std::size_t k = 0; k < 4; ++k) CHECK(b.eigenvalues[k] == doctest::Approx(a.eigenvalues[k] + 3.25).epsilon(1e-10));
    CHECK(op.gershgorin_lower_bound() <= a.eigenvalues[0]);
    CHECK(lowest_shift(op) < a.eigenvalues[0]);
    CHECK(lowest_shift(op) >= a.eigenvalues[0] - 1.0);
}

TEST_CASE("Lanczos argument checks") {
    const SparseSymOperator op = random_operator(40, 1);
    CHECK_THROWS_AS(lanczos_smallest(op, 0, 1e-8, 40, 1), ArgumentError);
    CHECK_THROWS_AS(lanczos_smallest(op, 11, 1e-8, 40, 1), ArgumentError);
    CHECK_THROWS_AS(lanczos_smallest(op, 5, 1e-8, 4, 1), ArgumentError);
    CHECK_THROWS_AS(lanczos_smallest(op, 5, 0.0, 40, 1), ArgumentError);
}

TEST_CASE("harmonic oscillator spectrum converges at second order") {
    const Potential h = harmonic1();
    LanczosOptions opt;
    opt.shift_invert = true;
    std::vector<double> err;
    for (double step : {0.1, 0.05}) {
        const SparseSymOperator op = assemble_witten(h, 1.0, Grid::with_spacing(Box{{-8, 8}}, step));
        const SpectrumResult r = lanczos_smallest(op, 3, 1e-10, 300, 42, opt);
        REQUIRE(r.all_converged());
        double e = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::abs(r.eigenvalues[k] - 2.0 * static_cast<double>(k)) <= 2e-2);
            e = std::max(e, std::abs(r.eigenvalues[k] - 2.0 * static_cast<double>(k)));
        }
        err.push_back(e);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("counting function") {
    const Potential h = harmonic1();
    const SparseSymOperator op = assemble_witten(h, 1.0, Grid::with_spacing(Box{{-8, 8}}, 0.05));
    const CountResult c = count_below(op, 5.0, 1e-8, 42, 2);
    CHECK(c.count == 3);
    CHECK(c.inertia_count == 3);
    CHECK(counting_function(c.spectrum, 5.0) == 3);
    CHECK(counting_function(c.spectrum, 3.0) == 2);

    SpectrumResult all_below;
    all_below.eigenvalues = {0, 1};
    all_below.residuals = {0, 0};
    all_below.converged = {true, true};
    CHECK_THROWS_AS(counting_function(all_below, 5.0), InsufficientResolution);
    all_below.converged = {true, false};
    all_below.eigenvalues = {0, 4};
    CHECK_THROWS_AS(counting_function(all_below, 5.0), InsufficientResolution);
    // an unconverged Ritz value above the threshold is only an upper bound
    all_below.eigenvalues = {0, 9};
    CHECK_THROWS_AS(counting_function(all_below, 5.0), InsufficientResolution);
    all_below.eigenvalues = {0, 9, 12};
    all_below.residuals = {0, 0, 1};
    all_below.converged = {true, true, false};
    CHECK(counting_function(all_below, 5.0) == 1);
}

TEST_CASE("box stability on the harmonic oscillator") {
    const std::vector<double> boxes{4, 6, 8};
    const BoxStabilityReport r = box_stability_probe(harmonic1(), 1.0, 5.0, boxes, 0.05);
    CHECK(r.verdict == BoxVerdict::stabilizes);
    for (const auto& p : r.probes) CHECK(p.count == 3);
    CHECK(box_stability_to_json(r).dump() == box_stability_to_json(box_stability_probe(harmonic1(), 1.0, 5.0, boxes, 0.05)).dump());
}

TEST_CASE("IMS localization") {
    const Potential zero(Polynomial(1), 2);
    const Potential h = harmonic1();
    const Box box{{-4, 4}};
    {
        const Grid grid(box, 201);
        const BumpPartition one{{{0.0}}, {10.0}};
        const auto u = bump_function(grid, std::vector<double>{0.0}, 3.0);
        CHECK(ims_identity_check(h, 1.0, one, grid, u).residual <= 1e-12);
    }
    const BumpPartition two{{{-1.0}, {1.0}}, {2.5, 2.5}};
    std::vector<double> res;
    for (std::size_t pts : {201, 401, 801}) {
        const Grid grid(box, pts);
        const auto u = bump_function(grid, std::vector<double>{0.0}, 3.0);
        const ImsResult r = ims_identity_check(zero, 1.0, two, grid, u);
        CHECK(r.correction > 0.0);
        res.push_back(r.residual);
    }
    CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.25));
    CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.25));

    // partition gradient at a point, against central differences
    std::vector<double> phi, phi2;
    std::vector<std::vector<double>> grad, scratch;
    const double x0 = 0.3, step = 1e-6;
    two.evaluate(std::vector<double>{x0}, phi, grad);
    double sq = 0;
    for (double p : phi) sq += p * p;
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t mu = 0; mu < 2; ++mu) {
        auto f = [&](const std::vector<double>& x) {
            two.evaluate(x, phi2, scratch);
            return phi2[mu];
        };
        CHECK(grad[mu][0] == doctest::Approx(central_difference(f, {x0}, 0, step)).epsilon(1e-6));
    }
    {
        const Grid grid(box, 201);
        const auto u = bump_function(grid, std::vector<double>{0.0}, 3.0);
        const BumpPartition narrow{{{0.0}}, {1.0}};
        CHECK_THROWS_AS(ims_identity_check(h, 1.0, narrow, grid, u), ArgumentError);
    }
}

TEST_CASE("maximal estimate") {
    const Grid grid = Grid::with_spacing(Box{{-10, 10}}, 0.05);
    const std::vector<std::vector<double>> centers{{0.0}, {2.0}, {4.0}, {6.0}};
    const MaximalEstimate z = maximal_estimate_probe(Potential(Polynomial(1), 2), 1.0, centers, 1.0, grid);
    for (double r : z.ratios) CHECK(r == 0.0);
    const MaximalEstimate m = maximal_estimate_probe(harmonic1(), 1.0, centers, 1.0, grid);
    for (double r : m.ratios) {
        CHECK(std::isfinite(r));
        CHECK(r > 0.0);
    }
    CHECK(m.max_ratio / m.min_ratio <= 50.0);
    const std::vector<std::vector<double>> edge{{9.5}};
    CHECK_THROWS_AS(maximal_estimate_probe(harmonic1(), 1.0, edge, 1.0, grid), ArgumentError);
}

TEST_CASE("m_tau") {
    CHECK(m_tau(1.0, 10.0, 1.0) == doctest::Approx(std::sqrt(0.5) * 10.0));
    CHECK(m_tau(9.0, 10.0, 1.0) == 1.0);
    CHECK(m_tau(2.0, 4.0, 3.0) == doctest::Approx(std::sqrt(5.0 / 6.0) * 2.0));
    CHECK_THROWS_AS(m_tau(10.0, 10.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(m_tau(1.0, 10.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(m_tau(-1.0, 10.0, 2.0), ArgumentError);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double tau0 = 0.01 + 100 * ud(gen), tau = tau0 * (0.001 + 0.998 * ud(gen)), c = 1 + 50 * ud(gen);
        const double m = m_tau(tau, tau0, c);
        const double q = std::pow(m * tau / tau0, 2);
        CHECK(m >= 1.0);
        CHECK(q >= 1 - 1 / (2 * c) - 1e-14);
        CHECK(q <= 1 + 1e-14);
    }
}
