#include "witten/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "witten/errors.hpp"
#include "witten/parallel.hpp"

namespace witten {

namespace {

std::vector<std::size_t> checked_points(const Box& box, std::vector<std::size_t> points) {
    if (box.empty() || box.size() > 3) throw ArgumentError("spectral grids support 1 to 3 dimensions");
    if (points.size() != box.size()) throw ArgumentError("grid needs one point count per dimension");
    std::size_t unknowns = 1;
    for (std::size_t p : points) {
        if (p < 8) throw ArgumentError("grid needs at least 8 points per dimension");
        unknowns *= p - 2;
    }
    if (unknowns > 1000000) throw ArgumentError("grid exceeds 10^6 unknowns");
    return points;
}

}  // namespace

Grid::Grid(Box box, std::vector<std::size_t> points)
    : nodes_(box, checked_points(box, std::move(points))), unknown_(nodes_.node_count(), -1) {
    for (std::size_t node = 0; node < nodes_.node_count(); ++node) {
        if (!nodes_.interior(node)) continue;
        unknown_[node] = static_cast<std::ptrdiff_t>(interior_.size());
        interior_.push_back(node);
    }
}

Grid::Grid(Box box, std::size_t points_per_dim) : Grid(box, std::vector<std::size_t>(box.size(), points_per_dim)) {}

Grid Grid::with_spacing(const Box& box, double h) {
    if (!(h > 0.0)) throw ArgumentError("grid spacing must be positive");
    std::vector<std::size_t> points;
    for (const auto& [lo, hi] : box) {
        if (!(lo < hi)) throw ArgumentError("grid box needs lo < hi");
        points.push_back(static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1);
    }
    return Grid(box, points);
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (double h : spacing()) v *= h;
    return v;
}

void SparseSymOperator::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < dimension; ++i) {
        double s = 0.0;
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) s += value[k] * x[column[k]];
        y[i] = s;
    }
}

double SparseSymOperator::diagonal(std::size_t i) const {
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k)
        if (column[k] == i) return value[k];
    return 0.0;
}

double SparseSymOperator::asymmetry() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < dimension; ++i) {
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) {
            const std::size_t j = column[k];
            scale = std::max(scale, std::abs(value[k]));
            const auto first = column.begin() + static_cast<std::ptrdiff_t>(row_start[j]);
            const auto last = column.begin() + static_cast<std::ptrdiff_t>(row_start[j + 1]);
            const auto it = std::lower_bound(first, last, i);
            const double mirror = it != last && *it == i ? value[static_cast<std::size_t>(it - column.begin())] : 0.0;
            worst = std::max(worst, std::abs(value[k] - mirror));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

double SparseSymOperator::gershgorin_lower_bound() const {
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dimension; ++i) {
        double diag = 0.0, off = 0.0;
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) {
            if (column[k] == i)
                diag += value[k];
            else
                off += std::abs(value[k]);
        }
        bound = std::min(bound, diag - off);
    }
    return bound;
}

SparseSymOperator SparseSymOperator::shifted(double c) const {
    SparseSymOperator out = *this;
    for (std::size_t i = 0; i < dimension; ++i) {
        bool found = false;
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) {
            if (column[k] == i) {
                out.value[k] += c;
                found = true;
            }
        }
        if (!found) throw ArgumentError("shifted() needs a stored diagonal");
    }
    return out;
}

SparseSymOperator assemble_witten(const Potential& pot, double tau, const Grid& grid) {
    if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
    if (grid.dimension() != pot.dimension()) throw ArgumentError("grid dimension differs from potential dimension");
    const std::size_t n = grid.dimension();
    const std::size_t dim = grid.unknowns();
    const TensorGrid& nodes = grid.nodes();

    std::vector<double> w(dim);
    parallel_for(dim, [&](std::size_t i) { w[i] = witten_potential_term(pot, tau, grid.coordinates(i)); });

    double stencil = 0.0;
    std::vector<double> inv_h2(n);
    for (std::size_t d = 0; d < n; ++d) {
        inv_h2[d] = 1.0 / (grid.spacing()[d] * grid.spacing()[d]);
        stencil += 2.0 * inv_h2[d];
    }

    SparseSymOperator op;
    op.dimension = dim;
    op.row_start.reserve(dim + 1);
    op.row_start.push_back(0);
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t node = grid.node(i);
        row.clear();
        row.emplace_back(i, stencil + w[i]);
        for (std::size_t d = 0; d < n; ++d) {
            for (std::ptrdiff_t nb : {grid.unknown(node - nodes.stride(d)), grid.unknown(node + nodes.stride(d))}) {
                if (nb >= 0) row.emplace_back(static_cast<std::size_t>(nb), -inv_h2[d]);
            }
        }
        std::sort(row.begin(), row.end());
        for (const auto& [j, v] : row) {
            op.column.push_back(j);
            op.value.push_back(v);
        }
        op.row_start.push_back(op.column.size());
    }
    op.symmetric = op.asymmetry() <= 1e-13;
    return op;
}

bool SpectrumResult::all_converged() const {
    return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

namespace {

using Vec = std::vector<double>;

void axpy(double a, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

/// Two passes of classical Gram-Schmidt against both sets.
void orthogonalize(Vec& w, const std::vector<Vec>& basis, const std::vector<Vec>& locked) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto* set : {&basis, &locked}) {
            for (const Vec& q : *set) axpy(-dot(q, w), q, w);
        }
    }
}

/// Random unit vector orthogonal to basis and locked; empty if none exists numerically.
Vec fresh_vector(std::size_t dim, Rng& rng, const std::vector<Vec>& basis, const std::vector<Vec>& locked) {
    for (int attempt = 0; attempt < 3; ++attempt) {
        Vec v(dim);
        for (auto& x : v) x = rng.normal();
        const double before = norm2(v);
        orthogonalize(v, basis, locked);
        const double after = norm2(v);
        if (after > 1e-8 * before) {
            for (auto& x : v) x /= after;
            return v;
        }
    }
    return {};
}

struct RitzPair {
    double lambda;
    double residual;
    bool converged;
    Vec vector;
};

struct RunOutcome {
    std::vector<RitzPair> pairs;
    std::size_t iterations = 0;
    std::size_t restarts = 0;
};

/// The wanted eigenvalues of A are the largest of B: B = -A in plain mode,
/// B = (A - sigma)^{-1} in shift-invert mode.
struct KrylovOperator {
    std::function<void(const Vec&, Vec&)> apply;
    bool inverted = false;
    double sigma = 0.0;
};

RunOutcome lanczos_run(const SparseSymOperator& op, const KrylovOperator& b, std::size_t want, double tol,
                       std::size_t max_iterations, Rng& rng, const std::vector<Vec>& locked) {
    const std::size_t dim = op.dimension;
    RunOutcome out;
    std::vector<Vec> basis;
    std::vector<double> alpha, beta;
    Vec v = fresh_vector(dim, rng, basis, locked);
    if (v.empty()) return out;
    const std::size_t limit = std::min(max_iterations, dim - locked.size());
    double gate = b.inverted ? 1e-2 * tol : tol;
    double scale = 0.0;
    Vec w(dim), av(dim);

    auto ritz = [&](bool final_pass) -> bool {
        const std::size_t j = alpha.size();
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(j));
        Eigen::VectorXd sub(static_cast<Eigen::Index>(j > 0 ? j - 1 : 0));
        for (std::size_t k = 0; k + 1 < j; ++k) sub[static_cast<Eigen::Index>(k)] = beta[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const std::size_t take = std::min(want, j);
        const double last_beta = beta.size() == j ? beta.back() : 0.0;
        if (!final_pass) {
            for (std::size_t t = 0; t < take; ++t) {
                const Eigen::Index col = static_cast<Eigen::Index>(j - 1 - t);
                const double theta = tri.eigenvalues()[col];
                const double est = std::abs(last_beta * tri.eigenvectors()(static_cast<Eigen::Index>(j - 1), col));
                if (est > gate * (b.inverted ? std::abs(theta) : 1.0)) return false;
            }
        }
        std::vector<RitzPair> pairs;
        bool all_ok = take == want;
        for (std::size_t t = 0; t < take; ++t) {
            const Eigen::Index col = static_cast<Eigen::Index>(j - 1 - t);
            Vec y(dim, 0.0);
            for (std::size_t k = 0; k < j; ++k) axpy(tri.eigenvectors()(static_cast<Eigen::Index>(k), col), basis[k], y);
            const double nrm = norm2(y);
            for (auto& x : y) x /= nrm;
            op.apply(y, av);
            const double lambda = dot(y, av);
            axpy(-lambda, y, av);
            const double res = norm2(av);
            pairs.push_back({lambda, res, res <= tol, std::move(y)});
            all_ok = all_ok && res <= tol;
        }
        if (all_ok || final_pass) {
            out.pairs = std::move(pairs);
            return true;
        }
        gate *= 0.1;
        return false;
    };

    for (std::size_t j = 0; j < limit; ++j) {
        basis.push_back(v);
        b.apply(v, w);
        const double a = dot(w, v);
        axpy(-a, v, w);
        if (j > 0 && beta.back() != 0.0) axpy(-beta.back(), basis[j - 1], w);
        orthogonalize(w, basis, locked);
        alpha.push_back(a);
        double bnorm = norm2(w);
        scale = std::max({scale, std::abs(a), bnorm});
        out.iterations = j + 1;
        const bool breakdown = bnorm <= 1e-12 * scale;
        beta.push_back(breakdown ? 0.0 : bnorm);
        if (j + 1 >= want && ((j + 1) % 5 == 0 || breakdown || j + 1 == limit) && ritz(false)) return out;
        if (j + 1 == limit) break;
        if (breakdown) {
            if (out.restarts == 3) break;
            v = fresh_vector(dim, rng, basis, locked);
            if (v.empty()) break;
            ++out.restarts;
            continue;
        }
        for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / bnorm;
    }
    if (!alpha.empty()) ritz(true);
    return out;
}

Eigen::SparseMatrix<double> to_eigen(const SparseSymOperator& op, double shift) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(op.value.size());
    for (std::size_t i = 0; i < op.dimension; ++i)
        for (std::size_t k = op.row_start[i]; k < op.row_start[i + 1]; ++k)
            trips.emplace_back(static_cast<int>(i), static_cast<int>(op.column[k]),
                               op.value[k] - (op.column[k] == i ? shift : 0.0));
    const auto dim = static_cast<Eigen::Index>(op.dimension);
    Eigen::SparseMatrix<double> mat(dim, dim);
    mat.setFromTriplets(trips.begin(), trips.end());
    return mat;
}

}  // namespace

std::size_t eigenvalues_below(const SparseSymOperator& op, double shift) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(to_eigen(op, shift));
    if (ldlt.info() != Eigen::Success) throw NumericalError("LDL^T factorization failed");
    std::size_t negative = 0;
    for (Eigen::Index i = 0; i < ldlt.vectorD().size(); ++i) {
        const double d = ldlt.vectorD()[i];
        if (d == 0.0 || !std::isfinite(d)) throw NumericalError("LDL^T factorization met a zero pivot");
        if (d < 0.0) ++negative;
    }
    return negative;
}

double lowest_shift(const SparseSymOperator& op) {
    double lo = op.gershgorin_lower_bound() - 1.0;
    // Rayleigh quotient of a short plain run bounds the smallest eigenvalue from above.
    KrylovOperator minus_a;
    minus_a.apply = [&](const Vec& x, Vec& y) {
        op.apply(x, y);
        for (auto& v : y) v = -v;
    };
    Rng rng(0x51F7ULL);
    const RunOutcome probe = lanczos_run(op, minus_a, 1, 1e-300, std::min<std::size_t>(op.dimension, 40), rng, {});
    double hi = probe.pairs.empty() ? op.gershgorin_lower_bound() : probe.pairs.front().lambda;
    if (hi <= lo) return lo;
    while (hi - lo > 0.5) {
        const double mid = 0.5 * (lo + hi);
        std::size_t below = 1;
        try {
            below = eigenvalues_below(op, mid);
        } catch (const NumericalError&) {
        }
        (below == 0 ? lo : hi) = mid;
    }
    return lo - 0.5;
}

SpectrumResult lanczos_smallest(const SparseSymOperator& op, std::size_t m, double tol, std::size_t max_iterations,
                                std::uint64_t seed, const LanczosOptions& options) {
    if (m < 1 || m > op.dimension / 4) throw ArgumentError("requested eigenvalue count must lie in [1, dimension/4]");
    if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
    if (max_iterations < m) throw ArgumentError("max iterations must be at least the requested count");
    const std::size_t dim = op.dimension;

    KrylovOperator b;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    if (options.shift_invert) {
        b.inverted = true;
        b.sigma = options.sigma ? *options.sigma : lowest_shift(op);
        ldlt.compute(to_eigen(op, b.sigma));
        if (ldlt.info() != Eigen::Success) throw NumericalError("factorization of the shifted operator failed");
        b.apply = [&](const Vec& x, Vec& y) {
            Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(dim)) =
                ldlt.solve(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(dim)));
        };
    } else {
        b.apply = [&](const Vec& x, Vec& y) {
            op.apply(x, y);
            for (auto& v : y) v = -v;
        };
    }

    Rng rng(seed);
    SpectrumResult res;
    res.tolerance = tol;
    std::vector<RitzPair> found;  // converged pairs, locked for later rounds
    std::vector<RitzPair> pending;
    for (std::size_t round = 0; round <= options.deflation_rounds; ++round) {
        std::vector<Vec> locked;
        for (const auto& p : found) locked.push_back(p.vector);
        if (locked.size() + m > dim) break;
        RunOutcome run = lanczos_run(op, b, m, tol, max_iterations, rng, locked);
        res.iterations += run.iterations;
        res.restarts += run.restarts;
        res.rounds = round + 1;
        const double current_mth =
            found.size() >= m ? found[m - 1].lambda : std::numeric_limits<double>::infinity();
        bool fresh = false;
        pending.clear();
        for (auto& p : run.pairs) {
            if (p.converged) {
                if (p.lambda < current_mth - tol) fresh = true;
                found.push_back(std::move(p));
            } else {
                pending.push_back(std::move(p));
            }
        }
        std::sort(found.begin(), found.end(), [](const RitzPair& a, const RitzPair& c) { return a.lambda < c.lambda; });
        if (!pending.empty() || !fresh) break;
    }

    std::vector<RitzPair> all = std::move(found);
    for (auto& p : pending) all.push_back(std::move(p));
    std::sort(all.begin(), all.end(), [](const RitzPair& a, const RitzPair& c) { return a.lambda < c.lambda; });
    if (all.size() > m) all.resize(m);
    for (auto& p : all) {
        res.eigenvalues.push_back(p.lambda);
        res.residuals.push_back(p.residual);
        res.converged.push_back(p.converged);
        res.vectors.push_back(std::move(p.vector));
    }
    return res;
}

std::size_t counting_function(const SpectrumResult& res, double lambda) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
        if (!res.converged[i]) {
            std::ostringstream os;
            os << "eigenvalue " << i << " (" << res.eigenvalues[i] << ") is not converged below the threshold " << lambda;
            throw InsufficientResolution(os.str());
        }
        if (res.eigenvalues[i] > lambda) return count;
        ++count;
    }
    throw InsufficientResolution("every computed eigenvalue lies at or below the threshold; request more");
}

CountResult count_below(const SparseSymOperator& op, double lambda, double tol, std::uint64_t seed,
                        std::size_t initial_request) {
    const std::size_t cap = op.dimension / 4;
    if (cap == 0) throw ArgumentError("operator too small to count eigenvalues");
    // Eigenvalues <= lambda are those below the next representable shift.
    const std::size_t inertia = eigenvalues_below(op, std::nextafter(lambda, std::numeric_limits<double>::infinity()));
    std::size_t m = std::clamp<std::size_t>(std::max(initial_request, inertia + 4), 1, cap);
    LanczosOptions options;
    options.shift_invert = true;
    options.sigma = lowest_shift(op);
    for (int attempt = 0;; ++attempt) {
        const std::size_t max_iterations = std::min(op.dimension, std::max<std::size_t>(300, 8 * m));
        CountResult out;
        out.inertia_count = inertia;
        out.spectrum = lanczos_smallest(op, m, tol, max_iterations, seed + static_cast<std::uint64_t>(attempt), options);
        const auto& ev = out.spectrum.eigenvalues;
        const bool saturated = !ev.empty() && out.spectrum.converged.back() && ev.back() <= lambda;
        if (saturated && m < cap) {
            m = std::min(cap, 2 * m);
            continue;
        }
        out.count = counting_function(out.spectrum, lambda);
        if (out.count == inertia) return out;
        if (attempt == 3) {
            std::ostringstream os;
            os << "Lanczos found " << out.count << " eigenvalues <= " << lambda << " but the inertia shows " << inertia;
            throw InsufficientResolution(os.str());
        }
        options.deflation_rounds += 3;
    }
}

std::string to_string(BoxVerdict v) {
    switch (v) {
        case BoxVerdict::stabilizes: return "stabilizes";
        case BoxVerdict::grows: return "grows";
        case BoxVerdict::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

BoxStabilityReport box_stability_probe(const Potential& pot, double tau, double lambda,
                                       std::span<const double> half_widths, double h, double tol, std::uint64_t seed) {
    if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
    if (half_widths.size() < 2) throw ArgumentError("box schedule needs at least two boxes");
    for (std::size_t i = 0; i < half_widths.size(); ++i) {
        if (!(half_widths[i] > 0.0)) throw ArgumentError("box half-widths must be positive");
        if (i > 0 && !(half_widths[i] > half_widths[i - 1])) throw ArgumentError("boxes must be nested increasing");
    }
    BoxStabilityReport report{tau, lambda, h, std::vector<BoxProbe>(half_widths.size()), BoxVerdict::indeterminate};
    parallel_for(half_widths.size(), [&](std::size_t b) {
        const double half = half_widths[b];
        const Grid grid = Grid::with_spacing(Box(pot.dimension(), {-half, half}), h);
        const SparseSymOperator op = assemble_witten(pot, tau, grid);
        const CountResult c = count_below(op, lambda, tol, seed + b);
        auto& probe = report.probes[b];
        probe.half_width = half;
        probe.unknowns = grid.unknowns();
        probe.count = c.count;
        probe.eigenvalues.assign(c.spectrum.eigenvalues.begin(),
                                 c.spectrum.eigenvalues.begin() + static_cast<std::ptrdiff_t>(c.count));
    });
    const auto& p = report.probes;
    bool increasing = p.size() >= 3;
    for (std::size_t i = 1; i < p.size(); ++i) increasing = increasing && p[i].count > p[i - 1].count;
    if (p[p.size() - 1].count == p[p.size() - 2].count)
        report.verdict = BoxVerdict::stabilizes;
    else if (increasing)
        report.verdict = BoxVerdict::grows;
    return report;
}

BumpPartition BumpPartition::from(const PartitionOfUnity& part) { return {part.centers, part.radii}; }

double BumpPartition::evaluate(std::span<const double> x, std::vector<double>& phi,
                               std::vector<std::vector<double>>& grad) const {
    const std::size_t n = x.size();
    const std::size_t count = size();
    phi.assign(count, 0.0);
    grad.assign(count, std::vector<double>(n, 0.0));
    double s = 0.0;
    std::vector<double> weighted(n, 0.0);  // sum_nu chi_nu grad chi_nu
    for (std::size_t mu = 0; mu < count; ++mu) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < n; ++d) d2 += (x[d] - centers[mu][d]) * (x[d] - centers[mu][d]);
        const double r2 = radii[mu] * radii[mu];
        const double t = d2 / r2;
        if (t >= 1.0) continue;
        const double chi = std::exp(1.0 - 1.0 / (1.0 - t));
        const double dchi = -2.0 * chi / ((1.0 - t) * (1.0 - t) * r2);
        phi[mu] = chi;
        for (std::size_t d = 0; d < n; ++d) {
            grad[mu][d] = dchi * (x[d] - centers[mu][d]);
            weighted[d] += chi * grad[mu][d];
        }
        s += chi * chi;
    }
    if (s == 0.0) return 0.0;
    const double root = std::sqrt(s);
    for (std::size_t mu = 0; mu < count; ++mu) {
        if (phi[mu] == 0.0) continue;
        for (std::size_t d = 0; d < n; ++d) grad[mu][d] = grad[mu][d] / root - phi[mu] * weighted[d] / (s * root);
        phi[mu] /= root;
    }
    return s;
}

namespace {

double quadratic_form(const SparseSymOperator& op, std::span<const double> u) {
    double s = 0.0;
    for (std::size_t i = 0; i < op.dimension; ++i) {
        if (u[i] == 0.0) continue;
        double row = 0.0;
        for (std::size_t k = op.row_start[i]; k < op.row_start[i + 1]; ++k) row += op.value[k] * u[op.column[k]];
        s += u[i] * row;
    }
    return s;
}

}  // namespace

ImsResult ims_identity_check(const Potential& pot, double tau, const BumpPartition& part, const Grid& grid,
                             std::span<const double> u) {
    if (u.size() != grid.unknowns()) throw ArgumentError("u must have one value per grid unknown");
    const SparseSymOperator op = assemble_witten(pot, tau, grid);
    const double vol = grid.cell_volume();
    const std::size_t dim = grid.unknowns();

    std::vector<std::vector<double>> localized(part.size());
    double correction = 0.0;
    std::vector<double> phi;
    std::vector<std::vector<double>> grad;
    for (std::size_t i = 0; i < dim; ++i) {
        if (u[i] == 0.0) continue;
        const double s = part.evaluate(grid.coordinates(i), phi, grad);
        if (!(s > 0.0)) throw ArgumentError("u is nonzero outside the support of the partition");
        for (std::size_t mu = 0; mu < part.size(); ++mu) {
            if (phi[mu] == 0.0) continue;
            if (localized[mu].empty()) localized[mu].assign(dim, 0.0);
            localized[mu][i] = phi[mu] * u[i];
            double g2 = 0.0;
            for (double g : grad[mu]) g2 += g * g;
            correction += g2 * u[i] * u[i];
        }
    }
    ImsResult r;
    r.lhs = quadratic_form(op, u) * vol;
    for (const auto& w : localized)
        if (!w.empty()) r.localized += quadratic_form(op, w);
    r.localized *= vol;
    r.correction = correction * vol;
    r.residual = std::abs(r.lhs - (r.localized - r.correction)) / (std::abs(r.lhs) + 1.0);
    return r;
}

ImsResult ims_identity_check(const Potential& pot, double tau, const PartitionOfUnity& part,
                             std::span<const double> u) {
    return ims_identity_check(pot, tau, BumpPartition::from(part), Grid(part.grid.box(), part.grid.points()), u);
}

std::vector<double> bump_function(const Grid& grid, std::span<const double> center, double rho) {
    if (!(rho > 0.0)) throw ArgumentError("bump radius must be positive");
    if (center.size() != grid.dimension()) throw ArgumentError("bump centre has wrong dimension");
    std::vector<double> u(grid.unknowns());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto x = grid.coordinates(i);
        double d2 = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) d2 += (x[d] - center[d]) * (x[d] - center[d]);
        u[i] = bump(std::sqrt(d2) / rho);
    }
    return u;
}

MaximalEstimate maximal_estimate_probe(const Potential& pot, double tau, std::span<const std::vector<double>> centers,
                                       double rho, const Grid& grid) {
    if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
    if (centers.empty()) throw ArgumentError("maximal estimate needs at least one bump centre");
    for (const auto& c : centers) {
        if (c.size() != grid.dimension()) throw ArgumentError("bump centre has wrong dimension");
        for (std::size_t d = 0; d < c.size(); ++d) {
            const auto [lo, hi] = grid.nodes().box()[d];
            if (!(c[d] - rho > lo && c[d] + rho < hi)) throw ArgumentError("bump support reaches the grid boundary");
        }
    }
    const SparseSymOperator op = assemble_witten(pot, tau, grid);
    std::vector<double> weight(grid.unknowns());
    parallel_for(weight.size(), [&](std::size_t i) {
        const double f = ftilde_tau(pot, grid.coordinates(i), tau);
        weight[i] = f * f;
    });
    MaximalEstimate out;
    out.centers.assign(centers.begin(), centers.end());
    out.ratios.resize(centers.size());
    parallel_for(centers.size(), [&](std::size_t c) {
        const auto u = bump_function(grid, centers[c], rho);
        double num = 0.0, mass = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            num += weight[i] * u[i] * u[i];
            mass += u[i] * u[i];
        }
        if (!(mass > 0.0)) throw ArgumentError("bump contains no grid node");
        out.ratios[c] = num / (quadratic_form(op, u) + mass);
    });
    out.max_ratio = *std::max_element(out.ratios.begin(), out.ratios.end());
    out.min_ratio = *std::min_element(out.ratios.begin(), out.ratios.end());
    return out;
}

double m_tau(double tau, double tau0, double c) {
    if (!(std::isfinite(tau) && std::isfinite(tau0) && std::isfinite(c))) throw ArgumentError("m_tau needs finite inputs");
    if (!(tau > 0.0 && tau < tau0)) throw ArgumentError("m_tau needs 0 < tau < tau0");
    if (!(c >= 1.0)) throw ArgumentError("m_tau needs C >= 1");
    const double m = std::max(1.0, std::sqrt((2.0 * c - 1.0) / (2.0 * c)) * tau0 / tau);
    const double q = (m * tau / tau0) * (m * tau / tau0);
    const double slack = 8.0 * std::numeric_limits<double>::epsilon();
    if (!(q >= 1.0 - 1.0 / (2.0 * c) - slack && q <= 1.0 + slack))
        throw NumericalError("m_tau bracketing failed");
    return m;
}

std::string spectrum_csv(const SpectrumResult& res) {
    std::ostringstream os;
    os.precision(17);
    os << "index,eigenvalue,residual,converged\n";
    for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
        os << i << ',' << res.eigenvalues[i] << ',' << res.residuals[i] << ',' << (res.converged[i] ? "true" : "false")
           << '\n';
    return os.str();
}

json spectrum_to_json(const SpectrumResult& res) {
    json conv = json::array();
    for (bool c : res.converged) conv.push_back(c);
    return {{"eigenvalues", res.eigenvalues}, {"residuals", res.residuals}, {"converged", conv},
            {"iterations", res.iterations},   {"restarts", res.restarts},   {"rounds", res.rounds},
            {"tolerance", res.tolerance}};
}

json box_stability_to_json(const BoxStabilityReport& r) {
    json probes = json::array();
    for (const auto& p : r.probes)
        probes.push_back({{"half_width", p.half_width},
                          {"unknowns", p.unknowns},
                          {"count", p.count},
                          {"eigenvalues", p.eigenvalues}});
    std::vector<std::size_t> counts;
    for (const auto& p : r.probes) counts.push_back(p.count);
    return {{"tau", r.tau}, {"lambda", r.lambda}, {"h", r.h}, {"counts", counts}, {"verdict", to_string(r.verdict)},
            {"probes", probes}};
}

json ims_to_json(const ImsResult& r) {
    return {{"lhs", r.lhs}, {"localized", r.localized}, {"correction", r.correction}, {"residual", r.residual}};
}

json maximal_estimate_to_json(const MaximalEstimate& r) {
    json centers = json::array();
    for (const auto& c : r.centers) centers.push_back(c);
    return {{"centers", centers}, {"ratios", r.ratios}, {"max_ratio", r.max_ratio}, {"min_ratio", r.min_ratio}};
}

}  // namespace witten
