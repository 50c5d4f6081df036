#include "witten/localization.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "witten/errors.hpp"
#include "witten/parallel.hpp"

namespace witten {

Box parse_box(const std::string& text) {
    Box box;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto colon = part.find(':', part.empty() || part[0] != '-' ? 0 : 1);
        if (colon == std::string::npos) throw ArgumentError("box component '" + part + "' is not lo:hi");
        try {
            std::size_t used = 0;
            const double lo = std::stod(part.substr(0, colon), &used);
            if (used != colon) throw ArgumentError("bad box bound in '" + part + "'");
            const std::string rest = part.substr(colon + 1);
            const double hi = std::stod(rest, &used);
            if (used != rest.size()) throw ArgumentError("bad box bound in '" + part + "'");
            if (!(lo < hi)) throw ArgumentError("box component '" + part + "' needs lo < hi");
            box.emplace_back(lo, hi);
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const ArgumentError*>(&e)) throw;
            throw ArgumentError("bad box bound in '" + part + "'");
        }
    }
    if (box.empty()) throw ArgumentError("empty box specification");
    return box;
}

TensorGrid::TensorGrid(Box box, std::vector<std::size_t> points) : box_(std::move(box)), points_(std::move(points)) {
    if (box_.empty() || points_.size() != box_.size()) throw ArgumentError("grid needs one point count per dimension");
    const std::size_t n = box_.size();
    spacing_.resize(n);
    stride_.assign(n, 1);
    for (std::size_t d = 0; d < n; ++d) {
        if (points_[d] < 2) throw ArgumentError("grid needs at least 2 points per dimension");
        if (!(box_[d].first < box_[d].second)) throw ArgumentError("grid box needs lo < hi");
        spacing_[d] = (box_[d].second - box_[d].first) / static_cast<double>(points_[d] - 1);
    }
    for (std::size_t d = n - 1; d-- > 0;) stride_[d] = stride_[d + 1] * points_[d + 1];
    count_ = stride_[0] * points_[0];
}

TensorGrid::TensorGrid(Box box, std::size_t points_per_dim)
    : TensorGrid(box, std::vector<std::size_t>(box.size(), points_per_dim)) {}

std::vector<std::size_t> TensorGrid::index_of(std::size_t node) const {
    std::vector<std::size_t> idx(dimension());
    for (std::size_t d = 0; d < dimension(); ++d) idx[d] = (node / stride_[d]) % points_[d];
    return idx;
}

std::size_t TensorGrid::node_of(std::span<const std::size_t> idx) const {
    std::size_t node = 0;
    for (std::size_t d = 0; d < dimension(); ++d) node += idx[d] * stride_[d];
    return node;
}

std::vector<double> TensorGrid::coordinates(std::size_t node) const {
    std::vector<double> x(dimension());
    for (std::size_t d = 0; d < dimension(); ++d) x[d] = coordinate(d, (node / stride_[d]) % points_[d]);
    return x;
}

bool TensorGrid::interior(std::size_t node) const {
    for (std::size_t d = 0; d < dimension(); ++d) {
        const std::size_t i = (node / stride_[d]) % points_[d];
        if (i == 0 || i + 1 == points_[d]) return false;
    }
    return true;
}

void SlowMetric::validate() const {
    if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("eps must lie in (0, 1]");
    if (!(r > 0.0 && r < 1.0)) throw ArgumentError("r must lie in (0, 1)");
}

double psi_r(const Potential& pot, std::span<const double> x, double r, std::size_t sample_count, std::uint64_t seed) {
    if (!(r > 0.0 && r < 1.0)) throw ArgumentError("r must lie in (0, 1)");
    const std::size_t n = pot.dimension();
    if (x.size() != n) throw ArgumentError("point has wrong dimension");
    const double fx = f_reg(pot, x);
    const double rho = r / fx;
    double best = 1.0;
    std::vector<double> z(n);
    auto consider = [&](std::span<const double> offset) {
        for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + offset[i];
        best = std::max(best, f_reg(pot, z) / fx);
    };

    std::vector<double> u(n);
    if (n == 1) {
        for (double s : {rho, -rho}) {
            u[0] = s;
            consider(u);
        }
    } else if (n == 2) {
        for (std::size_t k = 0; k < sample_count; ++k) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(sample_count);
            u = {rho * std::cos(t), rho * std::sin(t)};
            consider(u);
        }
    } else {
        Rng rng(seed);
        for (std::size_t k = 0; k < sample_count; ++k) {
            for (auto& v : u) v = rng.normal();
            const double nrm = norm2(u);
            for (auto& v : u) v *= rho / nrm;
            consider(u);
        }
    }
    static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    if (n > std::size(primes)) throw ArgumentError("psi_r supports at most 10 dimensions");
    std::size_t accepted = 0;
    for (std::uint64_t i = 1; accepted < sample_count && i < 64 * (sample_count + 1); ++i) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            u[d] = rho * (2.0 * radical_inverse(i + seed % 1024, primes[d]) - 1.0);
            r2 += u[d] * u[d];
        }
        if (r2 > rho * rho) continue;
        consider(u);
        ++accepted;
    }
    return best;
}

double estimate_slow_variation(const Potential& pot, const Box& box, double r, std::size_t points_per_dim) {
    if (!(r > 0.0 && r < 1.0)) throw ArgumentError("r must lie in (0, 1)");
    if (box.size() != pot.dimension()) throw ArgumentError("box dimension differs from potential dimension");
    const TensorGrid grid(box, points_per_dim);
    std::vector<double> f(grid.node_count());
    parallel_for(grid.node_count(), [&](std::size_t i) { f[i] = f_reg(pot, grid.coordinates(i)); });
    std::vector<double> local(grid.node_count(), 1.0);
    parallel_for(grid.node_count(), [&](std::size_t i) {
        const auto x = grid.coordinates(i);
        double worst = 1.0;
        grid.for_each_in_ball(x, r / f[i], true, [&](std::size_t j) {
            worst = std::max(worst, std::max(f[j] / f[i], f[i] / f[j]));
        });
        local[i] = worst;
    });
    double c_star = 1.0;
    for (double v : local) c_star = std::max(c_star, v);
    return c_star;
}

double bump(double s) {
    const double s2 = s * s;
    if (s2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s2));
}

double PartitionOfUnity::value(std::size_t mu, std::size_t node) const {
    const auto& entries = phi.at(mu);
    auto it = std::lower_bound(entries.begin(), entries.end(), node,
                               [](const PhiEntry& e, std::size_t n) { return e.node < n; });
    return it != entries.end() && it->node == node ? it->value : 0.0;
}

double PartitionOfUnity::square_sum(std::size_t node) const {
    double s = 0.0;
    for (std::size_t mu = 0; mu < phi.size(); ++mu) {
        const double v = value(mu, node);
        s += v * v;
    }
    return s;
}

PartitionOfUnity build_partition(const Potential& pot, const Box& box, double eps, double r, std::size_t points_per_dim) {
    SlowMetric{eps, r, 1.0}.validate();
    if (box.size() != pot.dimension()) throw ArgumentError("box dimension differs from potential dimension");
    PartitionOfUnity part{TensorGrid(box, points_per_dim), eps, r, {}, {}, {}, {}, 0};
    const TensorGrid& grid = part.grid;
    const std::size_t nodes = grid.node_count();

    part.f_nodes.resize(nodes);
    parallel_for(nodes, [&](std::size_t i) { part.f_nodes[i] = f_reg(pot, grid.coordinates(i)); });
    const double f_max = *std::max_element(part.f_nodes.begin(), part.f_nodes.end());
    const double min_radius = r / (std::numbers::sqrt2 * f_max);
    const double h_max = *std::max_element(grid.spacing().begin(), grid.spacing().end());
    if (!(h_max < min_radius / 4.0)) {
        std::ostringstream os;
        os << "grid spacing " << h_max << " is not below a quarter of the smallest ball radius " << min_radius;
        throw ArgumentError(os.str());
    }

    std::vector<char> covered(nodes, 0);
    for (std::size_t i = 0; i < nodes; ++i) {
        if (covered[i]) continue;
        auto x = grid.coordinates(i);
        const double radius = r / (std::numbers::sqrt2 * part.f_nodes[i]);
        grid.for_each_in_ball(x, radius / std::numbers::sqrt2, false, [&](std::size_t j) { covered[j] = 1; });
        covered[i] = 1;
        part.centers.push_back(std::move(x));
        part.radii.push_back(radius);
    }

    std::vector<double> square_sum(nodes, 0.0);
    std::vector<std::size_t> count(nodes, 0);
    part.phi.resize(part.centers.size());
    for (std::size_t mu = 0; mu < part.centers.size(); ++mu) {
        const auto& c = part.centers[mu];
        const double radius = part.radii[mu];
        auto& entries = part.phi[mu];
        grid.for_each_in_ball(c, radius, false, [&](std::size_t j) {
            const auto x = grid.coordinates(j);
            double d2 = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) d2 += (x[d] - c[d]) * (x[d] - c[d]);
            const double chi = bump(std::sqrt(d2) / radius);
            if (chi == 0.0) return;
            entries.push_back({j, chi});
            square_sum[j] += chi * chi;
            ++count[j];
        });
    }
    for (std::size_t j = 0; j < nodes; ++j) {
        if (!(square_sum[j] > 0.0)) throw NumericalError("partition construction left a grid node uncovered");
    }
    for (auto& entries : part.phi) {
        for (auto& e : entries) e.value /= std::sqrt(square_sum[e.node]);
    }
    part.overlap_bound = *std::max_element(count.begin(), count.end());
    return part;
}

PartitionCheck verify_partition(const PartitionOfUnity& part, const Potential& pot, double eps) {
    if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
    const TensorGrid& grid = part.grid;
    const std::size_t nodes = grid.node_count();
    const std::size_t n = grid.dimension();
    PartitionCheck check;

    std::vector<double> sums(nodes, 0.0);
    std::vector<std::size_t> count(nodes, 0);
    check.support_ok = true;
    for (std::size_t mu = 0; mu < part.phi.size(); ++mu) {
        for (const auto& e : part.phi[mu]) {
            sums[e.node] += e.value * e.value;
            if (e.value != 0.0) ++count[e.node];
            const auto x = grid.coordinates(e.node);
            double d2 = 0.0;
            for (std::size_t d = 0; d < n; ++d) d2 += (x[d] - part.centers[mu][d]) * (x[d] - part.centers[mu][d]);
            if (e.value < 0.0 || std::sqrt(d2) >= part.radii[mu]) check.support_ok = false;
        }
    }
    for (std::size_t j = 0; j < nodes; ++j) {
        if (grid.interior(j)) check.max_normalization_error = std::max(check.max_normalization_error, std::abs(sums[j] - 1.0));
        check.overlap = std::max(check.overlap, count[j]);
    }
    check.normalization_ok = check.max_normalization_error <= 1e-10;

    // Central differences wherever phi_mu or one of its neighbours is nonzero.
    const double sqrt_eps = std::sqrt(eps);
    double worst = 0.0;
    for (std::size_t mu = 0; mu < part.phi.size(); ++mu) {
        std::vector<std::size_t> touched;
        for (const auto& e : part.phi[mu]) {
            touched.push_back(e.node);
            const auto idx = grid.index_of(e.node);
            for (std::size_t d = 0; d < n; ++d) {
                if (idx[d] > 0) touched.push_back(e.node - grid.stride(d));
                if (idx[d] + 1 < grid.points()[d]) touched.push_back(e.node + grid.stride(d));
            }
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (std::size_t node : touched) {
            if (!grid.interior(node)) continue;
            double g2 = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
                const double diff = (part.value(mu, node + grid.stride(d)) - part.value(mu, node - grid.stride(d))) /
                                    (2.0 * grid.spacing()[d]);
                g2 += diff * diff;
            }
            const double f = part.f_nodes.empty() ? f_reg(pot, grid.coordinates(node)) : part.f_nodes[node];
            worst = std::max(worst, std::sqrt(g2) / (sqrt_eps * f));
        }
    }
    check.gradient_constant = worst;
    check.gradient_finite = std::isfinite(worst);
    return check;
}

json partition_to_json(const PartitionOfUnity& part) {
    json box = json::array();
    for (const auto& [lo, hi] : part.grid.box()) box.push_back({lo, hi});
    json centers = json::array();
    for (const auto& c : part.centers) centers.push_back(c);
    return {{"box", box},
            {"points_per_dim", part.grid.points()},
            {"eps", part.eps},
            {"r", part.r},
            {"center_count", part.centers.size()},
            {"overlap_bound", part.overlap_bound},
            {"centers", centers},
            {"radii", part.radii}};
}

json partition_check_to_json(const PartitionCheck& c) {
    return {{"max_normalization_error", c.max_normalization_error},
            {"normalization_ok", c.normalization_ok},
            {"support_ok", c.support_ok},
            {"overlap", c.overlap},
            {"gradient_constant", c.gradient_constant},
            {"gradient_finite", c.gradient_finite}};
}

std::string partition_nodes_csv(const PartitionOfUnity& part) {
    std::ostringstream os;
    os.precision(17);
    os << "node";
    for (std::size_t d = 0; d < part.grid.dimension(); ++d) os << ",x" << d + 1;
    os << ",mu,phi\n";
    for (std::size_t mu = 0; mu < part.phi.size(); ++mu) {
        for (const auto& e : part.phi[mu]) {
            os << e.node;
            for (double v : part.grid.coordinates(e.node)) os << ',' << v;
            os << ',' << mu << ',' << e.value << '\n';
        }
    }
    return os.str();
}

}  // namespace witten
