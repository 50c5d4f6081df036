#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "witten/json_io.hpp"
#include "witten/potential.hpp"

namespace witten {

using Box = std::vector<std::pair<double, double>>;

/// Parses "lo:hi,lo:hi,..." into a box.
Box parse_box(const std::string& text);

/// Tensor grid over a box including the boundary nodes. Flat node indices are
/// row-major (last coordinate fastest), which is lexicographic order of the
/// coordinates.
class TensorGrid {
public:
    TensorGrid(Box box, std::vector<std::size_t> points);
    TensorGrid(Box box, std::size_t points_per_dim);

    std::size_t dimension() const { return box_.size(); }
    std::size_t node_count() const { return count_; }
    const Box& box() const { return box_; }
    const std::vector<std::size_t>& points() const { return points_; }
    const std::vector<double>& spacing() const { return spacing_; }
    std::size_t stride(std::size_t d) const { return stride_[d]; }

    std::vector<std::size_t> index_of(std::size_t node) const;
    std::size_t node_of(std::span<const std::size_t> idx) const;
    std::vector<double> coordinates(std::size_t node) const;
    double coordinate(std::size_t d, std::size_t i) const { return box_[d].first + spacing_[d] * static_cast<double>(i); }
    bool interior(std::size_t node) const;

    /// Calls fn(node) for every node within Euclidean distance `radius` of `center`
    /// (closed ball when `closed`, open otherwise).
    template <class Fn>
    void for_each_in_ball(std::span<const double> center, double radius, bool closed, Fn&& fn) const;

private:
    Box box_;
    std::vector<std::size_t> points_;
    std::vector<double> spacing_;
    std::vector<std::size_t> stride_;
    std::size_t count_ = 0;
};

/// The metric eps f(x)^2 |dx|^2 together with its slow-variation data.
struct SlowMetric {
    double eps = 0.25;
    double r = 0.3;
    double c_star = 1.0;

    /// Throws ArgumentError unless 0 < eps <= 1 and 0 < r < 1.
    void validate() const;
    /// Radius of the metric unit ball at x: r / f(x).
    double ball_radius(double f_at_x) const { return r / f_at_x; }
};

/// max of f(z) / f(x) over z sampled in the closed ball |z - x| <= r / f(x):
/// the centre, `sample_count` boundary points and `sample_count` Halton interior points.
double psi_r(const Potential& pot, std::span<const double> x, double r, std::size_t sample_count, std::uint64_t seed);

/// Empirical C_*: sup of max(f(y)/f(x), f(x)/f(y)) over grid node pairs with
/// |y - x| <= r / f(x). Pair sets are nested in r, so the estimate is monotone.
double estimate_slow_variation(const Potential& pot, const Box& box, double r, std::size_t points_per_dim);

/// bump(s) = exp(1 - 1/(1 - s^2)) for |s| < 1, else 0.
double bump(double s);

struct PhiEntry {
    std::size_t node;
    double value;
};

struct PartitionOfUnity {
    TensorGrid grid;
    double eps = 0.25;
    double r = 0.3;
    std::vector<std::vector<double>> centers;
    std::vector<double> radii;                // r / (sqrt(2) f(x_mu))
    std::vector<std::vector<PhiEntry>> phi;   // nonzero values per centre, sorted by node
    std::vector<double> f_nodes;              // f at every grid node
    std::size_t overlap_bound = 0;            // max number of nonzero phi at a node

    double value(std::size_t mu, std::size_t node) const;
    /// sum_mu phi_mu(node)^2
    double square_sum(std::size_t node) const;
};

/// Greedy cover of the box by balls B(x_mu, r / (sqrt(2) f(x_mu))): nodes are
/// scanned lexicographically and become centres unless already within
/// radius / sqrt(2) of an earlier centre. Raw bumps are normalized so that the
/// squares sum to one. Throws ArgumentError when the grid spacing is not below
/// a quarter of the smallest ball radius and NumericalError when a node is left
/// uncovered.
PartitionOfUnity build_partition(const Potential& pot, const Box& box, double eps, double r, std::size_t points_per_dim);

struct PartitionCheck {
    double max_normalization_error = 0.0;  // over interior nodes
    bool normalization_ok = false;         // <= 1e-10
    bool support_ok = false;               // every nonzero phi_mu lies strictly inside its ball
    std::size_t overlap = 0;
    double gradient_constant = 0.0;        // sup |grad_h phi_mu| / (sqrt(eps) f)
    bool gradient_finite = false;
};

PartitionCheck verify_partition(const PartitionOfUnity& part, const Potential& pot, double eps);

json partition_to_json(const PartitionOfUnity& part);
json partition_check_to_json(const PartitionCheck& c);
/// node, x1..xn, mu, phi rows for every nonzero value.
std::string partition_nodes_csv(const PartitionOfUnity& part);

// ---------------------------------------------------------------------------

template <class Fn>
void TensorGrid::for_each_in_ball(std::span<const double> center, double radius, bool closed, Fn&& fn) const {
    const std::size_t n = dimension();
    std::vector<std::size_t> lo(n), hi(n), idx(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double a = (center[d] - radius - box_[d].first) / spacing_[d];
        const double b = (center[d] + radius - box_[d].first) / spacing_[d];
        if (b < 0.0 || a > static_cast<double>(points_[d] - 1)) return;
        lo[d] = a <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(a - 1e-9));
        hi[d] = std::min(points_[d] - 1, static_cast<std::size_t>(std::floor(b + 1e-9)));
        if (lo[d] > hi[d]) return;
        idx[d] = lo[d];
    }
    const double r2 = radius * radius;
    while (true) {
        double dist2 = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            const double diff = coordinate(d, idx[d]) - center[d];
            dist2 += diff * diff;
        }
        if (closed ? dist2 <= r2 : dist2 < r2) fn(node_of(idx));
        std::size_t d = n;
        while (d > 0) {
            --d;
            if (idx[d] < hi[d]) {
                ++idx[d];
                break;
            }
            idx[d] = lo[d];
            if (d == 0) return;
        }
    }
}

}  // namespace witten
