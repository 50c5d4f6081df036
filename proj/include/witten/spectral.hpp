#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "witten/json_io.hpp"
#include "witten/localization.hpp"
#include "witten/potential.hpp"

namespace witten {

/// Box discretized with `points` nodes per dimension, boundary nodes included.
/// Dirichlet conditions eliminate the boundary, so the unknowns are the
/// interior nodes in row-major order.
class Grid {
public:
    Grid(Box box, std::vector<std::size_t> points);
    Grid(Box box, std::size_t points_per_dim);
    /// Node count per dimension chosen as round((hi - lo) / h) + 1.
    static Grid with_spacing(const Box& box, double h);

    const TensorGrid& nodes() const { return nodes_; }
    std::size_t dimension() const { return nodes_.dimension(); }
    std::size_t unknowns() const { return interior_.size(); }
    const std::vector<double>& spacing() const { return nodes_.spacing(); }
    double cell_volume() const;
    /// Grid node of unknown i.
    std::size_t node(std::size_t i) const { return interior_[i]; }
    /// Unknown index of a grid node, or -1 on the boundary.
    std::ptrdiff_t unknown(std::size_t node) const { return unknown_[node]; }
    std::vector<double> coordinates(std::size_t i) const { return nodes_.coordinates(interior_[i]); }

private:
    TensorGrid nodes_;
    std::vector<std::size_t> interior_;
    std::vector<std::ptrdiff_t> unknown_;
};

/// Symmetric matrix in compressed row storage.
struct SparseSymOperator {
    std::size_t dimension = 0;
    std::vector<std::size_t> row_start;  // size dimension + 1
    std::vector<std::size_t> column;
    std::vector<double> value;
    bool symmetric = false;

    void apply(std::span<const double> x, std::span<double> y) const;
    double diagonal(std::size_t i) const;
    /// Largest |a_ij - a_ji| relative to the largest |a_ij|.
    double asymmetry() const;
    /// min_i (a_ii - sum_{j != i} |a_ij|).
    double gershgorin_lower_bound() const;
    /// op + c I
    SparseSymOperator shifted(double c) const;
};

/// Second-order central differences for -Laplacian plus the exact diagonal
/// tau^2 |grad V|^2 - tau Laplacian V. Throws ArgumentError for tau <= 0.
SparseSymOperator assemble_witten(const Potential& pot, double tau, const Grid& grid);

struct SpectrumResult {
    std::vector<double> eigenvalues;  // ascending
    std::vector<double> residuals;    // ||A v - lambda v|| / ||v||
    std::vector<bool> converged;
    std::vector<std::vector<double>> vectors;  // unit Ritz vectors
    std::size_t iterations = 0;
    std::size_t restarts = 0;
    std::size_t rounds = 0;
    double tolerance = 0.0;

    bool all_converged() const;
};

struct LanczosOptions {
    /// Run on (A - sigma)^{-1} with a sparse LDL^T factorization; sigma
    /// defaults to lowest_shift(A).
    bool shift_invert = false;
    std::optional<double> sigma;
    /// Extra runs started orthogonally to the converged vectors. A single
    /// Krylov sequence sees one copy of a repeated eigenvalue, so these runs
    /// pick up multiplicities; they stop once a run finds nothing new.
    std::size_t deflation_rounds = 3;
};

/// Number of eigenvalues below `shift` from the inertia of an LDL^T
/// factorization of A - shift (Sylvester). Throws NumericalError when the
/// factorization fails or meets a zero pivot.
std::size_t eigenvalues_below(const SparseSymOperator& op, double shift);

/// A shift at most one unit below the smallest eigenvalue, located by
/// bisecting the inertia between the Gershgorin bound and a Rayleigh quotient.
double lowest_shift(const SparseSymOperator& op);

/// The m smallest eigenpairs by Lanczos with full reorthogonalization from a
/// seeded random start. Requires 1 <= m <= dimension / 4. A zero beta restarts
/// the recurrence with a fresh vector orthogonal to the basis, at most 3 times.
/// Unconverged entries are returned with converged = false.
SpectrumResult lanczos_smallest(const SparseSymOperator& op, std::size_t m, double tol, std::size_t max_iterations,
                                std::uint64_t seed, const LanczosOptions& options = {});

/// #{lambda_i <= lambda}. Throws InsufficientResolution if an unconverged
/// entry comes before the first converged eigenvalue above lambda (a Ritz
/// value only bounds its eigenvalue from above, so it may still lie below), or
/// if every computed eigenvalue lies at or below lambda (more may be missing).
std::size_t counting_function(const SpectrumResult& res, double lambda);

/// Counts eigenvalues <= lambda, enlarging the requested count until a
/// converged eigenvalue above lambda appears. The count is cross-checked
/// against the inertia of A - lambda; a mismatch triggers more deflation
/// rounds and, if it persists, InsufficientResolution.
struct CountResult {
    std::size_t count = 0;
    std::size_t inertia_count = 0;
    SpectrumResult spectrum;
};
CountResult count_below(const SparseSymOperator& op, double lambda, double tol, std::uint64_t seed,
                        std::size_t initial_request = 16);

enum class BoxVerdict { stabilizes, grows, indeterminate };
std::string to_string(BoxVerdict v);

struct BoxProbe {
    double half_width = 0.0;
    std::size_t unknowns = 0;
    std::size_t count = 0;
    std::vector<double> eigenvalues;  // converged eigenvalues <= lambda
};

struct BoxStabilityReport {
    double tau = 1.0;
    double lambda = 0.0;
    double h = 0.0;
    std::vector<BoxProbe> probes;
    BoxVerdict verdict = BoxVerdict::indeterminate;
};

/// N(lambda) on the boxes [-L, L]^n for each L (strictly increasing) at fixed
/// spacing h. stabilizes iff the last two counts agree; grows iff the counts
/// increase strictly over at least three boxes.
BoxStabilityReport box_stability_probe(const Potential& pot, double tau, double lambda,
                                       std::span<const double> half_widths, double h, double tol = 1e-6,
                                       std::uint64_t seed = 42);

/// Smooth quadratic partition phi_mu = chi_mu / sqrt(sum_nu chi_nu^2) with
/// chi_mu(x) = bump(|x - c_mu| / R_mu), evaluated analytically together with
/// its gradient.
struct BumpPartition {
    std::vector<std::vector<double>> centers;
    std::vector<double> radii;

    static BumpPartition from(const PartitionOfUnity& part);
    std::size_t size() const { return radii.size(); }
    /// Writes phi_mu(x) into phi and grad phi_mu(x) into grad (row mu).
    /// Returns sum chi^2; phi and grad are zero where it vanishes.
    double evaluate(std::span<const double> x, std::vector<double>& phi, std::vector<std::vector<double>>& grad) const;
};

struct ImsResult {
    double lhs = 0.0;         // <A u, u>
    double localized = 0.0;   // sum_mu <A (phi_mu u), phi_mu u>
    double correction = 0.0;  // sum_mu ||(grad phi_mu) u||^2
    double residual = 0.0;    // |lhs - (localized - correction)| / (|lhs| + 1)
};

/// IMS localization identity with the discretized operator and grid
/// quadrature. u holds one value per unknown of `grid`. Throws ArgumentError
/// if u is nonzero where the partition's squares do not sum to a positive value.
ImsResult ims_identity_check(const Potential& pot, double tau, const BumpPartition& part, const Grid& grid,
                             std::span<const double> u);
ImsResult ims_identity_check(const Potential& pot, double tau, const PartitionOfUnity& part,
                             std::span<const double> u);

/// exp(1 - 1/(1 - |x - a|^2 / rho^2)) sampled at the unknowns of grid.
std::vector<double> bump_function(const Grid& grid, std::span<const double> center, double rho);

struct MaximalEstimate {
    std::vector<std::vector<double>> centers;
    std::vector<double> ratios;  // ||ftilde_tau u||^2 / (<A u, u> + ||u||^2), one per centre
    double max_ratio = 0.0;
    double min_ratio = 0.0;
};

/// Ratios over the bump family u_a with radius rho. Throws ArgumentError when
/// a bump reaches the boundary of the grid box.
MaximalEstimate maximal_estimate_probe(const Potential& pot, double tau, std::span<const std::vector<double>> centers,
                                       double rho, const Grid& grid);

/// m = max{1, sqrt((2C - 1) / (2C)) tau0 / tau} for 0 < tau < tau0 and C >= 1.
/// Throws NumericalError if 1 - 1/(2C) <= (m tau / tau0)^2 <= 1 fails.
double m_tau(double tau, double tau0, double c);

/// index,eigenvalue,residual,converged
std::string spectrum_csv(const SpectrumResult& res);
json spectrum_to_json(const SpectrumResult& res);
json box_stability_to_json(const BoxStabilityReport& r);
json ims_to_json(const ImsResult& r);
json maximal_estimate_to_json(const MaximalEstimate& r);

}  // namespace witten
