#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "witten/json_io.hpp"
#include "witten/linalg.hpp"
#include "witten/poly.hpp"

namespace witten {

/// Power-law scaling family: y_j = v / j^a, tau_j = j^b, h_j = j^{-c}.
/// A zero direction v gives y_j = 0 for every j.
struct ScalingSequence {
    std::vector<double> v;
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;

    std::vector<double> y(double j) const;
    double tau(double j) const;
    double h(double j) const;
    /// Throws ArgumentError unless a, b, c > 0.
    void validate() const;
    std::string describe() const;
};

/// Member tau_j [p(y_j + h_j x) - p(y_j)] assembled from Taylor coefficients
/// tau_j h_j^{|a|} d^a p(y_j) / a!.
Polynomial scaled_member(const Polynomial& p, const ScalingSequence& seq, double j);

enum class LimitStatus { converged, divergent, indeterminate };
std::string to_string(LimitStatus s);

struct LimitResult {
    LimitStatus status = LimitStatus::indeterminate;
    std::optional<Polynomial> limit;
    std::vector<double> schedule;
    std::vector<Polynomial> members;   // one per schedule entry
    std::vector<MultiIndex> offending;  // divergent or non-settling coefficients
    std::string note;
};

/// Coefficientwise limit of scaled_member along the schedule.
///
/// A coefficient converges when its last four values agree within tol relative
/// to the largest tail coefficient, or when Aitken extrapolation of the last two
/// triples agrees within the same tolerance (power-law corrections decay
/// geometrically on a geometric schedule). It diverges when it exceeds 1/tol or
/// grows on the whole tail with log-log slope >= 1/2.
LimitResult limit_polynomial(const Polynomial& p, const ScalingSequence& seq, std::span<const double> j_schedule,
                             double tol = 1e-6);

enum class CertificateStatus { certified_no_local_min, inequality_violated, constant_q };
std::string to_string(CertificateStatus s);

/// Coefficient field at one point: eigen-decomposition of Hess q(x) with
/// b_kk = sqrt(C~) for lambda_k <= 0 and 1 otherwise, then a = Q^T B^2 Q.
struct CoefficientField {
    SymmetricEigen hess_eigen;
    DenseMatrix a;
    double min_eigenvalue = 0.0;       // of a
    double elliptic_term = 0.0;        // sum_ij a_ij d_i d_j q(x)
    double orthogonality_error = 0.0;  // ||Q^T Q - I||_inf
    double reconstruction_error = 0.0; // ||Q^T Lambda Q - Hess||_inf
};

CoefficientField coefficient_field(const DenseMatrix& hess, double c_tilde);

struct Certificate {
    Polynomial q;
    double c_tilde = 1.0;
    CertificateStatus status = CertificateStatus::inequality_violated;
    std::vector<std::vector<double>> violations;
    double min_a_eigenvalue = 0.0;
    double max_margin = 0.0;  // max of (sum a_ij d_ij q) - C~ |grad q|^2 over samples
    double max_orthogonality_error = 0.0;
    double max_reconstruction_error = 0.0;
    std::size_t sample_count = 0;
};

/// Checks at every sample that min eig(a) >= 1 - 1e-9 and
/// sum a_ij d_i d_j q <= C~ |grad q|^2 + 1e-9. Throws ArgumentError if C~ < 1.
Certificate no_local_min_certificate(const Polynomial& q, double c_tilde, std::span<const std::vector<double>> samples);

/// Interior grid nodes whose value is <= every neighbour in the 3^n stencil.
/// Independent brute-force check of the certificate.
std::vector<std::vector<double>> grid_local_minima(const Polynomial& q, std::span<const std::pair<double, double>> box,
                                                   std::size_t points_per_dim);

/// Newton iteration on grad q from each start (pseudo-inverse of the Hessian).
/// Returns the points where the gradient vanished to rounding; a grid minimum
/// usually sits a fraction of a cell away from the true critical point, which
/// the grid samples alone would miss.
std::vector<std::vector<double>> refine_critical_points(const Polynomial& q,
                                                        std::span<const std::vector<double>> starts);

/// grid_samples(box) plus the refined critical points near grid local minima.
std::vector<std::vector<double>> certificate_samples(const Polynomial& q, std::span<const std::pair<double, double>> box,
                                                     std::size_t points_per_dim);

/// Tensor grid including the box corners.
std::vector<std::vector<double>> grid_samples(std::span<const std::pair<double, double>> box, std::size_t points_per_dim);
/// Uniform points in the open ball B_sigma (origin included first).
std::vector<std::vector<double>> ball_samples(std::size_t dimension, double sigma, std::size_t count, std::uint64_t seed);

/// sup over samples of sum_{I} lambda / (M + |grad|^2); 0/0 counts as 0, x/0 as +inf.
double hessian_gradient_ratio(const Polynomial& p, std::span<const std::vector<double>> samples);

struct LimitCheck {
    ScalingSequence sequence;
    LimitResult limit;
    double c_tilde_estimate = 0.0;
    std::optional<Certificate> certificate;
    std::size_t grid_minima = 0;
};

struct StabilityReport {
    double sigma = 0.0;
    double hypothesis_c = 0.0;
    double hypothesis_constant = 0.0;  // empirical sup on B_sigma
    bool hypothesis_holds = false;
    std::vector<LimitCheck> limits;
};

/// Verifies the Hessian/gradient hypothesis for p on B_sigma, then for each
/// convergent sequence estimates C~ for the limit q on `box_samples` and runs
/// the certificate with max(1, C~).
StabilityReport stability_check(const Polynomial& p, double sigma, double c, std::span<const ScalingSequence> catalog,
                                std::span<const double> j_schedule, std::span<const std::vector<double>> ball_points,
                                std::span<const std::vector<double>> box_points);

json limit_result_to_json(const LimitResult& r);
json certificate_to_json(const Certificate& c);
json stability_report_to_json(const StabilityReport& r);

}  // namespace witten
