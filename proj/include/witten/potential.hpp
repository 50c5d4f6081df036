#pragma once

#include <span>
#include <vector>

#include "witten/linalg.hpp"
#include "witten/poly.hpp"

namespace witten {

/// A derivative d^alpha V together with the multi-index that produced it.
struct Derivative {
    MultiIndex alpha;
    Polynomial poly;
};

/// Polynomial potential V with derivative-order cap k >= 2.
///
/// All derivatives of order 1..k+1 are computed once at construction, so the
/// pointwise weights below only evaluate cached polynomials.
class Potential {
public:
    Potential(Polynomial v, int k);

    const Polynomial& polynomial() const { return v_; }
    int k() const { return k_; }
    std::size_t dimension() const { return v_.dimension(); }

    /// Every distinct multi-index of the given order (1 <= order <= k + 1), paired with d^alpha V.
    std::span<const Derivative> derivatives_of_order(int order) const;
    const std::vector<Polynomial>& gradient() const { return gradient_; }
    const PolyMatrix& hessian() const { return hessian_; }
    const Polynomial& laplacian() const { return laplacian_; }

    /// Number of multi-indices with 1 <= |alpha| <= k.
    std::size_t weight_term_count() const;

private:
    Polynomial v_;
    int k_;
    std::vector<std::vector<Derivative>> by_order_;
    std::vector<Polynomial> gradient_;
    PolyMatrix hessian_;
    Polynomial laplacian_;
};

/// sum_{1<=|a|<=k} |d^a V(x)|^{1/|a|}
double ftilde(const Potential& pot, std::span<const double> x);
/// sum_{1<=|a|<=k} (1 + |d^a V(x)|^2)^{1/(2|a|)}
double f_reg(const Potential& pot, std::span<const double> x);
/// sum_{1<=|a|<=k} tau^{1/|a|} |d^a V(x)|^{1/|a|}; throws ArgumentError for tau <= 0.
double ftilde_tau(const Potential& pot, std::span<const double> x, double tau);

/// Constant C_k with f <= C_k (1 + ftilde): each term obeys
/// (1 + t^2)^{1/(2m)} <= 1 + t^{1/m}, so the term count suffices.
double comparability_constant(const Potential& pot);

struct PointAnalysis {
    std::vector<double> x;
    std::vector<double> grad;
    DenseMatrix hess;
    std::vector<double> lambdas;      // ascending, near-zero values snapped to 0
    std::vector<std::size_t> i_pos;   // indices into lambdas with lambda > 0
    double m_neg = 0.0;               // sum of -lambda over lambda <= 0
    double pos_sum = 0.0;             // sum of lambda over i_pos
    double ftilde_val = 0.0;
    double f_val = 0.0;
    double comparability = 0.0;       // C_k
    int jacobi_sweeps = 0;

    double grad_norm_sq() const;
};

PointAnalysis analyze_point(const Potential& pot, std::span<const double> x);

/// tau^2 |grad V(x)|^2 - tau * Laplacian V(x); throws ArgumentError for tau <= 0.
double witten_potential_term(const Potential& pot, double tau, std::span<const double> x);

}  // namespace witten
