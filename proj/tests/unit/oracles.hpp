// Test-side reference computations, written independently of the library.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "witten/spectral.hpp"

namespace oracle {

/// Every partial derivative of V_delta = x^2 y^2 + delta (x^2 + y^2) with
/// 1 <= |alpha| <= 4, written out by hand (14 entries, orders 1,1,2,2,2,...).
struct VdeltaDerivative {
    int order;
    double value;
};

inline std::vector<VdeltaDerivative> vdelta_derivatives(double d, double x, double y) {
    return {{1, 2 * x * y * y + 2 * d * x}, {1, 2 * x * x * y + 2 * d * y},
            {2, 2 * y * y + 2 * d},         {2, 4 * x * y},
            {2, 2 * x * x + 2 * d},         {3, 0.0},
            {3, 4 * y},                     {3, 4 * x},
            {3, 0.0},                       {4, 0.0},
            {4, 0.0},                       {4, 4.0},
            {4, 0.0},                       {4, 0.0}};
}

inline double vdelta_ftilde_tau(double d, double x, double y, double tau) {
    double s = 0.0;
    for (const auto& t : vdelta_derivatives(d, x, y)) s += std::pow(tau * std::abs(t.value), 1.0 / t.order);
    return s;
}

inline Eigen::MatrixXd dense(const witten::SparseSymOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.dimension);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < op.dimension; ++i)
        for (std::size_t k = op.row_start[i]; k < op.row_start[i + 1]; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(op.column[k])) = op.value[k];
    return m;
}

inline Eigen::VectorXd dense_eigenvalues(const witten::SparseSymOperator& op) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(op), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Eigenvalues 4/h^2 sin^2(k pi h / 2), k = 1..m, of the Dirichlet second
/// difference on [0, 1] with m interior nodes, h = 1/(m+1).
inline std::vector<double> discrete_laplacian_spectrum(std::size_t m) {
    const double h = 1.0 / static_cast<double>(m + 1);
    std::vector<double> ev;
    for (std::size_t k = 1; k <= m; ++k) {
        const double s = std::sin(static_cast<double>(k) * M_PI * h / 2.0);
        ev.push_back(4.0 / (h * h) * s * s);
    }
    return ev;
}

template <class F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double step) {
    const double x0 = x[i];
    x[i] = x0 + step;
    const double up = f(x);
    x[i] = x0 - step;
    const double down = f(x);
    return (up - down) / (2.0 * step);
}

}  // namespace oracle
