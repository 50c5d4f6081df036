#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace witten {

/// Small dense row-major square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    double frobenius_norm() const;
    double trace() const;
    DenseMatrix transposed() const;
    DenseMatrix operator*(const DenseMatrix& b) const;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

/// Eigen-decomposition H = V diag(values) V^T of a symmetric matrix.
/// Column k of `vectors` is the unit eigenvector for values[k]; values ascend.
struct SymmetricEigen {
    std::vector<double> values;
    DenseMatrix vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// 1e-12 * ||H||_F. Throws NumericalError after 100 sweeps.
SymmetricEigen jacobi_eigen(const DenseMatrix& h);

/// Eigenvalues with |lambda| <= 1e-12 * (1 + ||H||_F) are snapped to zero.
double zero_threshold(const DenseMatrix& h);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace witten
