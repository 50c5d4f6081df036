#include "witten/potential.hpp"

#include <cmath>

#include "witten/errors.hpp"

namespace witten {

Potential::Potential(Polynomial v, int k)
    : v_(std::move(v)), k_(k), hessian_{}, laplacian_(v_.dimension()) {
    if (k_ < 2) throw ArgumentError("derivative order cap k must be at least 2");
    const std::size_t n = v_.dimension();
    by_order_.resize(static_cast<std::size_t>(k_) + 2);
    for (int m = 1; m <= k_ + 1; ++m) {
        for (auto& alpha : multi_indices_of_order(n, m)) {
            Polynomial d = derive(v_, alpha);
            by_order_[m].push_back(Derivative{std::move(alpha), std::move(d)});
        }
    }
    gradient_ = witten::gradient(v_);
    hessian_ = witten::hessian(v_);
    laplacian_ = witten::laplacian(v_);
}

std::span<const Derivative> Potential::derivatives_of_order(int order) const {
    if (order < 1 || order > k_ + 1) throw ArgumentError("derivative order outside 1..k+1");
    return by_order_[order];
}

std::size_t Potential::weight_term_count() const {
    std::size_t count = 0;
    for (int m = 1; m <= k_; ++m) count += by_order_[m].size();
    return count;
}

double ftilde(const Potential& pot, std::span<const double> x) {
    double sum = 0.0;
    for (int m = 1; m <= pot.k(); ++m) {
        const double inv = 1.0 / m;
        for (const auto& d : pot.derivatives_of_order(m)) sum += std::pow(std::abs(d.poly(x)), inv);
    }
    return sum;
}

double f_reg(const Potential& pot, std::span<const double> x) {
    double sum = 0.0;
    for (int m = 1; m <= pot.k(); ++m) {
        const double e = 1.0 / (2.0 * m);
        for (const auto& d : pot.derivatives_of_order(m)) {
            const double v = d.poly(x);
            sum += std::pow(1.0 + v * v, e);
        }
    }
    return sum;
}

double ftilde_tau(const Potential& pot, std::span<const double> x, double tau) {
    if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
    double sum = 0.0;
    for (int m = 1; m <= pot.k(); ++m) {
        const double inv = 1.0 / m;
        for (const auto& d : pot.derivatives_of_order(m)) sum += std::pow(tau * std::abs(d.poly(x)), inv);
    }
    return sum;
}

double comparability_constant(const Potential& pot) { return static_cast<double>(pot.weight_term_count()); }

double PointAnalysis::grad_norm_sq() const { return dot(grad, grad); }

PointAnalysis analyze_point(const Potential& pot, std::span<const double> x) {
    const std::size_t n = pot.dimension();
    if (x.size() != n) throw ArgumentError("analysis point has wrong dimension");
    PointAnalysis pa;
    pa.x.assign(x.begin(), x.end());
    pa.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) pa.grad[i] = pot.gradient()[i](x);
    pa.hess = DenseMatrix(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pa.hess(i, j) = pot.hessian()(i, j)(x);

    const SymmetricEigen eig = jacobi_eigen(pa.hess);
    pa.jacobi_sweeps = eig.sweeps;
    const double snap = zero_threshold(pa.hess);
    pa.lambdas = eig.values;
    for (std::size_t l = 0; l < n; ++l) {
        double& lam = pa.lambdas[l];
        if (std::abs(lam) <= snap) lam = 0.0;
        if (lam > 0.0) {
            pa.i_pos.push_back(l);
            pa.pos_sum += lam;
        } else {
            pa.m_neg -= lam;
        }
    }
    pa.ftilde_val = ftilde(pot, x);
    pa.f_val = f_reg(pot, x);
    pa.comparability = comparability_constant(pot);
    return pa;
}

double witten_potential_term(const Potential& pot, double tau, std::span<const double> x) {
    if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
    double g2 = 0.0;
    for (const auto& g : pot.gradient()) {
        const double v = g(x);
        g2 += v * v;
    }
    return tau * tau * g2 - tau * pot.laplacian()(x);
}

}  // namespace witten
