#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "witten/errors.hpp"

namespace witten {

/// Exponent vector alpha = (alpha_1, ..., alpha_n) of a monomial or partial derivative.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::size_t dimension) : exponents_(dimension, 0) {}
    explicit MultiIndex(std::vector<int> exponents);

    static MultiIndex unit(std::size_t dimension, std::size_t i);

    std::size_t size() const { return exponents_.size(); }
    int operator[](std::size_t i) const { return exponents_[i]; }
    int& operator[](std::size_t i) { return exponents_[i]; }
    const std::vector<int>& exponents() const { return exponents_; }

    /// |alpha|
    int order() const;
    /// alpha! = prod alpha_i!
    double factorial() const;

    MultiIndex operator+(const MultiIndex& other) const;
    bool operator==(const MultiIndex& other) const = default;

    std::string to_string() const;

private:
    std::vector<int> exponents_;
};

/// Graded-lexicographic strict order: lower total degree first, then larger
/// leading exponents first (x1^2 < x1 x2 < x2^2).
bool graded_less(const MultiIndex& a, const MultiIndex& b);

/// All multi-indices of dimension n with |alpha| == order, in graded order.
std::vector<MultiIndex> multi_indices_of_order(std::size_t dimension, int order);
/// All multi-indices with lo <= |alpha| <= hi, in graded order.
std::vector<MultiIndex> multi_indices_between(std::size_t dimension, int lo, int hi);

struct Term {
    MultiIndex exponents;
    double coeff = 0.0;
};

/// Real multivariate polynomial stored as a sparse term list.
///
/// Terms are kept sorted by graded_less, exponent vectors are unique and no
/// stored coefficient is exactly zero. Values are immutable once built; every
/// operation returns a new polynomial.
class Polynomial {
public:
    explicit Polynomial(std::size_t dimension = 1);
    /// Duplicate exponent vectors are summed; exact zeros are dropped.
    Polynomial(std::size_t dimension, std::vector<Term> terms);

    static Polynomial constant(std::size_t dimension, double c);
    static Polynomial variable(std::size_t dimension, std::size_t i);
    static Polynomial monomial(const MultiIndex& alpha, double coeff = 1.0);

    std::size_t dimension() const { return dimension_; }
    int degree() const { return degree_; }
    bool is_zero() const { return terms_.empty(); }
    /// True when every stored term has order 0.
    bool is_constant() const { return degree_ == 0; }
    const std::vector<Term>& terms() const { return terms_; }
    double coefficient(const MultiIndex& alpha) const;

    double operator()(std::span<const double> x) const;

    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator-() const { return scaled(-1.0); }
    Polynomial scaled(double s) const;

    bool operator==(const Polynomial& other) const;

    std::string to_string() const;

private:
    void normalize();

    std::size_t dimension_;
    std::vector<Term> terms_;
    int degree_ = 0;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p.scaled(s); }

/// Evaluate p at x. Throws ArgumentError on a dimension mismatch.
double eval(const Polynomial& p, std::span<const double> x);

/// Exact coefficient-level partial derivative d^alpha p.
Polynomial derive(const Polynomial& p, const MultiIndex& alpha);
Polynomial derive(const Polynomial& p, std::size_t variable);

std::vector<Polynomial> gradient(const Polynomial& p);

/// Symmetric n x n matrix of second partials; entry (i, j) at i * n + j.
struct PolyMatrix {
    std::size_t n = 0;
    std::vector<Polynomial> entries;

    const Polynomial& operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
};

PolyMatrix hessian(const Polynomial& p);
Polynomial laplacian(const Polynomial& p);

/// tau * [p(y + h x) - p(y)] expanded exactly by binomial substitution.
Polynomial affine_rescale(const Polynomial& p, std::span<const double> y, double h, double tau);

}  // namespace witten
