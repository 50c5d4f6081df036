#include "witten/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace witten {

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
    for (int e : exponents_) {
        if (e < 0) throw ArgumentError("multi-index exponents must be non-negative");
    }
}

MultiIndex MultiIndex::unit(std::size_t dimension, std::size_t i) {
    MultiIndex a(dimension);
    a.exponents_.at(i) = 1;
    return a;
}

int MultiIndex::order() const { return std::accumulate(exponents_.begin(), exponents_.end(), 0); }

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int e : exponents_) {
        for (int k = 2; k <= e; ++k) f *= k;
    }
    return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    if (size() != other.size()) throw ArgumentError("multi-index dimension mismatch");
    MultiIndex r(*this);
    for (std::size_t i = 0; i < size(); ++i) r.exponents_[i] += other.exponents_[i];
    return r;
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < size(); ++i) os << (i ? "," : "") << exponents_[i];
    os << ')';
    return os.str();
}

bool graded_less(const MultiIndex& a, const MultiIndex& b) {
    const int oa = a.order();
    const int ob = b.order();
    if (oa != ob) return oa < ob;
    return std::lexicographical_compare(b.exponents().begin(), b.exponents().end(), a.exponents().begin(),
                                        a.exponents().end());
}

namespace {

void enumerate_order(std::size_t pos, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
    if (pos + 1 == current.size()) {
        current[pos] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[pos] = e;
        enumerate_order(pos + 1, remaining - e, current, out);
    }
    current[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(std::size_t dimension, int order) {
    if (dimension == 0) throw ArgumentError("dimension must be positive");
    std::vector<MultiIndex> out;
    if (order < 0) return out;
    MultiIndex current(dimension);
    enumerate_order(0, order, current, out);
    return out;
}

std::vector<MultiIndex> multi_indices_between(std::size_t dimension, int lo, int hi) {
    std::vector<MultiIndex> out;
    for (int m = std::max(lo, 0); m <= hi; ++m) {
        auto level = multi_indices_of_order(dimension, m);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

Polynomial::Polynomial(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw ArgumentError("polynomial dimension must be positive");
}

Polynomial::Polynomial(std::size_t dimension, std::vector<Term> terms) : dimension_(dimension), terms_(std::move(terms)) {
    if (dimension == 0) throw ArgumentError("polynomial dimension must be positive");
    for (const auto& t : terms_) {
        if (t.exponents.size() != dimension_) throw ArgumentError("term exponent length differs from dimension");
    }
    normalize();
}

Polynomial Polynomial::constant(std::size_t dimension, double c) {
    return Polynomial(dimension, {Term{MultiIndex(dimension), c}});
}

Polynomial Polynomial::variable(std::size_t dimension, std::size_t i) {
    return Polynomial(dimension, {Term{MultiIndex::unit(dimension, i), 1.0}});
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, double coeff) {
    return Polynomial(alpha.size(), {Term{alpha, coeff}});
}

void Polynomial::normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return graded_less(a.exponents, b.exponents); });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!merged.empty() && merged.back().exponents == t.exponents) {
            merged.back().coeff += t.coeff;
        } else {
            merged.push_back(std::move(t));
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
    terms_ = std::move(merged);
    degree_ = 0;
    for (const auto& t : terms_) degree_ = std::max(degree_, t.exponents.order());
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), alpha,
                               [](const Term& t, const MultiIndex& a) { return graded_less(t.exponents, a); });
    if (it != terms_.end() && it->exponents == alpha) return it->coeff;
    return 0.0;
}

double Polynomial::operator()(std::span<const double> x) const {
    if (x.size() != dimension_) throw ArgumentError("evaluation point has wrong dimension");
    double sum = 0.0;
    for (const auto& t : terms_) {
        double v = t.coeff;
        for (std::size_t i = 0; i < dimension_; ++i) {
            for (int e = t.exponents[i]; e > 0; --e) v *= x[i];
        }
        sum += v;
    }
    return sum;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    if (dimension_ != other.dimension_) throw ArgumentError("polynomial dimension mismatch");
    std::vector<Term> all = terms_;
    all.insert(all.end(), other.terms_.begin(), other.terms_.end());
    return Polynomial(dimension_, std::move(all));
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + other.scaled(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (dimension_ != other.dimension_) throw ArgumentError("polynomial dimension mismatch");
    std::vector<Term> prod;
    prod.reserve(terms_.size() * other.terms_.size());
    for (const auto& a : terms_) {
        for (const auto& b : other.terms_) prod.push_back(Term{a.exponents + b.exponents, a.coeff * b.coeff});
    }
    return Polynomial(dimension_, std::move(prod));
}

Polynomial Polynomial::scaled(double s) const {
    std::vector<Term> t = terms_;
    for (auto& term : t) term.coeff *= s;
    return Polynomial(dimension_, std::move(t));
}

bool Polynomial::operator==(const Polynomial& other) const {
    if (dimension_ != other.dimension_ || terms_.size() != other.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!(terms_[i].exponents == other.terms_[i].exponents) || terms_[i].coeff != other.terms_[i].coeff) {
            return false;
        }
    }
    return true;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& t : terms_) {
        if (!first) os << (t.coeff < 0 ? " - " : " + ");
        else if (t.coeff < 0) os << '-';
        first = false;
        const double c = std::abs(t.coeff);
        const bool unit_coeff = c == 1.0 && t.exponents.order() > 0;
        if (!unit_coeff) os << c;
        bool need_sep = !unit_coeff;
        for (std::size_t i = 0; i < dimension_; ++i) {
            if (t.exponents[i] == 0) continue;
            if (need_sep) os << '*';
            os << 'x' << (i + 1);
            if (t.exponents[i] > 1) os << '^' << t.exponents[i];
            need_sep = true;
        }
    }
    return os.str();
}

double eval(const Polynomial& p, std::span<const double> x) { return p(x); }

Polynomial derive(const Polynomial& p, const MultiIndex& alpha) {
    if (alpha.size() != p.dimension()) throw ArgumentError("derivative multi-index has wrong dimension");
    std::vector<Term> out;
    for (const auto& t : p.terms()) {
        double c = t.coeff;
        MultiIndex e = t.exponents;
        bool vanishes = false;
        for (std::size_t i = 0; i < alpha.size() && !vanishes; ++i) {
            if (alpha[i] > e[i]) {
                vanishes = true;
                break;
            }
            for (int k = 0; k < alpha[i]; ++k) c *= e[i] - k;
            e[i] -= alpha[i];
        }
        if (!vanishes) out.push_back(Term{std::move(e), c});
    }
    return Polynomial(p.dimension(), std::move(out));
}

Polynomial derive(const Polynomial& p, std::size_t variable) {
    return derive(p, MultiIndex::unit(p.dimension(), variable));
}

std::vector<Polynomial> gradient(const Polynomial& p) {
    std::vector<Polynomial> g;
    g.reserve(p.dimension());
    for (std::size_t i = 0; i < p.dimension(); ++i) g.push_back(derive(p, i));
    return g;
}

PolyMatrix hessian(const Polynomial& p) {
    const std::size_t n = p.dimension();
    PolyMatrix h{n, std::vector<Polynomial>(n * n, Polynomial(n))};
    for (std::size_t i = 0; i < n; ++i) {
        const Polynomial di = derive(p, i);
        for (std::size_t j = i; j < n; ++j) {
            h.entries[i * n + j] = derive(di, j);
            h.entries[j * n + i] = h.entries[i * n + j];
        }
    }
    return h;
}

Polynomial laplacian(const Polynomial& p) {
    Polynomial sum(p.dimension());
    for (std::size_t i = 0; i < p.dimension(); ++i) {
        MultiIndex a(p.dimension());
        a[i] = 2;
        sum = sum + derive(p, a);
    }
    return sum;
}

Polynomial affine_rescale(const Polynomial& p, std::span<const double> y, double h, double tau) {
    if (y.size() != p.dimension()) throw ArgumentError("shift point has wrong dimension");
    if (!(h > 0.0) || !(tau > 0.0)) throw ArgumentError("affine_rescale requires h > 0 and tau > 0");
    const std::size_t n = p.dimension();
    // (y_i + h x_i)^e expanded once per (variable, exponent) pair.
    auto shifted_power = [&](std::size_t i, int e) {
        std::vector<Term> t;
        double binom = 1.0;
        for (int k = 0; k <= e; ++k) {
            MultiIndex a(n);
            a[i] = k;
            t.push_back(Term{a, binom * std::pow(y[i], e - k) * std::pow(h, k)});
            binom = binom * (e - k) / (k + 1);
        }
        return Polynomial(n, std::move(t));
    };
    Polynomial sum(n);
    for (const auto& term : p.terms()) {
        Polynomial prod = Polynomial::constant(n, term.coeff);
        for (std::size_t i = 0; i < n; ++i) {
            if (term.exponents[i] > 0) prod = prod * shifted_power(i, term.exponents[i]);
        }
        sum = sum + prod;
    }
    // Subtracting p(y) is the same as dropping the constant term.
    std::vector<Term> out;
    for (const auto& t : sum.terms()) {
        if (t.exponents.order() > 0) out.push_back(Term{t.exponents, tau * t.coeff});
    }
    return Polynomial(n, std::move(out));
}

}  // namespace witten
