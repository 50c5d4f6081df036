#include "witten/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "witten/errors.hpp"

namespace witten {

json polynomial_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& t : p.terms()) {
        terms.push_back({{"exponents", t.exponents.exponents()}, {"coeff", t.coeff}});
    }
    return {{"dimension", p.dimension()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const json& j) {
    try {
        if (!j.is_object() || !j.contains("dimension") || !j.contains("terms")) {
            throw ArgumentError("polynomial JSON needs \"dimension\" and \"terms\"");
        }
        const auto& dim = j.at("dimension");
        if (!dim.is_number_integer() || dim.get<long long>() < 1) {
            throw ArgumentError("polynomial dimension must be a positive integer");
        }
        const auto n = dim.get<std::size_t>();
        std::vector<Term> terms;
        std::set<std::vector<int>> seen;
        for (const auto& t : j.at("terms")) {
            const auto& ex = t.at("exponents");
            const auto& c = t.at("coeff");
            if (!ex.is_array() || !c.is_number()) throw ArgumentError("malformed polynomial term");
            auto e = ex.get<std::vector<int>>();
            if (e.size() != n) throw ArgumentError("term exponent length differs from dimension");
            if (!seen.insert(e).second) throw ArgumentError("duplicate exponent vector in polynomial JSON");
            terms.push_back(Term{MultiIndex(std::move(e)), c.get<double>()});
        }
        return Polynomial(n, std::move(terms));
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("malformed polynomial JSON: ") + e.what());
    }
}

Polynomial read_polynomial_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open potential file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ArgumentError("cannot parse " + path + ": " + e.what());
    }
    return polynomial_from_json(j);
}

json vector_to_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

std::vector<double> vector_from_json(const json& j) {
    try {
        return j.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("expected a numeric array: ") + e.what());
    }
}

json point_analysis_to_json(const PointAnalysis& pa) {
    json hess = json::array();
    for (std::size_t i = 0; i < pa.hess.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < pa.hess.size(); ++j) row.push_back(pa.hess(i, j));
        hess.push_back(row);
    }
    return {{"x", pa.x},
            {"grad", pa.grad},
            {"hess", hess},
            {"lambdas", pa.lambdas},
            {"i_pos", pa.i_pos},
            {"m_neg", pa.m_neg},
            {"pos_sum", pa.pos_sum},
            {"ftilde", pa.ftilde_val},
            {"f", pa.f_val},
            {"C_k", pa.comparability}};
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path);
    out << body;
}

}  // namespace witten
