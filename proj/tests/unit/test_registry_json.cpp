#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "witten/json_io.hpp"
#include "witten/registry.hpp"

using namespace witten;

TEST_CASE("registered names") {
    const auto v = parse_registered_name("vdelta:-0.5");
    REQUIRE(v.has_value());
    CHECK(v->family == ExampleFamily::vdelta);
    CHECK(v->delta == -0.5);
    CHECK(parse_registered_name("phidelta:2")->family == ExampleFamily::phidelta);
    CHECK_FALSE(parse_registered_name("vdelta:").has_value());
    CHECK_FALSE(parse_registered_name("vdelta:1x").has_value());
    CHECK_FALSE(parse_registered_name("other:1").has_value());
    CHECK_THROWS_AS(expand_registered_potential("nope"), ArgumentError);

    const Polynomial p = vdelta_polynomial(0.5);
    CHECK(p.coefficient(MultiIndex(std::vector<int>{2, 2})) == 1.0);
    CHECK(p.coefficient(MultiIndex(std::vector<int>{2, 0})) == 0.5);
    CHECK(p.coefficient(MultiIndex(std::vector<int>{0, 2})) == 0.5);
    CHECK(p.terms().size() == 3);
    // (x1^2 - x2)^2 + d x2^2 = x1^4 - 2 x1^2 x2 + (1 + d) x2^2
    const Polynomial q = phidelta_polynomial(2.0);
    CHECK(q.coefficient(MultiIndex(std::vector<int>{4, 0})) == 1.0);
    CHECK(q.coefficient(MultiIndex(std::vector<int>{2, 1})) == -2.0);
    CHECK(q.coefficient(MultiIndex(std::vector<int>{0, 2})) == 3.0);
    CHECK(expand_registered_potential("phidelta:2").k() == 4);
}

TEST_CASE("polynomial JSON round trip") {
    std::mt19937_64 gen(9);
    std::uniform_int_distribution<int> e(0, 4);
    std::normal_distribution<double> c;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + t % 3;
        std::vector<Term> terms;
        for (int k = 0; k < 6; ++k) {
            std::vector<int> ex(n);
            for (auto& x : ex) x = e(gen);
            terms.push_back(Term{MultiIndex(ex), c(gen)});
        }
        const Polynomial p(n, terms);
        const Polynomial back = polynomial_from_json(json::parse(polynomial_to_json(p).dump()));
        CHECK(back == p);
    }
}

TEST_CASE("malformed polynomial JSON is rejected") {
    CHECK_THROWS_AS(polynomial_from_json(json::parse(R"({"terms": []})")), ArgumentError);
    CHECK_THROWS_AS(polynomial_from_json(json::parse(R"({"dimension": 0, "terms": []})")), ArgumentError);
    CHECK_THROWS_AS(polynomial_from_json(json::parse(R"({"dimension": 2, "terms": [{"exponents": [1], "coeff": 1}]})")),
                    ArgumentError);
    CHECK_THROWS_AS(polynomial_from_json(json::parse(
                        R"({"dimension": 1, "terms": [{"exponents": [1], "coeff": 1}, {"exponents": [1], "coeff": 2}]})")),
                    ArgumentError);
    CHECK_THROWS_AS(polynomial_from_json(json::parse(R"({"dimension": 1, "terms": [{"exponents": [-1], "coeff": 1}]})")),
                    ArgumentError);
    CHECK_THROWS_AS(vector_from_json(json::parse(R"(["a"])")), ArgumentError);
}

TEST_CASE("potentials load from files") {
    const std::string path = "witten_test_poly.json";
    {
        std::ofstream out(path);
        out << R"({"dimension": 1, "terms": [{"exponents": [2], "coeff": 0.5}]})";
    }
    const LoadedPotential lp = load_potential(path, 2);
    CHECK(lp.source.family == ExampleFamily::none);
    CHECK(lp.potential.k() == 2);
    CHECK(lp.potential.polynomial().coefficient(MultiIndex(std::vector<int>{2})) == 0.5);
    std::remove(path.c_str());
    CHECK_THROWS(load_potential("does_not_exist.json", 2));
}
