#include <doctest.h>

#include <random>

#include "polycycle/errors.hpp"
#include "polycycle/expr.hpp"

using namespace polycycle;

namespace {

const std::vector<std::string> kGameParams{"l1", "l2", "l3", "l4", "m1"};

// Random tree over the grammar, printed in a loose (not fully parenthesized) form.
std::string random_text(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 7 : 2);
    switch (pick(rng)) {
        case 0: return std::to_string(rng() % 9);
        case 1: return (rng() % 2) ? "x" : "y";
        case 2: return std::to_string(1 + rng() % 5) + "/" + std::to_string(1 + rng() % 7);
        case 3: return "(" + random_text(rng, depth - 1) + " + " + random_text(rng, depth - 1) + ")";
        case 4: return "(" + random_text(rng, depth - 1) + " - " + random_text(rng, depth - 1) + ")";
        case 5: return random_text(rng, depth - 1) + "*" + random_text(rng, depth - 1);
        case 6: return "-" + random_text(rng, depth - 1);
        default: return "(" + random_text(rng, depth - 1) + ")^" + std::to_string(rng() % 3);
    }
}

}  // namespace

TEST_CASE("parses the game right-hand side") {
    const Expression e = parse_expression("x*(x-1)*(-1-(l3-1)*x+y)", kGameParams);
    CHECK(e.root() != nullptr);
    const auto fp = e.free_parameters();
    REQUIRE(fp.size() == 1);
    CHECK(fp[0] == "l3");
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse_expression("x+", {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() == 3);
    }
    try {
        parse_expression("x*\n  (y + ]", {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 8);
    }
    CHECK_THROWS_AS(parse_expression("2^3", {}), ParseError);
    CHECK_THROWS_AS(parse_expression("x^y", {}), ParseError);
    CHECK_THROWS_AS(parse_expression("x^1.5", {}), ParseError);
}

TEST_CASE("undeclared identifiers are named") {
    try {
        parse_expression("x + z", {"a"});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("'z'") != std::string::npos);
    }
}

TEST_CASE("instantiate expands polynomials") {
    const auto p = instantiate(parse_expression("2*x^2*y - 3", {}), {});
    CHECK(p.terms().size() == 2);
    CHECK(p.coefficient(2, 1) == 2.0);
    CHECK(p.coefficient(0, 0) == -3.0);

    const auto q = instantiate(parse_expression("(x+y)^2", {}), {});
    CHECK(q.terms().size() == 3);
    CHECK(q.coefficient(2, 0) == 1.0);
    CHECK(q.coefficient(1, 1) == 2.0);
    CHECK(q.coefficient(0, 2) == 1.0);
}

TEST_CASE("game factor g at the origin equals l2") {
    const Expression g = parse_expression(
        "l2 - (l2 + m1)*x - (l2 - 1)*y + (m1 - 1)*x^2 + (l2 - l4)*x*y", kGameParams);
    const Binding b{{"l1", 8.0 / 27}, {"l2", 1.5}, {"l3", 1.5}, {"l4", 1.5}, {"m1", 0.4}};
    CHECK(instantiate(g, b)(0.0, 0.0) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("rational literals and division") {
    CHECK(instantiate(parse_expression("1/2", {}), {}).constant_term() == 0.5);
    // x/2/3 stays left associative.
    CHECK(instantiate(parse_expression("x/2/3", {}), {}).coefficient(1, 0) == doctest::Approx(1.0 / 6));
    CHECK(instantiate(parse_expression("0.25*x", {}), {}).coefficient(1, 0) == 0.25);
    CHECK_THROWS_AS(instantiate(parse_expression("1/x", {}), {}), ModelError);
    CHECK_THROWS_AS(instantiate(parse_expression("a*x", {"a"}), {}), ModelError);
    CHECK_THROWS_AS(parse_expression("1/0", {}), ParseError);
}

TEST_CASE("print round trip") {
    std::mt19937 rng(7);
    for (int i = 0; i < 300; ++i) {
        const std::string text = random_text(rng, 4);
        const Expression e = parse_expression(text, {});
        const Expression back = parse_expression(print(e), {});
        INFO(text << "  ->  " << print(e));
        CHECK(structurally_equal(e.root(), back.root()));
    }
    const Expression lit = parse_expression("(2)^2 + 0.5 - -x", {});
    CHECK(structurally_equal(lit.root(), parse_expression(print(lit), {}).root()));
}

TEST_CASE("instantiate is additive") {
    std::mt19937 rng(11);
    const Binding none;
    for (int i = 0; i < 100; ++i) {
        const std::string a = random_text(rng, 3), b = random_text(rng, 3);
        const auto pa = instantiate(parse_expression(a, {}), none);
        const auto pb = instantiate(parse_expression(b, {}), none);
        const auto sum = instantiate(parse_expression("(" + a + ") + (" + b + ")", {}), none);
        const auto diff = instantiate(parse_expression("(" + a + ") - (" + b + ")", {}), none);
        const auto expect_sum = pa + pb, expect_diff = pa - pb;
        for (const auto& [e, c] : expect_sum.terms())
            CHECK(sum.coefficient(e.first, e.second) == doctest::Approx(c).epsilon(1e-12));
        for (const auto& [e, c] : expect_diff.terms())
            CHECK(diff.coefficient(e.first, e.second) == doctest::Approx(c).epsilon(1e-12));
        CHECK(sum.terms().size() == expect_sum.terms().size());
    }
}

TEST_CASE("section curves use their own variable") {
    const Expression e = parse_expression("h + s^2", {"h"}, {"s"});
    const auto p = instantiate(e, {{"h", 0.5}});
    CHECK(p.coefficient(0, 0) == 0.5);
    CHECK(p.coefficient(2, 0) == 1.0);
    CHECK_THROWS_AS(parse_expression("x", {}, {"s"}), ParseError);
}
