#include <doctest.h>

#include <cmath>
#include <random>

#include "fields.hpp"
#include "polycycle/cyclicity.hpp"
#include "polycycle/errors.hpp"

using namespace polycycle;
using namespace testing_fields;

namespace {

const char* kNames[] = {"l1", "l2", "l3", "l4", "m1"};

ParamVector mu0_vector() {
    const Binding b = game_mu0();
    ParamVector v;
    for (const char* n : kNames) v.push_back(b.at(n));
    return v;
}

ReturnExpansion game_return(const ParamVector& mu) {
    Binding b;
    for (size_t i = 0; i < 5; ++i) b[kNames[i]] = mu[i];
    PolycycleSpec s;
    for (int i = 1; i <= 4; ++i) s.corners.push_back(dulac_coefficients(game_chart(i, b), SectionPair::defaults()));
    return return_expansion(s);
}

const ParamFunction r_minus_1 = [](const ParamVector& mu) { return game_return(mu).r - 1.0; };
const ParamFunction a_minus_1 = [](const ParamVector& mu) { return game_return(mu).a1n - 1.0; };

ConditionLevel level(const char* name, double v, const char* up, const char* lo) { return {name, v, up, lo}; }

}  // namespace

TEST_CASE("gradient of the graphic number") {
    const GradientReport g = gradient([](const ParamVector& mu) { return game_return(mu).r; }, mu0_vector());
    CHECK(g.value[0] == doctest::Approx(27.0 / 8.0).epsilon(1e-8));
    CHECK(g.value[1] == doctest::Approx(8.0 / 27.0 * 9.0 / 4.0).epsilon(1e-8));
    CHECK(std::abs(g.value[4]) < 1e-8);
    CHECK(g.all_consistent());
}

TEST_CASE("gradient trivial cases") {
    const ParamVector mu{0.3, -2.0, 5.0};
    const GradientReport c = gradient([](const ParamVector&) { return 4.0; }, mu);
    for (double v : c.value) CHECK(v == 0.0);
    const GradientReport e = gradient([](const ParamVector& m) { return m[0]; }, mu);
    CHECK(e.value[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.value[1] == 0.0);
    CHECK(e.value[2] == 0.0);
    CHECK(e.step[2] == doctest::Approx(5e-6));
}

TEST_CASE("gradient reports the failing component") {
    const ParamFunction f = [](const ParamVector& m) {
        if (m[1] > 1.0) throw DomainError("outside");
        return m[0];
    };
    try {
        gradient(f, {0.0, 1.0});
        FAIL("expected an error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("component 2") != std::string::npos);
    }
}

TEST_CASE("independence rank at the game point is two") {
    const IndependenceReport rep = independence_rank({r_minus_1, a_minus_1}, mu0_vector());
    CHECK(rep.rank == 2);
    CHECK(rep.consistent);
    CHECK(rep.prefix_rank == std::vector<int>{1, 2});
}

TEST_CASE("independence rank trivial cases") {
    const ParamFunction x = [](const ParamVector& m) { return m[0]; };
    const ParamFunction y = [](const ParamVector& m) { return m[1]; };
    CHECK(independence_rank({x, x}, {1.0, 2.0}).rank == 1);
    CHECK(independence_rank({x, y}, {1.0, 2.0}).rank == 2);
    CHECK_THROWS_AS(independence_rank({}, {1.0}), UsageError);
    CHECK_THROWS_AS(independence_rank({x, y}, {1.0}), UsageError);
}

TEST_CASE("independence rank is invariant under positive rescaling") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0), scale(1e-3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 4;
        std::vector<std::vector<double>> rows(3, std::vector<double>(dim));
        for (auto& r : rows)
            for (double& v : r) v = u(rng);
        if (trial % 2) rows[2] = rows[0];  // rank 2 on odd trials
        const int base = independence_from_matrix(rows).rank;
        for (auto& r : rows) {
            const double c = scale(rng);
            for (double& v : r) v *= c;
        }
        CHECK(independence_from_matrix(rows).rank == base);
        CHECK(base == (trial % 2 ? 2 : 3));
    }
}

TEST_CASE("sign-change witness for r - 1") {
    const auto w = find_sign_change(r_minus_1, mu0_vector());
    REQUIRE(w);
    CHECK(w->f1 * w->f2 < 0.0);
    CHECK_FALSE(find_sign_change([](const ParamVector& m) { return 1.0 + m[0] * m[0]; }, {0.0, 0.0}));
}

TEST_CASE("not-identity probe") {
    const ScalarMap shifted = [](double s) { return s + 1e-6 * s * s; };
    const auto ev = not_identity_probe(shifted, {1e-3, 1e-2, 1e-1});
    CHECK(ev.found);
    CHECK(ev.s == 1e-2);
    // Below ten times the tolerance: not evidence.
    const auto none = not_identity_probe([](double s) { return s + 1e-12 * s; }, {1e-3, 1e-2, 1e-1});
    CHECK_FALSE(none.found);
    CHECK_FALSE(not_identity_probe([](double s) { return s; }, {1e-2}).found);
}

TEST_CASE("verdict examples") {
    SUBCASE("r != 1") {
        VerdictInput in;
        in.levels = {level("r - 1", 0.3, "Thm A(a)", "Thm A(b)"), level("A_1n - 1", 0.0, "Thm A(c)", "Thm A(d)")};
        const CyclicityVerdict v = verdict(in);
        CHECK(v.lower == 0);
        CHECK(v.upper == 0);
    }
    SUBCASE("r = 1, A != 1") {
        VerdictInput in;
        in.levels = {level("r - 1", 0.0, "Thm A(a)", "Thm A(b)"), level("A_1n - 1", 0.2, "Thm A(c)", "Thm A(d)")};
        CyclicityVerdict v = verdict(in);
        CHECK(v.upper == 1);
        CHECK_FALSE(v.lower);
        in.first_sign_change = SignWitness{{0.9}, {1.1}, -0.1, 0.1};
        in.not_identity = NotIdentityEvidence{true, "flow", 1e-2, 1e-3, 1e-9, ""};
        v = verdict(in);
        CHECK(v.lower == 1);
        CHECK(v.upper == 1);
    }
    SUBCASE("game point") {
        const ReturnExpansion R = game_return(mu0_vector());
        VerdictInput in;
        in.levels = return_levels(R);
        REQUIRE(in.levels.size() == 3);
        in.independence = independence_rank({r_minus_1, a_minus_1}, mu0_vector());
        in.not_identity = not_identity_from_levels(in.levels);
        const CyclicityVerdict v = verdict(in);
        CHECK(v.lower == 2);
        CHECK(v.upper == 2);
        bool ad = false, ba = false;
        for (const auto& s : v.rationale) {
            ad = ad || s.rfind("Thm A(d)", 0) == 0;
            ba = ba || s.rfind("Thm B(a)", 0) == 0;
        }
        CHECK(ad);
        CHECK(ba);
        for (const auto& c : v.conditions) CHECK(!c.item.empty());
    }
}

TEST_CASE("verdict monotonicity") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        VerdictInput in;
        const char* names[][3] = {{"p1", "C(a)", "C(b)"}, {"p2", "C(c)", "C(d)"}, {"p3", "C(e)", "C(f)"}};
        for (auto& n : names) in.levels.push_back(level(n[0], coin(rng) ? 0.0 : 0.5, n[1], n[2]));
        in.independence = independence_from_matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
        const CyclicityVerdict base = verdict(in);

        // More evidence can only raise the lower bound.
        VerdictInput more = in;
        more.first_sign_change = SignWitness{{0}, {1}, -1, 1};
        more.not_identity = NotIdentityEvidence{true, "flow", 0.1, 0.1, 1e-9, ""};
        const CyclicityVerdict v = verdict(more);
        if (base.lower) CHECK(v.lower.value_or(-1) >= *base.lower);
        if (base.upper && v.upper) CHECK(*v.upper <= *base.upper);
        if (v.lower && v.upper) CHECK(*v.lower <= *v.upper);

        // A further nonvanishing condition can only lower the upper bound.
        VerdictInput longer = more;
        longer.levels.push_back(level("p4", 0.5, "C(g)", "C(h)"));
        longer.independence = independence_from_matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
        const CyclicityVerdict w = verdict(longer);
        if (v.upper) CHECK(w.upper.value_or(100) <= *v.upper);
        if (v.lower) CHECK(w.lower.value_or(-1) >= *v.lower);
    }
}

TEST_CASE("displacement levels are scaled") {
    DisplacementExpansion d;
    d.a1m = 1e6;
    d.a_star = 2.0;
    d.psi1 = 0.0;
    d.psi2 = 2.6e-9;
    d.psi3 = 5e7;
    const auto lv = displacement_levels(d);
    CHECK(lv[1].value == doctest::Approx(2.6e-15));
    CHECK(lv[2].value == doctest::Approx(50.0));
    VerdictInput in;
    in.levels = lv;
    CHECK(verdict(in).upper == 2);
}
