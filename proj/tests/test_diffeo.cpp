#include <doctest.h>

#include <random>

#include "orb/scenario.hpp"

using namespace orb;

namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Orbisection constant_section(const Atlas& atlas, const Vec& c) {
    std::map<std::string, FieldPtr> lifts;
    for (const auto& chart : atlas.charts()) lifts[chart.id] = PolyVectorField::constant(c);
    return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
}

std::vector<Vec> orbit_samples(const Scenario& sc, const std::string& chart, int n,
                               unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::vector<Vec> pts;
    const Region inner = sc.atlas->chart(chart).domain.scaled(1.0 / 5.0);
    for (int k = 0; k < n; ++k) pts.push_back(uniform_in_region(inner, rng));
    return pts;
}

}  // namespace

TEST_CASE("budget estimation on the flat mirror") {
    auto sc = fixtures::get("mirror");
    auto budget = sc.make_budget();
    const auto& b = budget.chart("m");
    // flat: delta equals eps; ordering eps < min{tau, nu} <= tau < R
    CHECK(b.delta == b.eps);
    CHECK(b.eps < std::min(b.tau, b.nu));
    CHECK(b.tau < b.R);
    CHECK(b.sigma_t > 0.0);
    // flat injectivity radius at a point is the boundary clearance
    CHECK(sc.atlas->chart("m").domain.clearance(v2(3, 0)) == doctest::Approx(5.0));
    // nested budget regions are the scaled domains
    CHECK(budget.omega("m", 2.0).radius == doctest::Approx(3.2));
    CHECK(budget.omega("m", 1.0).radius == doctest::Approx(1.6));
}

TEST_CASE("budget estimation on a conformal metric") {
    auto sc = fixtures::get("cone3_conformal");
    auto budget = sc.make_budget();
    const auto& b = budget.chart("c");
    CHECK(b.eps > 0.0);
    CHECK(b.eps < std::min(b.tau, b.nu));
    CHECK(b.delta > 0.0);
    CHECK(b.sigma_t > 0.0);
}

TEST_CASE("local inverse exp") {
    SUBCASE("flat: b(x,y) = y - x and b(x,x) = 0") {
        auto sc = fixtures::get("mirror");
        auto budget = sc.make_budget();
        CHECK((local_inverse_exp(budget, "m", v2(1, 2), v2(1.4, 1.7)) - v2(0.4, -0.3)).norm() < 1e-15);
        CHECK(local_inverse_exp(budget, "m", v2(1, 2), v2(1, 2)).norm() == 0.0);
    }
    SUBCASE("conformal: forward-shoot residual below 1e-10") {
        auto sc = fixtures::get("cone3_conformal");
        auto budget = sc.make_budget();
        std::mt19937_64 rng(3);
        const Region inner = sc.atlas->chart("c").domain.scaled(2.0 / 5.0);
        for (int k = 0; k < 10; ++k) {
            const Vec x = uniform_in_region(inner, rng);
            Vec y = x;
            y[0] += 0.2;
            y[1] -= 0.15;
            const Vec b = local_inverse_exp(budget, "c", x, y);
            CHECK((budget.exp("c", x, b) - y).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(local_inverse_exp(budget, "c", x, x).norm() == 0.0);
        }
    }
}

TEST_CASE("exp_section") {
    auto sc = fixtures::get("mirror");
    auto budget = sc.make_budget();
    SUBCASE("E(0) is the identity on sampled orbit points") {
        auto id = exp_section(Orbisection::zero(*sc.atlas), budget);
        for (const Vec& x : orbit_samples(sc, "m", 100, 5)) {
            const auto p = id.apply({"m", x});
            CHECK((p.rep - canonical_representative({"m", x}, *sc.atlas)).norm() == 0.0);
        }
    }
    SUBCASE("flat constant section translates (trivial-group chart)") {
        auto plane = fixtures::get("plane");
        auto pb = plane.make_budget();
        auto sigma = constant_section(*plane.atlas, v2(0.2, -0.1));
        auto e = exp_section(sigma, pb);
        CHECK((e.lift("u", v2(1, 1)) - v2(1.2, 0.9)).norm() == 0.0);
    }
    SUBCASE("equivariant lifts commute with the mirror") {
        std::mt19937_64 rng(7);
        auto sigma = fixtures::random_section(sc, rng, 0.2);
        auto e = exp_section(sigma, budget);
        Mat M(2, 2);
        M << -1, 0, 0, 1;
        for (const Vec& x : grid_points(budget.omega("m", 2.0), 7))
            CHECK((e.lift("m", M * x) - M * e.lift("m", x)).norm() < 1e-12);
    }
    SUBCASE("budget violation names the chart and the failing norm") {
        auto plane = fixtures::get("plane");
        auto pb = plane.make_budget();
        auto big = constant_section(*plane.atlas, v2(5.0, 0.0));
        try {
            exp_section(big, pb);
            FAIL("expected BudgetError");
        } catch (const BudgetError& e) {
            CHECK(std::string(e.what()).find("'u'") != std::string::npos);
            CHECK(std::string(e.what()).find("c1_norm") != std::string::npos);
        }
        auto report = validate_budget(big, pb);
        CHECK_FALSE(report.pass);
        CHECK_FALSE(report.charts.front().failing.empty());
    }
    SUBCASE("zero section passes every budget") {
        CHECK(validate_budget(Orbisection::zero(*sc.atlas), budget).pass);
    }
    SUBCASE("scaled family passes below a bisection threshold") {
        std::mt19937_64 rng(11);
        auto sigma = fixtures::random_section(sc, rng, 1.0);  // deliberately too large
        REQUIRE_FALSE(validate_budget(sigma, budget).pass);
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 12; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (validate_budget(scale_section(sigma, mid), budget).pass)
                lo = mid;
            else
                hi = mid;
        }
        CHECK(lo > 0.0);  // some scaled copies pass
        CHECK(validate_budget(scale_section(sigma, 0.5 * lo), budget).pass);
    }
}

TEST_CASE("flat composition closed form") {
    auto sc = fixtures::get("mirror");
    auto budget = sc.make_budget();
    std::mt19937_64 rng(13);
    auto sigma = fixtures::random_section(sc, rng, 0.2);
    auto tau = fixtures::random_section(sc, rng, 0.2);
    auto comp = compose_sections(sigma, tau, budget);
    SUBCASE("matches tau(x) + sigma(x + tau(x))") {
        for (const Vec& x : grid_points(budget.omega("m", 2.0), 9)) {
            const Vec t = tau.eval("m", x);
            const Vec expect = t + sigma.eval("m", x + t);
            CHECK((comp.eval("m", x) - expect).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("neutral element") {
        auto zero = Orbisection::zero(*sc.atlas);
        auto right = compose_sections(sigma, zero, budget);
        auto left = compose_sections(zero, tau, budget);
        for (const Vec& x : grid_points(budget.omega("m", 2.0), 7)) {
            CHECK((right.eval("m", x) - sigma.eval("m", x)).norm() < 1e-14);
            CHECK((left.eval("m", x) - tau.eval("m", x)).norm() < 1e-14);
        }
        auto zz = compose_sections(zero, zero, budget);
        CHECK(zz.zero_section());
    }
    SUBCASE("constant fields add (trivial-group chart)") {
        auto plane = fixtures::get("plane");
        auto pb = plane.make_budget();
        auto a = constant_section(*plane.atlas, v2(0.1, 0.05));
        auto b = constant_section(*plane.atlas, v2(-0.04, 0.2));
        auto ab = compose_sections(a, b, pb);
        for (const Vec& x : grid_points(pb.omega("u", 2.0), 5))
            CHECK((ab.eval("u", x) - v2(0.06, 0.25)).norm() < 1e-15);
    }
}

TEST_CASE("group law E(sigma) o E(tau) = E(sigma <> tau)") {
    SUBCASE("flat mirror within 1e-8") {
        auto sc = fixtures::get("mirror");
        auto budget = sc.make_budget();
        std::mt19937_64 rng(17);
        for (int rep = 0; rep < 5; ++rep) {
            auto sigma = fixtures::random_section(sc, rng, 0.2);
            auto tau = fixtures::random_section(sc, rng, 0.2);
            auto comp = compose_sections(sigma, tau, budget);
            auto Es = exp_section(sigma, budget);
            auto Et = exp_section(tau, budget);
            auto Ec = exp_section(comp, budget);
            for (const Vec& x : orbit_samples(sc, "m", 40, 100 + rep)) {
                const auto lhs = Es.apply(Et.apply({"m", x}));
                const auto rhs = Ec.apply({"m", x});
                CHECK((lhs.rep - rhs.rep).norm() < 1e-8);
            }
        }
    }
    SUBCASE("conformal cone within 1e-6 at lattice points") {
        auto sc = fixtures::get("cone3_conformal");
        auto budget = sc.make_budget();
        std::mt19937_64 rng(19);
        auto sigma = fixtures::random_section(sc, rng, 0.05);
        auto tau = fixtures::random_section(sc, rng, 0.05);
        auto comp = compose_sections(sigma, tau, budget, 9);
        auto Es = exp_section(sigma, budget);
        auto Et = exp_section(tau, budget);
        auto Ec = exp_section(comp, budget);
        const auto* sampled = dynamic_cast<const SampledVectorField*>(comp.lift("c").get());
        REQUIRE(sampled != nullptr);
        const Region omega1 = budget.omega("c", 1.0);
        int used = 0;
        for (const Vec& x : sampled->nodes()) {
            if (!omega1.contains(x)) continue;
            ++used;
            const auto lhs = Es.apply(Et.apply({"c", x}));
            const auto rhs = Ec.apply({"c", x});
            CHECK((lhs.rep - rhs.rep).norm() < 1e-6);
        }
        CHECK(used > 0);
    }
}

TEST_CASE("inversion") {
    auto sc = fixtures::get("mirror");
    auto budget = sc.make_budget();
    SUBCASE("0* = 0") {
        auto inv = invert_section(Orbisection::zero(*sc.atlas), budget);
        CHECK(inv.zero_section(1e-14));
    }
    SUBCASE("flat linear matches ((I+A)^{-1} - I) x") {
        Mat A(2, 2);
        A << 0.08, 0, 0, -0.06;  // mirror-equivariant
        std::map<std::string, FieldPtr> lifts{{"m", PolyVectorField::linear(A)}};
        Orbisection sigma(*sc.atlas, std::move(lifts));
        auto inv = invert_section(sigma, budget);
        const Mat expect = (Mat::Identity(2, 2) + A).inverse() - Mat::Identity(2, 2);
        for (const Vec& y : grid_points(budget.omega("m", 5.0 / 4.0), 9))
            CHECK((inv.eval("m", y) - expect * y).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("E(sigma*) o E(sigma) is the identity on samples") {
        std::mt19937_64 rng(23);
        auto sigma = fixtures::random_section(sc, rng, 0.15);
        auto inv = invert_section(sigma, budget);
        auto Es = exp_section(sigma, budget);
        auto Ei = exp_section(inv, budget);
        for (const Vec& x : orbit_samples(sc, "m", 100, 37)) {
            const auto round = Ei.apply(Es.apply({"m", x}));
            CHECK((round.rep - canonical_representative({"m", x}, *sc.atlas)).norm() < 1e-8);
            const auto round2 = Es.apply(Ei.apply({"m", x}));
            CHECK((round2.rep - canonical_representative({"m", x}, *sc.atlas)).norm() < 1e-8);
        }
    }
    SUBCASE("sigma* respects the budget cap tau") {
        std::mt19937_64 rng(29);
        auto sigma = fixtures::random_section(sc, rng, 0.15);
        auto inv = invert_section(sigma, budget);
        CHECK(c1_norm(inv, "m", budget.omega("m", 1.0)) < budget.chart("m").tau);
    }
}

TEST_CASE("injectivity of E") {
    auto sc = fixtures::get("mirror");
    auto budget = sc.make_budget();
    std::mt19937_64 rng(31);
    auto sigma = fixtures::random_section(sc, rng, 0.2);
    auto tau = fixtures::random_section(sc, rng, 0.2);
    // grid-norm difference above 1e-6
    double diff = 0.0;
    for (const Vec& x : grid_points(budget.omega("m", 1.0), 9))
        diff = std::max(diff, (sigma.eval("m", x) - tau.eval("m", x)).norm());
    REQUIRE(diff > 1e-6);
    auto Es = exp_section(sigma, budget);
    auto Et = exp_section(tau, budget);
    double witness = 0.0;
    for (const Vec& x : orbit_samples(sc, "m", 1000, 41)) {
        const auto a = Es.apply({"m", x});
        const auto b = Et.apply({"m", x});
        witness = std::max(witness, (a.rep - b.rep).norm());
    }
    CHECK(witness > 1e-9);
}

TEST_CASE("associativity surrogate") {
    auto sc = fixtures::get("mirror");
    auto budget = sc.make_budget();
    std::mt19937_64 rng(37);
    auto sigma = fixtures::random_section(sc, rng, 0.1);
    auto tau = fixtures::random_section(sc, rng, 0.1);
    auto rho = fixtures::random_section(sc, rng, 0.1);
    auto left = compose_sections(compose_sections(sigma, tau, budget), rho, budget);
    auto right = compose_sections(sigma, compose_sections(tau, rho, budget), budget);
    auto El = exp_section(left, budget);
    auto Er = exp_section(right, budget);
    for (const Vec& x : orbit_samples(sc, "m", 50, 43))
        CHECK((El.apply({"m", x}).rep - Er.apply({"m", x}).rep).norm() < 1e-6);
}

TEST_CASE("diamond and star outputs satisfy the orbisection laws") {
    SUBCASE("flat mirror: exact evaluator equivariance") {
        auto sc = fixtures::get("mirror");
        auto budget = sc.make_budget();
        std::mt19937_64 rng(47);
        auto sigma = fixtures::random_section(sc, rng, 0.15);
        auto tau = fixtures::random_section(sc, rng, 0.15);
        const auto& group = sc.atlas->chart("m").group;
        double res = 0.0, res_star = 0.0;
        for (const Vec& x : grid_points(budget.omega("m", 1.0), 7)) {
            const Vec d = diamond_at(sigma, tau, budget, "m", x);
            const Vec s = star_at(sigma, budget, "m", x);
            for (const auto& g : group.elements()) {
                res = std::max(
                    res, (g.apply_tangent(d) - diamond_at(sigma, tau, budget, "m", g.apply(x))).norm());
                res_star =
                    std::max(res_star, (g.apply_tangent(s) - star_at(sigma, budget, "m", g.apply(x))).norm());
            }
        }
        CHECK(res < 1e-9);
        CHECK(res_star < 1e-9);
    }
    SUBCASE("conformal cone: exact evaluator equivariance") {
        auto sc = fixtures::get("cone3_conformal");
        auto budget = sc.make_budget();
        std::mt19937_64 rng(53);
        auto sigma = fixtures::random_section(sc, rng, 0.05);
        auto tau = fixtures::random_section(sc, rng, 0.05);
        const auto& group = sc.atlas->chart("c").group;
        double res = 0.0;
        for (const Vec& x : grid_points(budget.omega("c", 1.0), 5)) {
            const Vec d = diamond_at(sigma, tau, budget, "c", x);
            for (const auto& g : group.elements())
                res = std::max(
                    res, (g.apply_tangent(d) - diamond_at(sigma, tau, budget, "c", g.apply(x))).norm());
        }
        CHECK(res < 1e-6);
    }
}
