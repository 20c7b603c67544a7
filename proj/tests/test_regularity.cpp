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

Orbisection linear_section(const Atlas& atlas, const Mat& A) {
    std::map<std::string, FieldPtr> lifts;
    for (const auto& chart : atlas.charts()) lifts[chart.id] = PolyVectorField::linear(A);
    return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
}

Mat expm_series(const Mat& A, int terms = 24) {
    Mat sum = Mat::Identity(A.rows(), A.cols());
    Mat power = sum;
    double fact = 1.0;
    for (int k = 1; k <= terms; ++k) {
        power = power * A;
        fact *= k;
        sum += power / fact;
    }
    return sum;
}

}  // namespace

TEST_CASE("flow of time-dependent sections") {
    auto sc = fixtures::get("plane");
    auto budget = sc.make_budget();
    SUBCASE("constant field integrates to a straight line") {
        auto gamma = TimeDependentSection::polynomial({constant_section(*sc.atlas, v2(0.3, -0.2))});
        const Vec end = flow(gamma, budget, "u", v2(1, 1), 0.75);
        CHECK((end - v2(1.225, 0.85)).norm() < 1e-12);
    }
    SUBCASE("autonomous linear field matches the series exponential") {
        Mat A(2, 2);
        A << 0.15, 0.1, -0.2, 0.05;
        auto gamma = TimeDependentSection::polynomial({linear_section(*sc.atlas, A)});
        const Vec x0 = v2(0.8, -0.5);
        const Vec end = flow(gamma, budget, "u", x0, 1.0);
        CHECK((end - expm_series(A) * x0).norm() < 1e-6);
    }
    SUBCASE("zero field stays put") {
        auto gamma = TimeDependentSection::polynomial({Orbisection::zero(*sc.atlas)});
        CHECK((flow(gamma, budget, "u", v2(0.4, 0.2), 1.0) - v2(0.4, 0.2)).norm() == 0.0);
    }
    SUBCASE("flow escape raises a budget error") {
        auto gamma = TimeDependentSection::polynomial({constant_section(*sc.atlas, v2(8.0, 0))});
        CHECK_THROWS_AS(flow(gamma, budget, "u", v2(0, 0), 1.0), BudgetError);
    }
    SUBCASE("semigroup property of autonomous flows") {
        std::mt19937_64 rng(3);
        auto sigma = fixtures::random_section(sc, rng, 0.3);
        auto gamma = TimeDependentSection::polynomial({sigma});
        // for autonomous fields Fl(s+t) = Fl(t) o Fl(s)
        for (double s : {0.2, 0.4}) {
            for (double t : {0.3, 0.5}) {
                const Vec x0 = v2(0.5, -0.3);
                const Vec one = flow(gamma, budget, "u", x0, s + t);
                const Vec two = flow(gamma, budget, "u", flow(gamma, budget, "u", x0, s), t);
                CHECK((one - two).norm() < 1e-8);
            }
        }
    }
    SUBCASE("equivariant flows commute with the group") {
        auto mir = fixtures::get("mirror");
        auto mb = mir.make_budget();
        std::mt19937_64 rng(5);
        auto sigma = fixtures::random_section(mir, rng, 0.3);
        auto gamma = TimeDependentSection::polynomial({sigma});
        const auto& g = mir.atlas->chart("m").group.element(1);
        for (const Vec& x : grid_points(mb.omega("m", 2.0), 5)) {
            const Vec a = flow(gamma, mb, "m", g.apply(x), 1.0);
            const Vec b = g.apply(flow(gamma, mb, "m", x, 1.0));
            CHECK((a - b).norm() < 1e-8);
        }
    }
}

TEST_CASE("evolution of sections") {
    auto sc = fixtures::get("plane");
    auto budget = sc.make_budget();
    SUBCASE("e(gamma)(0) is the zero section and gamma == 0 evolves to zero") {
        std::mt19937_64 rng(7);
        auto sigma = fixtures::random_section(sc, rng, 0.2);
        auto gamma = TimeDependentSection::polynomial({sigma});
        auto path = evolve(gamma, budget, 8);
        CHECK(path.front().second.zero_section(0.0));

        auto zero_path = evolve(TimeDependentSection::polynomial({Orbisection::zero(*sc.atlas)}),
                                budget, 8);
        for (const auto& [t, slice] : zero_path) CHECK(slice.zero_section(0.0));
    }
    SUBCASE("flat constant field evolves linearly in time") {
        const Vec c = v2(0.25, -0.1);
        auto gamma = TimeDependentSection::polynomial({constant_section(*sc.atlas, c)});
        auto path = evolve(gamma, budget, 4);
        for (const auto& [t, slice] : path) {
            for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
                CHECK((slice.eval("u", x) - t * c).norm() < 1e-12);
        }
    }
    SUBCASE("slices satisfy the orbisection laws (mirror)") {
        auto mir = fixtures::get("mirror");
        auto mb = mir.make_budget();
        std::mt19937_64 rng(11);
        auto sigma = fixtures::random_section(mir, rng, 0.25);
        auto gamma = TimeDependentSection::polynomial({sigma});
        auto slice = evolve_section_at(gamma, mb, 1.0);
        CHECK(check_equivariance(slice, 7) < 1e-6);
    }
    SUBCASE("budget cap violation is reported") {
        auto gamma = TimeDependentSection::polynomial({constant_section(*sc.atlas, v2(3.0, 0))});
        CHECK_THROWS_AS(evolve(gamma, budget, 4), BudgetError);
    }
}

TEST_CASE("slice-kind time sections interpolate linearly") {
    auto sc = fixtures::get("plane");
    std::mt19937_64 rng(29);
    auto s0 = fixtures::random_section(sc, rng, 0.2);
    auto s1 = fixtures::random_section(sc, rng, 0.2);
    auto gamma = TimeDependentSection::slices({s0, s1});
    for (const Vec& x : grid_points(sc.atlas->chart("u").domain.scaled(0.4), 5)) {
        CHECK((gamma.eval("u", x, 0.0) - s0.eval("u", x)).norm() < 1e-15);
        CHECK((gamma.eval("u", x, 1.0) - s1.eval("u", x)).norm() < 1e-15);
        const Vec mid = 0.5 * (s0.eval("u", x) + s1.eval("u", x));
        CHECK((gamma.eval("u", x, 0.5) - mid).norm() < 1e-15);
    }
    // slice at t has the interpolated orbisection
    auto slice = gamma.at(0.25);
    for (const Vec& x : grid_points(sc.atlas->chart("u").domain.scaled(0.4), 5)) {
        const Vec expect = 0.75 * s0.eval("u", x) + 0.25 * s1.eval("u", x);
        CHECK((slice.eval("u", x) - expect).norm() < 1e-14);
    }
}

TEST_CASE("evol operator") {
    auto sc = fixtures::get("plane");
    auto budget = sc.make_budget();
    SUBCASE("gamma == 0 gives the identity") {
        auto d = evol(TimeDependentSection::polynomial({Orbisection::zero(*sc.atlas)}), budget);
        for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
            CHECK((d.lift("u", x) - x).norm() == 0.0);
    }
    SUBCASE("constant field gives the translation") {
        const Vec c = v2(0.2, 0.1);
        auto d = evol(TimeDependentSection::polynomial({constant_section(*sc.atlas, c)}), budget);
        for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
            CHECK((d.lift("u", x) - (x + c)).norm() < 1e-12);
    }
    SUBCASE("linear field matches the series matrix exponential") {
        Mat A(2, 2);
        A << 0.1, 0.05, -0.08, 0.12;
        auto d = evol(TimeDependentSection::polynomial({linear_section(*sc.atlas, A)}), budget);
        const Mat E = expm_series(A);
        for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
            CHECK((d.lift("u", x) - E * x).norm() < 1e-6);
    }
    SUBCASE("autonomous evol equals the time-1 flow of the field") {
        std::mt19937_64 rng(13);
        auto sigma = fixtures::random_section(sc, rng, 0.25);
        auto gamma = TimeDependentSection::polynomial({sigma});
        auto d = evol(gamma, budget);
        for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
            CHECK((d.lift("u", x) - flow(gamma, budget, "u", x, 1.0)).norm() < 1e-6);
    }
}

TEST_CASE("right logarithmic derivative") {
    auto sc = fixtures::get("plane");
    auto budget = sc.make_budget();
    SUBCASE("translation path has constant derivative") {
        const Vec c = v2(0.3, -0.15);
        auto path = [&](double t) {
            return exp_section(scale_section(constant_section(*sc.atlas, c), t), budget);
        };
        auto delta = right_log_derivative(path, budget, 0.5);
        for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
            CHECK((delta.eval("u", x) - c).norm() < 1e-9);
    }
    SUBCASE("constant path has zero derivative") {
        std::mt19937_64 rng(17);
        auto sigma = fixtures::random_section(sc, rng, 0.2);
        auto path = [&](double) { return exp_section(sigma, budget); };
        auto delta = right_log_derivative(path, budget, 0.4);
        for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
            CHECK(delta.eval("u", x).norm() < 1e-10);
    }
    SUBCASE("product integral property: delta^r(Evol gamma) = gamma") {
        std::mt19937_64 rng(19);
        auto s0 = fixtures::random_section(sc, rng, 0.15);
        auto s1 = fixtures::random_section(sc, rng, 0.1);
        auto gamma = TimeDependentSection::polynomial({s0, s1});
        auto path = [&](double t) {
            return exp_section(evolve_section_at(gamma, budget, t), budget);
        };
        for (double t : {0.25, 0.5, 0.75}) {
            auto delta = right_log_derivative(path, budget, t);
            double res = 0.0;
            for (const Vec& x : grid_points(budget.omega("u", 1.0), 5))
                res = std::max(res, (delta.eval("u", x) - gamma.eval("u", x, t)).norm());
            CHECK(res < 1e-4);
        }
    }
}
