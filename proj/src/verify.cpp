#include "orb/verify.hpp"

#include "orb/partition.hpp"

namespace orb {

namespace {

struct Ctx {
    const Scenario& sc;
    NeighborhoodBudget budget;
    std::mt19937_64 rng;
    std::vector<CheckResult> out;

    void record(const std::string& name, double residual, double bound,
                const std::string& detail = "") {
        out.push_back({name, residual < bound, residual, bound, detail});
    }
    void record_flag(const std::string& name, bool pass, const std::string& detail = "") {
        out.push_back({name, pass, pass ? 0.0 : 1.0, 1.0, detail});
    }
};

TangentOrbVector random_vector(Ctx& c, double speed_cap) {
    const auto& charts = c.sc.atlas->charts();
    const auto& chart = charts[c.rng() % charts.size()];
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(chart.dim());
    for (Index i = 0; i < v.size(); ++i) v[i] = normal(c.rng);
    if (v.norm() > speed_cap) v *= speed_cap / v.norm();
    return {chart.id, uniform_in_region(chart.domain.scaled(1.0 / 5.0), c.rng), v};
}

void check_group_tables(Ctx& c) {
    double res = 0.0;
    for (const auto& chart : c.sc.atlas->charts()) {
        const auto& g = chart.group;
        for (std::size_t i = 0; i < g.order(); ++i)
            for (std::size_t j = 0; j < g.order(); ++j) {
                const auto prod = g.element(i).compose(g.element(j));
                res = std::max(res, prod.distance(g.element(static_cast<std::size_t>(
                                        g.product(static_cast<int>(i), static_cast<int>(j))))));
            }
    }
    c.record("core.group_closure", res, 1e-9);
}

void check_newman(Ctx& c) {
    int singular = 0;
    for (const auto& chart : c.sc.atlas->charts()) {
        if (chart.group.trivial()) continue;
        for (int k = 0; k < 1000; ++k) {
            if (is_singular(chart, uniform_in_region(chart.domain, c.rng))) ++singular;
        }
    }
    c.record("core.newman_density", singular, 1.0, "singular hits out of 1000 per chart");
}

void check_orbit_relation(Ctx& c) {
    bool ok = true;
    for (int k = 0; k < 20; ++k) {
        const auto& chart = c.sc.atlas->charts().front();
        const Vec x = uniform_in_region(chart.domain.scaled(0.5), c.rng);
        const auto& g = chart.group.element(c.rng() % chart.group.order());
        const auto& h = chart.group.element(c.rng() % chart.group.order());
        OrbitPoint p{chart.id, x}, q{chart.id, g.apply(x)}, r{chart.id, h.apply(x)};
        ok = ok && orbit_equal(p, p, *c.sc.atlas) && orbit_equal(p, q, *c.sc.atlas) &&
             orbit_equal(q, p, *c.sc.atlas) && orbit_equal(q, r, *c.sc.atlas);
        const Vec canon = canonical_representative(p, *c.sc.atlas);
        ok = ok && orbit_equal(p, {chart.id, canon}, *c.sc.atlas);
        ok = ok && (canonical_representative({chart.id, canon}, *c.sc.atlas) - canon).norm() < 1e-12;
    }
    c.record_flag("core.orbit_equivalence", ok);
}

void check_tangent_respects_orbit(Ctx& c) {
    bool ok = true;
    for (int k = 0; k < 20; ++k) {
        auto xi = random_vector(c, 1.0);
        const auto& chart = c.sc.atlas->chart(xi.chart);
        const auto& g = chart.group.element(c.rng() % chart.group.order());
        TangentOrbVector zeta{xi.chart, g.apply(xi.base), g.apply_tangent(xi.vec)};
        ok = ok && tangent_equal(xi, zeta, *c.sc.atlas);
        ok = ok && orbit_equal({xi.chart, xi.base}, {zeta.chart, zeta.base}, *c.sc.atlas);
    }
    c.record_flag("core.tangent_equal", ok);
}

void check_metric_laws(Ctx& c) {
    double eq = 0.0;
    for (const auto& chart : c.sc.atlas->charts())
        eq = std::max(eq, check_equivariance(c.sc.metric->field(chart.id), chart));
    c.record("metric.equivariance", eq, 1e-9);
    c.record("metric.compatibility", check_compatibility(*c.sc.atlas, c.sc.metric->fields()),
             tol().metric);

    // averaging is a projection
    double proj = 0.0;
    for (const auto& chart : c.sc.atlas->charts()) {
        auto once = average_metric(chart, c.sc.metric->field(chart.id));
        auto twice = average_metric(chart, once);
        for (const Vec& x : grid_points(chart.domain, 5))
            proj = std::max(proj, (once.eval(x) - twice.eval(x)).cwiseAbs().maxCoeff());
    }
    c.record("metric.average_projection", proj, 1e-12);

    // christoffel: flat charts vanish identically; curved charts match a
    // central-difference evaluation of the closed formula
    double gamma_res = 0.0;
    for (const auto& chart : c.sc.atlas->charts()) {
        const auto& field = c.sc.metric->field(chart.id);
        for (const Vec& x : grid_points(chart.domain.scaled(0.5), 5)) {
            const auto gamma = christoffel(field, x);
            if (field.flat()) {
                for (const auto& m : gamma) gamma_res = std::max(gamma_res, m.cwiseAbs().maxCoeff());
            } else {
                const int d = chart.dim();
                const double h = 1e-5;
                std::vector<Mat> dg;
                for (int k = 0; k < d; ++k) {
                    Vec xp = x, xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    dg.push_back((field.eval(xp) - field.eval(xm)) / (2 * h));
                }
                const Mat ginv = field.eval(x).inverse();
                for (int kk = 0; kk < d; ++kk)
                    for (int i = 0; i < d; ++i)
                        for (int jj = 0; jj < d; ++jj) {
                            double s = 0;
                            for (int l = 0; l < d; ++l)
                                s += ginv(kk, l) * 0.5 *
                                     (dg[static_cast<std::size_t>(i)](jj, l) +
                                      dg[static_cast<std::size_t>(jj)](i, l) -
                                      dg[static_cast<std::size_t>(l)](i, jj));
                            gamma_res = std::max(
                                gamma_res, std::abs(gamma[static_cast<std::size_t>(kk)](i, jj) - s));
                        }
            }
        }
    }
    c.record("metric.christoffel", gamma_res, 1e-5);

    try {
        PartitionOfUnity pu(*c.sc.atlas);
        c.record("metric.partition_sum", pu.max_sum_residual(25), 1e-9);
        c.record("metric.partition_equivariance", pu.max_equivariance_residual(7), 1e-9);
    } catch (const CoverageError& e) {
        c.record_flag("metric.partition_sum", false, e.what());
    }
}

void check_geodesics(Ctx& c) {
    // energy conservation + uniqueness for tangent-equal data
    double energy = 0.0, unique = 0.0;
    for (int k = 0; k < 10; ++k) {
        const auto xi = random_vector(c, 1.0);
        const auto& chart = c.sc.atlas->chart(xi.chart);
        const auto& g = chart.group.element(c.rng() % chart.group.order());
        TangentOrbVector zeta{xi.chart, g.apply(xi.base), g.apply_tangent(xi.vec)};
        auto a = trace_orbifold_geodesic(*c.sc.atlas, *c.sc.metric, xi, 2.0, 1e-3);
        auto b = trace_orbifold_geodesic(*c.sc.atlas, *c.sc.metric, zeta, 2.0, 1e-3);
        for (const auto& seg : a.segments) energy = std::max(energy, seg.energy_drift);
        const double t_hi = std::min(a.t_end(), b.t_end());
        for (double t = 0.0; t <= t_hi + 1e-12; t += 0.25) {
            std::string ca, cb;
            const auto sa = a.state_at(t, &ca);
            const auto sb = b.state_at(t, &cb);
            const double d = orbit_distance({ca, sa.x}, {cb, sb.x}, *c.sc.atlas);
            if (!std::isinf(d)) unique = std::max(unique, d);
        }
    }
    c.record("geodesic.energy_drift", energy, 2.0 * tol().energy);
    c.record("geodesic.uniqueness", unique, 1e-8);

    // exp of the zero vector
    double zero_res = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto& chart = c.sc.atlas->charts()[c.rng() % c.sc.atlas->charts().size()];
        const Vec x = uniform_in_region(chart.domain.scaled(0.5), c.rng);
        const auto p = exp_orb(*c.sc.atlas, *c.sc.metric, {chart.id, x, Vec::Zero(chart.dim())});
        zero_res = std::max(zero_res,
                            (p.rep - canonical_representative({chart.id, x}, *c.sc.atlas)).norm());
    }
    c.record("geodesic.exp_zero_identity", zero_res, 1e-9);

    // restriction / restart reproducibility
    double restart = 0.0;
    const auto xi = random_vector(c, 1.0);
    auto geo = trace_orbifold_geodesic(*c.sc.atlas, *c.sc.metric, xi, 2.0, 1e-2);
    if (geo.t_end() > 1.0) {
        const auto mid = initial_vector(geo, 1.0);
        auto fresh = trace_orbifold_geodesic(*c.sc.atlas, *c.sc.metric, mid, geo.t_end() - 1.0, 1e-2);
        for (double t = 0.0; t <= fresh.t_end() + 1e-12; t += 0.25) {
            std::string ca, cb;
            const auto sa = geo.state_at(1.0 + t, &ca);
            const auto sb = fresh.state_at(t, &cb);
            const double d = orbit_distance({ca, sa.x}, {cb, sb.x}, *c.sc.atlas);
            if (!std::isinf(d)) restart = std::max(restart, d);
        }
    }
    c.record("geodesic.restart", restart, 1e-10);
}

void check_sections(Ctx& c) {
    auto sigma = fixtures::random_section(c.sc, c.rng, 0.15);
    auto tau = fixtures::random_section(c.sc, c.rng, 0.15);
    c.record("section.equivariance", check_equivariance(sigma), 1e-9);
    c.record("section.compatibility", check_compatibility(sigma), 1e-9);
    c.record("section.local_groups", check_preserves_local_groups(sigma), 1e-9);

    auto lc = linear_combination(sigma, tau, 0.7);
    c.record("section.lincomb_equivariance", check_equivariance(lc), 1e-9);

    auto br = bracket(sigma, tau);
    c.record("section.bracket_equivariance", check_equivariance(br), 1e-9);
    double anti = 0.0, jacobi = 0.0;
    auto br2 = bracket(tau, sigma);
    auto rho = fixtures::random_section(c.sc, c.rng, 0.15);
    auto j1 = bracket(sigma, bracket(tau, rho));
    auto j2 = bracket(tau, bracket(rho, sigma));
    auto j3 = bracket(rho, bracket(sigma, tau));
    for (const auto& chart : c.sc.atlas->charts()) {
        for (const Vec& x : grid_points(chart.domain.scaled(0.4), 5)) {
            anti = std::max(anti, (br.eval(chart.id, x) + br2.eval(chart.id, x)).norm());
            jacobi = std::max(jacobi, (j1.eval(chart.id, x) + j2.eval(chart.id, x) +
                                       j3.eval(chart.id, x))
                                          .norm());
        }
    }
    c.record("section.bracket_antisymmetry", anti, 1e-12);
    c.record("section.bracket_jacobi", jacobi, 1e-6);
}

void check_diffeos(Ctx& c) {
    const bool flat = c.sc.metric->flat();
    const double bound = flat ? 1e-8 : 1e-6;
    // small enough that sigma <> tau stays inside the budget caps as well
    auto sigma = fixtures::random_budget_section(c.sc, c.budget, c.rng, 0.4);
    auto tau = fixtures::random_budget_section(c.sc, c.budget, c.rng, 0.4);
    if (!validate_budget(sigma, c.budget).pass || !validate_budget(tau, c.budget).pass) {
        c.record_flag("diffeo.budget", false, "random sections do not pass the budget");
        return;
    }
    c.record_flag("diffeo.budget", true);

    auto comp = compose_sections(sigma, tau, c.budget, 9);
    auto Es = exp_section(sigma, c.budget);
    auto Et = exp_section(tau, c.budget);

    // the laws are checked through the exact compositional evaluators; the
    // sampled representation is compared against them at its own nodes
    const auto& atlas = *c.sc.atlas;
    auto apply_diamond = [&](const OrbitPoint& p) {
        const Vec v = diamond_at(sigma, tau, c.budget, p.chart, p.rep);
        return OrbitPoint{p.chart, canonical_representative(
                                       {p.chart, c.budget.exp(p.chart, p.rep, v)}, atlas)};
    };
    auto apply_star = [&](const OrbitPoint& p) {
        const Vec v = star_at(sigma, c.budget, p.chart, p.rep);
        return OrbitPoint{p.chart, canonical_representative(
                                       {p.chart, c.budget.exp(p.chart, p.rep, v)}, atlas)};
    };

    double law = 0.0, invres = 0.0, zero_id = 0.0;
    auto E0 = exp_section(Orbisection::zero(atlas), c.budget);
    for (int k = 0; k < 50; ++k) {
        const auto& charts = atlas.charts();
        const auto& chart = charts[c.rng() % charts.size()];
        const Vec x = uniform_in_region(chart.domain.scaled(1.0 / 5.0), c.rng);
        const OrbitPoint p{chart.id, x};
        law = std::max(law, (Es.apply(Et.apply(p)).rep - apply_diamond(p).rep).norm());
        invres = std::max(invres, (apply_star(Es.apply(p)).rep -
                                   canonical_representative(p, atlas))
                                      .norm());
        zero_id = std::max(zero_id, (E0.apply(p).rep - canonical_representative(p, atlas)).norm());
    }
    c.record("diffeo.group_law", law, bound);
    c.record("diffeo.inversion_law", invres, bound);
    c.record("diffeo.identity", zero_id, 1e-12);

    // sampled artifact agrees with the exact evaluator at its lattice nodes
    double node_res = 0.0;
    for (const auto& chart : atlas.charts()) {
        const auto* sampled = dynamic_cast<const SampledVectorField*>(comp.lift(chart.id).get());
        if (!sampled) {  // flat charts carry the closed form
            for (const Vec& x : grid_points(c.budget.omega(chart.id, 1.0), 5))
                node_res = std::max(node_res, (comp.eval(chart.id, x) -
                                               diamond_at(sigma, tau, c.budget, chart.id, x))
                                                  .norm());
            continue;
        }
        const Region omega1 = c.budget.omega(chart.id, 1.0);
        for (const Vec& x : sampled->nodes()) {
            if (!omega1.contains(x)) continue;
            node_res = std::max(node_res, (sampled->eval(x) -
                                           diamond_at(sigma, tau, c.budget, chart.id, x))
                                              .norm());
        }
    }
    c.record("diffeo.sampled_node_consistency", node_res, 1e-10);

    // exact-evaluator equivariance of the diamond output
    double equi = 0.0;
    for (const auto& chart : c.sc.atlas->charts()) {
        for (const Vec& x : grid_points(c.budget.omega(chart.id, 1.0), 5)) {
            const Vec d = diamond_at(sigma, tau, c.budget, chart.id, x);
            for (const auto& g : chart.group.elements())
                equi = std::max(equi, (g.apply_tangent(d) -
                                       diamond_at(sigma, tau, c.budget, chart.id, g.apply(x)))
                                          .norm());
        }
    }
    c.record("diffeo.diamond_equivariance", equi, bound);
}

void check_regularity(Ctx& c) {
    auto s0 = fixtures::random_budget_section(c.sc, c.budget, c.rng, 0.45);
    auto s1 = fixtures::random_budget_section(c.sc, c.budget, c.rng, 0.25);
    auto gamma = TimeDependentSection::polynomial({s0, s1});

    auto path0 = evolve_section_at(gamma, c.budget, 0.0);
    c.record_flag("regularity.evolve_zero_start", path0.zero_section(0.0));

    auto zero_evolved =
        evolve_section_at(TimeDependentSection::polynomial({Orbisection::zero(*c.sc.atlas)}),
                          c.budget, 1.0);
    c.record_flag("regularity.zero_evolves_to_zero", zero_evolved.zero_section(0.0));

    auto path = [&](double t) {
        // dense slice lattice keeps the interpolation error below the
        // finite-difference tolerance of the logarithmic derivative
        return exp_section(evolve_section_at(gamma, c.budget, t, 17), c.budget);
    };
    double rld = 0.0;
    for (double t : {0.25, 0.75}) {
        auto delta = right_log_derivative(path, c.budget, t);
        for (const auto& chart : c.sc.atlas->charts())
            for (const Vec& x : grid_points(c.budget.omega(chart.id, 1.0), 5))
                rld = std::max(rld, (delta.eval(chart.id, x) - gamma.eval(chart.id, x, t)).norm());
    }
    c.record("regularity.right_log_derivative", rld, 1e-4);

    // flows of equivariant fields commute with the group action
    double commute = 0.0;
    for (const auto& chart : c.sc.atlas->charts()) {
        for (const Vec& x : grid_points(c.budget.omega(chart.id, 2.0), 4)) {
            for (const auto& g : chart.group.elements()) {
                const Vec a = flow(gamma, c.budget, chart.id, g.apply(x), 1.0);
                const Vec b = g.apply(flow(gamma, c.budget, chart.id, x, 1.0));
                commute = std::max(commute, (a - b).norm());
            }
        }
    }
    c.record("regularity.flow_equivariance", commute, 1e-8);
}

void check_weak_equivalences(Ctx& c) {
    const auto& chart = c.sc.atlas->charts().front();
    const auto& group = chart.group;
    bool witness_ok = true;
    for (std::size_t gi = 0; gi < group.order(); ++gi) {
        const auto g = group.element(gi);
        const auto res =
            kernel_witness([g](const Vec& x) { return g.apply(x); }, *c.sc.atlas, chart.id);
        witness_ok = witness_ok && res.status == KernelResult::Status::Witness &&
                     res.witness == static_cast<int>(gi);
    }
    c.record_flag("equivariance.kernel_witness", witness_ok);

    auto res = is_weak_equivalence([](const Vec& x) { return Vec(2.0 * x); }, group,
                                   chart.domain.scaled(0.4));
    c.record_flag("equivariance.scalar_commutes", res.accepted && res.automorphism);

    // descend o exp_section agrees with the underlying orbit map of E(sigma)
    auto sigma = fixtures::random_budget_section(c.sc, c.budget, c.rng, 0.5);
    auto e = exp_section(sigma, c.budget);
    double agree = 0.0;
    for (int k = 0; k < 25; ++k) {
        const Vec x = uniform_in_region(c.budget.omega(chart.id, 1.0), c.rng);
        const auto via_descend = descend([&](const Vec& y) { return e.lift(chart.id, y); },
                                         *c.sc.atlas, {chart.id, x});
        agree = std::max(agree, (via_descend.rep - e.apply({chart.id, x}).rep).norm());
    }
    c.record("equivariance.descend_consistency", agree, 1e-8);
}

}  // namespace

std::vector<CheckResult> run_verification(const Scenario& scenario) {
    Ctx c{scenario, scenario.make_budget(), std::mt19937_64(scenario.params.seed), {}};
    const std::vector<std::pair<std::string, void (*)(Ctx&)>> blocks = {
        {"core", &check_group_tables},    {"core.newman", &check_newman},
        {"core.orbits", &check_orbit_relation}, {"core.tangent", &check_tangent_respects_orbit},
        {"metric", &check_metric_laws},   {"geodesic", &check_geodesics},
        {"section", &check_sections},     {"diffeo", &check_diffeos},
        {"regularity", &check_regularity}, {"equivariance", &check_weak_equivalences},
    };
    for (const auto& [name, fn] : blocks) {
        try {
            fn(c);
        } catch (const Error& e) {
            c.record_flag(name + ".exception", false, e.what());
        }
    }
    return std::move(c.out);
}

}  // namespace orb
