#include "orb/scenario.hpp"

namespace orb::fixtures {

namespace {

Mat rot2(double angle) {
    Mat R(2, 2);
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return R;
}

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

OrbifoldChart ball_chart(const std::string& id, int dim, const Vec& center, double radius,
                         std::vector<GroupElement> generators) {
    OrbifoldChart c;
    c.id = id;
    c.domain = Region::ball(center, radius);
    c.group = FiniteGroup::generate(dim, generators);
    return c;
}

std::shared_ptr<const OrbifoldMetric> flat_metric(const Atlas& atlas) {
    std::map<std::string, MetricField> f;
    for (const auto& c : atlas.charts())
        f[c.id] = {c.id, std::make_shared<ConstantMetric>(Mat::Identity(c.dim(), c.dim()))};
    return std::make_shared<OrbifoldMetric>(atlas, std::move(f));
}

/// Invariant conformal factor phi = a |x - center|^2 (radial, so it is
/// invariant under every orthogonal chart group).
std::shared_ptr<const OrbifoldMetric> conformal_metric(const Atlas& atlas, double a) {
    std::map<std::string, MetricField> f;
    for (const auto& c : atlas.charts()) {
        Polynomial phi(c.dim());
        for (int i = 0; i < c.dim(); ++i) {
            const Polynomial xi =
                Polynomial::coordinate(c.dim(), i) + Polynomial::constant(c.dim(), -c.domain.center[i]);
            phi += xi * xi * a;
        }
        f[c.id] = {c.id, std::make_shared<ConformalMetric>(phi)};
    }
    return std::make_shared<OrbifoldMetric>(atlas, std::move(f));
}

Scenario basic(const std::string& name, std::shared_ptr<const Atlas> atlas, bool conformal) {
    Scenario sc;
    sc.name = name;
    sc.atlas = std::move(atlas);
    sc.metric = conformal ? conformal_metric(*sc.atlas, 0.01) : flat_metric(*sc.atlas);
    return sc;
}

std::shared_ptr<const Atlas> mirror_atlas() {
    Mat M(2, 2);
    M << -1, 0, 0, 1;
    return std::make_shared<Atlas>(
        std::vector<OrbifoldChart>{ball_chart("m", 2, Vec::Zero(2), 8.0, {GroupElement(M)})},
        std::vector<ChangeOfCharts>{});
}

std::shared_ptr<const Atlas> cone3_atlas() {
    return std::make_shared<Atlas>(
        std::vector<OrbifoldChart>{
            ball_chart("c", 2, Vec::Zero(2), 8.0, {GroupElement(rot2(2 * M_PI / 3))})},
        std::vector<ChangeOfCharts>{});
}

std::shared_ptr<const Atlas> line_atlas() {
    return std::make_shared<Atlas>(
        std::vector<OrbifoldChart>{
            ball_chart("l", 1, Vec::Zero(1), 8.0, {GroupElement(-Mat::Identity(1, 1))})},
        std::vector<ChangeOfCharts>{});
}

std::shared_ptr<const Atlas> plane_atlas() {
    return std::make_shared<Atlas>(
        std::vector<OrbifoldChart>{ball_chart("u", 2, Vec::Zero(2), 8.0, {})},
        std::vector<ChangeOfCharts>{});
}

std::shared_ptr<const Atlas> teardrop_atlas() {
    auto tip = ball_chart("tip", 2, Vec::Zero(2), 2.0, {GroupElement(rot2(2 * M_PI / 3))});
    auto body = ball_chart("body", 2, v2(2.2, 0), 2.0, {});
    // largest identity-glued overlap ball that stays inside both charts and
    // disjoint from its own rotations (stable subset of the tip chart)
    ChangeOfCharts ch{"tip", "body", Region::ball(v2(1.4, 0), 0.55), GroupElement::identity(2)};
    ChangeOfCharts inv{"body", "tip", Region::ball(v2(1.4, 0), 0.55), GroupElement::identity(2)};
    return std::make_shared<Atlas>(std::vector<OrbifoldChart>{tip, body},
                                   std::vector<ChangeOfCharts>{ch, inv});
}

}  // namespace

std::vector<std::string> names() {
    return {"mirror", "cone3", "line", "teardrop", "plane", "mirror_conformal", "cone3_conformal"};
}

bool exists(const std::string& name) {
    for (const auto& n : names())
        if (n == name) return true;
    return false;
}

Scenario get(const std::string& name) {
    if (name == "mirror") return basic(name, mirror_atlas(), false);
    if (name == "mirror_conformal") return basic(name, mirror_atlas(), true);
    if (name == "cone3") return basic(name, cone3_atlas(), false);
    if (name == "cone3_conformal") return basic(name, cone3_atlas(), true);
    if (name == "line") return basic(name, line_atlas(), false);
    if (name == "plane") return basic(name, plane_atlas(), false);
    if (name == "teardrop") return basic(name, teardrop_atlas(), false);
    throw ConfigError("unknown fixture '" + name + "'");
}

Orbisection random_section(const Scenario& scenario, std::mt19937_64& rng, double amplitude,
                           int degree) {
    const auto& atlas = *scenario.atlas;
    const int d = atlas.dim();
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    // all monomial exponents with total degree <= degree
    std::vector<std::vector<int>> expos;
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    const auto enumerate = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == d) {
            expos.push_back(e);
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            e[static_cast<std::size_t>(pos)] = k;
            self(self, pos + 1, remaining - k);
        }
        e[static_cast<std::size_t>(pos)] = 0;
    };
    enumerate(enumerate, 0, degree);

    for (int attempt = 0; attempt < 32; ++attempt) {
        std::vector<Polynomial> comps;
        for (int i = 0; i < d; ++i) {
            std::vector<Polynomial::Term> terms;
            for (const auto& expo : expos) terms.push_back({uni(rng), expo});
            comps.emplace_back(d, std::move(terms));
        }
        auto raw = std::make_shared<PolyVectorField>(std::move(comps));

        // every fixture here embeds its charts in one plane glued by identity
        // changes; averaging over the largest chart group yields a field
        // that restricts to compatible equivariant lifts on all charts
        const OrbifoldChart* principal = &atlas.charts().front();
        for (const auto& c : atlas.charts())
            if (c.group.order() > principal->group.order()) principal = &c;
        auto averaged = raw->group_average(principal->group);

        // normalize on Omega_2 at the density used by budget validation
        double norm = 0.0;
        for (const auto& c : atlas.charts())
            norm = std::max(norm, c1_norm(*averaged, c.domain.scaled(2.0 / 5.0), 17));
        if (norm < 1e-9) continue;  // averaging annihilated the sample, draw again

        std::vector<Polynomial> scaled;
        for (const auto& comp : averaged->components()) scaled.push_back(comp * (amplitude / norm));
        auto field = std::make_shared<PolyVectorField>(std::move(scaled));
        std::map<std::string, FieldPtr> lifts;
        for (const auto& c : atlas.charts()) lifts[c.id] = field;
        return Orbisection(atlas, std::move(lifts), SectionCheck::Strict);
    }
    throw NumericalError("random_section: could not draw a nonzero equivariant field");
}

Orbisection random_budget_section(const Scenario& scenario, const NeighborhoodBudget& budget,
                                  std::mt19937_64& rng, double fraction, int degree) {
    double cap = std::numeric_limits<double>::infinity();
    for (const auto& c : scenario.atlas->charts()) {
        const auto& b = budget.chart(c.id);
        cap = std::min(cap, std::min(b.eps, b.tau));
    }
    return random_section(scenario, rng, fraction * cap, degree);
}

void attach_default_fields(Scenario& scenario) {
    const auto budget = scenario.make_budget();
    std::mt19937_64 rng_sigma(1), rng_tau(2), rng_t(3);
    if (!scenario.fields.count("sigma"))
        scenario.fields.emplace("sigma", random_budget_section(scenario, budget, rng_sigma, 0.35));
    if (!scenario.fields.count("tau"))
        scenario.fields.emplace("tau", random_budget_section(scenario, budget, rng_tau, 0.3));
    if (!scenario.time_field) {
        auto s0 = random_budget_section(scenario, budget, rng_t, 0.3);
        auto s1 = random_budget_section(scenario, budget, rng_t, 0.15);
        scenario.time_field = TimeDependentSection::polynomial({s0, s1});
    }
    if (!scenario.maps.count("h"))
        scenario.maps.emplace("h", NamedMap{"linear", [](const Vec& x) { return Vec(2.0 * x); }});
    const auto& group = scenario.atlas->charts().front().group;
    if (!scenario.maps.count("g") && group.order() > 1) {
        const GroupElement g = group.element(1);
        scenario.maps.emplace("g", NamedMap{"group", [g](const Vec& x) { return g.apply(x); }});
    }
}

}  // namespace orb::fixtures
