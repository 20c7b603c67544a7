#include "orb/diffeo.hpp"

#include <sstream>

namespace orb {

std::string BudgetReport::summary() const {
    std::ostringstream os;
    for (const auto& c : charts) {
        os << c.chart << ": c1=" << c.c1 << " (tau=" << c.tau << ") sup_g=" << c.sup_metric
           << " (cap=" << c.sup_cap << ") |det|>=" << c.min_abs_det
           << (c.injective ? " injective" : " NOT injective") << (c.pass ? " PASS" : " FAIL");
        if (!c.failing.empty()) os << " [" << c.failing << "]";
        os << "\n";
    }
    return os.str();
}

LocalDiffeo::LocalDiffeo(const NeighborhoodBudget& budget, Orbisection sigma)
    : budget_(&budget), sigma_(std::move(sigma)) {}

Vec LocalDiffeo::lift(const std::string& chart, const Vec& x) const {
    return budget_->exp(chart, x, sigma_.eval(chart, x));
}

Vec LocalDiffeo::lift_inverse(const std::string& chart, const Vec& y) const {
    const int d = static_cast<int>(y.size());
    Vec x = y;
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 50; ++iter) {
        Vec fx;
        try {
            fx = lift(chart, x) - y;
        } catch (const Error&) {
            throw InversionError("LocalDiffeo: inverse iterate left the valid region");
        }
        residual = fx.cwiseAbs().maxCoeff();
        if (residual < 1e-12) return x;
        Mat J(d, d);
        const double h = 1e-6;
        for (int j = 0; j < d; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            J.col(j) = (lift(chart, xp) - lift(chart, xm)) / (2 * h);
        }
        const Vec step = J.partialPivLu().solve(fx);
        double scale = 1.0;
        bool moved = false;
        for (int k = 0; k < 25; ++k) {
            const Vec trial = x - scale * step;
            try {
                if ((lift(chart, trial) - y).cwiseAbs().maxCoeff() < residual) {
                    x = trial;
                    moved = true;
                    break;
                }
            } catch (const Error&) {
            }
            scale *= 0.5;
        }
        if (!moved) throw InversionError("LocalDiffeo: damped Newton stalled inverting the lift");
    }
    throw InversionError("LocalDiffeo: lift inversion did not converge in 50 iterations");
}

OrbitPoint LocalDiffeo::apply(const OrbitPoint& p) const {
    const Vec image = lift(p.chart, p.rep);
    return OrbitPoint{p.chart, canonical_representative({p.chart, image}, budget_->atlas())};
}

BudgetReport validate_budget(const Orbisection& sigma, const NeighborhoodBudget& budget,
                             int per_axis) {
    BudgetReport report;
    const auto& atlas = budget.atlas();
    for (const auto& chart : atlas.charts()) {
        const auto& cb = budget.chart(chart.id);
        BudgetReport::PerChart pc;
        pc.chart = chart.id;
        pc.tau = cb.tau;
        pc.sup_cap = std::min(cb.eps, cb.nu);
        // lifts of restricted validity (sampled on a sub-lattice) are
        // measured where they are defined
        pc.c1 = 0.0;
        const auto& field = *sigma.lift(chart.id);
        for (const Vec& x : grid_points(budget.omega(chart.id, 1.0), per_axis, -1e-12)) {
            try {
                pc.c1 = std::max(pc.c1, field.eval(x).cwiseAbs().maxCoeff());
                pc.c1 = std::max(pc.c1, field.jacobian(x).cwiseAbs().maxCoeff());
            } catch (const Error&) {
            }
        }

        const auto& metric = budget.metric().field(chart.id);
        pc.sup_metric = 0.0;
        pc.min_abs_det = std::numeric_limits<double>::infinity();
        pc.injective = true;
        std::vector<Vec> points, images;
        bool image_ok = true;
        for (const Vec& x : grid_points(budget.omega(chart.id, 2.0), per_axis)) {
            Vec v;
            try {
                v = sigma.eval(chart.id, x);
            } catch (const Error&) {
                continue;
            }
            pc.sup_metric = std::max(pc.sup_metric, metric.norm(x, v));
            try {
                images.push_back(budget.exp(chart.id, x, v));
                points.push_back(x);
            } catch (const BudgetError&) {
                image_ok = false;
            }
        }
        // sampled injectivity of exp o sigma
        for (std::size_t i = 0; i < points.size() && pc.injective; ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                if ((images[i] - images[j]).norm() < 1e-6 && (points[i] - points[j]).norm() > 1e-6) {
                    pc.injective = false;
                    break;
                }
        // sampled Jacobian determinant of the lift
        const double h = 1e-6;
        for (const Vec& x : grid_points(budget.omega(chart.id, 2.0), 5)) {
            Mat J(chart.dim(), chart.dim());
            bool ok = true;
            for (int j = 0; j < chart.dim(); ++j) {
                Vec xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                try {
                    J.col(j) = (budget.exp(chart.id, xp, sigma.eval(chart.id, xp)) -
                                budget.exp(chart.id, xm, sigma.eval(chart.id, xm))) /
                               (2 * h);
                } catch (const Error&) {
                    ok = false;
                    break;
                }
            }
            if (ok) pc.min_abs_det = std::min(pc.min_abs_det, std::abs(J.determinant()));
        }

        pc.pass = true;
        if (pc.c1 >= pc.tau) {
            pc.pass = false;
            pc.failing = "c1_norm(Omega_1) >= tau";
        } else if (pc.sup_metric >= pc.sup_cap) {
            pc.pass = false;
            pc.failing = "sup |sigma|_g(Omega_2) >= min{eps, nu}";
        } else if (!image_ok) {
            pc.pass = false;
            pc.failing = "exp o sigma leaves the chart on Omega_2";
        } else if (!pc.injective) {
            pc.pass = false;
            pc.failing = "sampled injectivity of exp o sigma";
        } else if (pc.min_abs_det <= 0.5) {
            pc.pass = false;
            pc.failing = "sampled |det D(exp o sigma)| <= 0.5";
        }
        report.pass = report.pass && pc.pass;
        report.charts.push_back(std::move(pc));
    }
    return report;
}

LocalDiffeo exp_section(const Orbisection& sigma, const NeighborhoodBudget& budget) {
    const auto report = validate_budget(sigma, budget);
    if (!report.pass) {
        for (const auto& c : report.charts)
            if (!c.pass)
                throw BudgetError("exp_section: budget violated on chart '" + c.chart + "': " +
                                  c.failing);
    }
    LocalDiffeo diffeo(budget, sigma);
    // equivariance of the lifts on a sample grid; lattice-sampled sections
    // widen the gate by their interpolation error bound
    const auto& atlas = budget.atlas();
    for (const auto& chart : atlas.charts()) {
        double gate = 1e-6;
        if (const auto* sampled =
                dynamic_cast<const SampledVectorField*>(sigma.lift(chart.id).get()))
            gate += 0.5 * sampled->max_second_difference();
        double res = 0.0;
        for (const Vec& x : grid_points(budget.omega(chart.id, 2.0), 7)) {
            Vec ex;
            try {
                ex = diffeo.lift(chart.id, x);
            } catch (const Error&) {
                continue;
            }
            for (const auto& g : chart.group.elements()) {
                try {
                    res = std::max(res, (diffeo.lift(chart.id, g.apply(x)) - g.apply(ex)).norm());
                } catch (const Error&) {
                }
            }
        }
        if (res >= gate)
            throw ValidationError("exp_section: lift on chart '" + chart.id +
                                  "' is not equivariant (residual " + std::to_string(res) + ")");
    }
    return diffeo;
}

Vec diamond_at(const Orbisection& sigma, const Orbisection& tau, const NeighborhoodBudget& budget,
               const std::string& chart, const Vec& x) {
    const Region omega3 = budget.omega(chart, 3.0);
    const Vec y1 = budget.exp(chart, x, tau.eval(chart, x));
    if (!omega3.contains(y1))
        throw BudgetError("compose: intermediate point leaves Omega_3 on chart '" + chart + "'");
    const Vec y2 = budget.exp(chart, y1, sigma.eval(chart, y1));
    return budget.log(chart, x, y2);
}

Vec star_at(const Orbisection& sigma, const NeighborhoodBudget& budget, const std::string& chart,
            const Vec& y) {
    LocalDiffeo diffeo(budget, sigma);
    const Vec pre = diffeo.lift_inverse(chart, y);
    return budget.log(chart, y, pre);
}

namespace {

using LiftBuilder = std::function<Vec(const std::string&, const Vec&)>;

/// Lattice-sampled section over Omega_r of every chart (the representation
/// the curved-metric diamond and star operators emit).
Orbisection build_section(const Atlas& atlas, const NeighborhoodBudget& budget, double omega_r,
                          int per_axis, const LiftBuilder& value) {
    std::map<std::string, FieldPtr> lifts;
    for (const auto& chart : atlas.charts()) {
        const std::string id = chart.id;
        lifts[id] = SampledVectorField::sample(budget.omega(id, omega_r), per_axis,
                                               [&](const Vec& x) { return value(id, x); });
    }
    return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
}

}  // namespace

Orbisection compose_sections(const Orbisection& sigma, const Orbisection& tau,
                             const NeighborhoodBudget& budget, int per_axis) {
    if (!validate_budget(sigma, budget).pass || !validate_budget(tau, budget).pass)
        throw BudgetError("compose_sections: inputs do not pass the budget");
    const auto& atlas = budget.atlas();
    const bool flat = budget.metric().flat();
    if (flat) {
        // closed form (sigma <> tau)(x) = tau(x) + sigma(x + tau(x))
        std::map<std::string, FieldPtr> lifts;
        for (const auto& chart : atlas.charts()) {
            const auto st = sigma.lift(chart.id);
            const auto tt = tau.lift(chart.id);
            lifts[chart.id] = std::make_shared<CallbackVectorField>(
                chart.dim(), [st, tt](const Vec& x) {
                    const Vec t = tt->eval(x);
                    return Vec(t + st->eval(x + t));
                });
        }
        return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
    }
    return build_section(atlas, budget, 2.0, per_axis,
                         [&](const std::string& chart, const Vec& x) {
                             return diamond_at(sigma, tau, budget, chart, x);
                         });
}

Orbisection invert_section(const Orbisection& sigma, const NeighborhoodBudget& budget,
                           int per_axis) {
    if (!validate_budget(sigma, budget).pass)
        throw BudgetError("invert_section: input does not pass the budget");
    const auto& atlas = budget.atlas();
    if (budget.metric().flat()) {
        // flat charts keep the exact Newton-backed form
        std::map<std::string, FieldPtr> lifts;
        const NeighborhoodBudget* bp = &budget;
        for (const auto& chart : atlas.charts()) {
            const std::string id = chart.id;
            const Orbisection sig = sigma;
            lifts[id] = std::make_shared<CallbackVectorField>(chart.dim(), [bp, sig, id](const Vec& y) {
                return star_at(sig, *bp, id, y);
            });
        }
        return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
    }
    return build_section(atlas, budget, 5.0 / 4.0, per_axis,
                         [&budget, &sigma](const std::string& chart, const Vec& y) {
                             return star_at(sigma, budget, chart, y);
                         });
}

}  // namespace orb
