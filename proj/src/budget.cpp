#include "orb/budget.hpp"

#include <cmath>

namespace orb {

namespace {

constexpr double kNewtonResidual = 1e-12;
constexpr int kNewtonCap = 50;

/// Damped Newton solve of target = exp(x, v) for v, shooting derivative by
/// central finite differences.
Vec newton_log(const OrbifoldChart& chart, const MetricField& metric, const Vec& x, const Vec& y,
               int steps, double eps_cap) {
    const int d = chart.dim();
    Vec v = y - x;  // initial guess: the flat answer
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kNewtonCap; ++iter) {
        Vec fx;
        try {
            fx = chart_exp(chart, metric, x, v, steps) - y;
        } catch (const BudgetError&) {
            throw InversionError("local_inverse_exp: shoot leaves the chart");
        }
        residual = fx.cwiseAbs().maxCoeff();
        if (residual < kNewtonResidual) return v;
        Mat J(d, d);
        const double h = 1e-6 * std::max(1.0, v.norm());
        for (int j = 0; j < d; ++j) {
            Vec vp = v, vm = v;
            vp[j] += h;
            vm[j] -= h;
            J.col(j) = (chart_exp(chart, metric, x, vp, steps) -
                        chart_exp(chart, metric, x, vm, steps)) /
                       (2 * h);
        }
        Vec step = J.partialPivLu().solve(fx);
        // step halving until the residual decreases
        double scale = 1.0;
        for (int k = 0; k < 25; ++k) {
            const Vec trial = v - scale * step;
            double trial_res;
            try {
                trial_res = (chart_exp(chart, metric, x, trial, steps) - y).cwiseAbs().maxCoeff();
            } catch (const BudgetError&) {
                scale *= 0.5;
                continue;
            }
            if (trial_res < residual) {
                v = trial;
                break;
            }
            scale *= 0.5;
            if (k == 24) throw InversionError("local_inverse_exp: damped Newton stalled");
        }
        if (eps_cap > 0 && v.norm() > 4.0 * eps_cap)
            throw InversionError("local_inverse_exp: iterate left the injectivity ball");
    }
    throw InversionError("local_inverse_exp: no convergence in 50 iterations (residual " +
                         std::to_string(residual) + ")");
}

}  // namespace

NeighborhoodBudget::NeighborhoodBudget(const Atlas& atlas, const OrbifoldMetric& metric,
                                       std::map<std::string, ChartBudget> charts, int shoot_steps)
    : atlas_(&atlas), metric_(&metric), charts_(std::move(charts)), shoot_steps_(shoot_steps) {}

const ChartBudget& NeighborhoodBudget::chart(const std::string& id) const {
    auto it = charts_.find(id);
    if (it == charts_.end()) throw DomainError("budget: unknown chart '" + id + "'");
    return it->second;
}

Region NeighborhoodBudget::omega(const std::string& id, double r) const {
    return atlas_->chart(id).domain.scaled(r / 5.0);
}

Vec NeighborhoodBudget::exp(const std::string& chart, const Vec& x, const Vec& v) const {
    return chart_exp(atlas_->chart(chart), metric_->field(chart), x, v, shoot_steps_);
}

Vec NeighborhoodBudget::log(const std::string& chart, const Vec& x, const Vec& y) const {
    const auto& field = metric_->field(chart);
    if (field.flat()) return y - x;
    return newton_log(atlas_->chart(chart), field, x, y, shoot_steps_, this->chart(chart).eps);
}

namespace {

/// Deterministic direction set: coordinate axes and diagonals.
std::vector<Vec> probe_directions(int d) {
    std::vector<Vec> dirs;
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    Vec diag = Vec::Ones(d) / std::sqrt(static_cast<double>(d));
    dirs.push_back(diag);
    dirs.push_back(-diag);
    if (d >= 2) {
        Vec mixed = diag;
        mixed[0] = -mixed[0];
        dirs.push_back(mixed);
        dirs.push_back(-mixed);
    }
    return dirs;
}

bool injectivity_ok(const OrbifoldChart& chart, const MetricField& metric, const Vec& x, double eps,
                    int steps) {
    const auto dirs = probe_directions(chart.dim());
    std::vector<Vec> vs, images;
    for (const auto& u : dirs) {
        for (double r : {eps, 0.5 * eps}) {
            const Vec v = r * u;
            try {
                images.push_back(chart_exp(chart, metric, x, v, steps));
            } catch (const BudgetError&) {
                return false;
            }
            vs.push_back(v);
        }
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t j = i + 1; j < vs.size(); ++j) {
            const double dv = (vs[i] - vs[j]).norm();
            if ((images[i] - images[j]).norm() < 1e-3 * dv) return false;
        }
    }
    // full-rank sample of d_2 exp at v = 0 and at one boundary vector
    const int d = chart.dim();
    for (const Vec& v0 : {Vec(Vec::Zero(d)), Vec(0.7 * eps * dirs.front())}) {
        Mat J(d, d);
        const double h = 1e-6 * std::max(1.0, eps);
        for (int j = 0; j < d; ++j) {
            Vec vp = v0, vm = v0;
            vp[j] += h;
            vm[j] -= h;
            try {
                J.col(j) = (chart_exp(chart, metric, x, vp, steps) -
                            chart_exp(chart, metric, x, vm, steps)) /
                           (2 * h);
            } catch (const BudgetError&) {
                return false;
            }
        }
        if (std::abs(J.determinant()) < 0.3) return false;
    }
    return true;
}

}  // namespace

NeighborhoodBudget estimate_budget(const Atlas& atlas, const OrbifoldMetric& metric,
                                   int shoot_steps) {
    std::map<std::string, double> eps_inj;
    for (const auto& chart : atlas.charts()) {
        const auto& field = metric.field(chart.id);
        const double clearance = chart.domain.scale() / 5.0;  // Omega_4 to the boundary
        if (field.flat()) {
            eps_inj[chart.id] = clearance;
            continue;
        }
        const Region omega4 = chart.domain.scaled(4.0 / 5.0);
        double eps = clearance;
        bool found = false;
        for (int level = 0; level < 10; ++level) {
            bool ok = true;
            for (const Vec& x : grid_points(omega4, 3)) {
                if (!injectivity_ok(chart, field, x, eps, shoot_steps)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                found = true;
                break;
            }
            eps *= 0.5;
        }
        if (!found)
            throw NumericalError("estimate_budget: no admissible injectivity radius on chart '" +
                                 chart.id + "' (degenerate metric)");
        eps_inj[chart.id] = eps;
    }

    double nu = std::numeric_limits<double>::infinity();
    for (const auto& [id, e] : eps_inj) nu = std::min(nu, e);
    const double tau = 0.45 * nu;

    std::map<std::string, ChartBudget> charts;
    for (const auto& chart : atlas.charts()) {
        const auto& field = metric.field(chart.id);
        ChartBudget b;
        b.nu = nu;
        b.tau = tau;
        b.R = nu;
        b.eps = std::min(eps_inj[chart.id], 0.9 * tau);
        if (field.flat()) {
            b.delta = b.eps;
            b.sigma_t = 0.5 * b.delta;
        } else {
            // delta: sampled reach of the local inverse
            const Region omega3 = chart.domain.scaled(3.0 / 5.0);
            const auto grid = grid_points(omega3, 3);
            double delta = b.eps;
            for (int level = 0; level < 8; ++level) {
                bool ok = true;
                for (const Vec& x : grid) {
                    for (const auto& u : probe_directions(chart.dim())) {
                        const Vec y = x + delta * u;
                        try {
                            const Vec v = newton_log(chart, field, x, y, shoot_steps, b.eps);
                            if (v.norm() >= b.eps) {
                                ok = false;
                                break;
                            }
                        } catch (const Error&) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) break;
                }
                if (ok) break;
                delta *= 0.5;
            }
            b.delta = delta;
            // sigma_t: exp(x, B_sigma) inside B_{delta/2}(x)
            double sigma = b.delta / 2.0;
            for (int level = 0; level < 8; ++level) {
                bool ok = true;
                for (const Vec& x : grid) {
                    for (const auto& u : probe_directions(chart.dim())) {
                        try {
                            const Vec y = chart_exp(chart, field, x, sigma * u, shoot_steps);
                            if ((y - x).norm() > b.delta / 2.0) {
                                ok = false;
                                break;
                            }
                        } catch (const BudgetError&) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) break;
                }
                if (ok) break;
                sigma *= 0.5;
            }
            b.sigma_t = sigma;
        }
        charts[chart.id] = b;
    }
    return NeighborhoodBudget(atlas, metric, std::move(charts), shoot_steps);
}

Vec local_inverse_exp(const NeighborhoodBudget& budget, const std::string& chart, const Vec& x,
                      const Vec& y) {
    return budget.log(chart, x, y);
}

}  // namespace orb
