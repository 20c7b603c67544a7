#include "orb/evolution.hpp"

#include <cmath>

namespace orb {

TimeDependentSection TimeDependentSection::polynomial(std::vector<Orbisection> coefficients) {
    if (coefficients.empty())
        throw ValidationError("time-dependent section: no polynomial coefficients");
    TimeDependentSection s;
    s.kind_ = Kind::PolynomialInT;
    s.parts_ = std::move(coefficients);
    return s;
}

TimeDependentSection TimeDependentSection::slices(std::vector<Orbisection> slices) {
    if (slices.size() < 2)
        throw ValidationError("time-dependent section: at least two slices required");
    TimeDependentSection s;
    s.kind_ = Kind::Slices;
    s.parts_ = std::move(slices);
    return s;
}

const Atlas& TimeDependentSection::atlas() const { return parts_.front().atlas(); }

Vec TimeDependentSection::eval(const std::string& chart, const Vec& x, double t) const {
    if (kind_ == Kind::PolynomialInT) {
        Vec v = Vec::Zero(x.size());
        double tk = 1.0;
        for (const auto& part : parts_) {
            v += tk * part.eval(chart, x);
            tk *= t;
        }
        return v;
    }
    const double pos = std::clamp(t, 0.0, 1.0) * (parts_.size() - 1);
    const auto k = static_cast<std::size_t>(std::min<double>(std::floor(pos), parts_.size() - 2.0));
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * parts_[k].eval(chart, x) + w * parts_[k + 1].eval(chart, x);
}

Orbisection TimeDependentSection::at(double t) const {
    if (kind_ == Kind::PolynomialInT) {
        Orbisection acc = scale_section(parts_.front(), 1.0);
        double tk = 1.0;
        for (std::size_t k = 1; k < parts_.size(); ++k) {
            tk *= t;
            acc = linear_combination(acc, parts_[k], tk);
        }
        return acc;
    }
    const double pos = std::clamp(t, 0.0, 1.0) * (parts_.size() - 1);
    const auto k = static_cast<std::size_t>(std::min<double>(std::floor(pos), parts_.size() - 2.0));
    const double w = pos - static_cast<double>(k);
    return linear_combination(scale_section(parts_[k], 1.0 - w), parts_[k + 1], w);
}

double TimeDependentSection::sup_c1_norm(const std::string& chart, const Region& K) const {
    double sup = 0.0;
    for (int j = 0; j <= 16; ++j) sup = std::max(sup, c1_norm(at(j / 16.0), chart, K));
    return sup;
}

Vec flow(const TimeDependentSection& gamma, const NeighborhoodBudget& budget,
         const std::string& chart, const Vec& x0, double t, int steps) {
    if (t < 0.0 || t > 1.0) throw DomainError("flow: t must lie in [0,1]");
    const Region omega3 = budget.omega(chart, 3.0);
    if (!omega3.contains(x0)) throw BudgetError("flow: initial point outside Omega_3");
    Vec x = x0;
    const int n = std::max(1, static_cast<int>(std::ceil(t * steps)));
    const double h = t / n;
    double s = 0.0;
    auto f = [&](double time, const Vec& y) { return gamma.eval(chart, y, time); };
    for (int k = 0; k < n; ++k) {
        const Vec k1 = f(s, x);
        const Vec k2 = f(s + 0.5 * h, x + 0.5 * h * k1);
        const Vec k3 = f(s + 0.5 * h, x + 0.5 * h * k2);
        const Vec k4 = f(s + h, x + h * k3);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        s += h;
        if (!omega3.contains(x))
            throw BudgetError("flow: trajectory escaped Omega_3 on chart '" + chart + "' at s=" +
                              std::to_string(s));
    }
    return x;
}

namespace {

void require_budget_caps(const TimeDependentSection& gamma, const NeighborhoodBudget& budget) {
    for (const auto& chart : budget.atlas().charts()) {
        const double sup = gamma.sup_c1_norm(chart.id, budget.omega(chart.id, 1.0));
        const double cap = budget.chart(chart.id).tau;
        if (sup >= cap)
            throw BudgetError("evolution: sup_t c1_norm(gamma(t)) = " + std::to_string(sup) +
                              " exceeds tau = " + std::to_string(cap) + " on chart '" + chart.id +
                              "'");
    }
}

}  // namespace

Orbisection evolve_section_at(const TimeDependentSection& gamma, const NeighborhoodBudget& budget,
                              double t, int per_axis, int flow_steps) {
    const auto& atlas = budget.atlas();
    const bool flat = budget.metric().flat();
    std::map<std::string, FieldPtr> lifts;
    for (const auto& chart : atlas.charts()) {
        const std::string id = chart.id;
        auto value = [&gamma, &budget, id, t, flow_steps](const Vec& x) {
            const Vec end = flow(gamma, budget, id, x, t, flow_steps);
            return budget.log(id, x, end);
        };
        if (flat) {
            const TimeDependentSection g = gamma;
            const NeighborhoodBudget* bp = &budget;
            lifts[id] = std::make_shared<CallbackVectorField>(
                chart.dim(), [g, bp, id, t, flow_steps](const Vec& x) {
                    return Vec(flow(g, *bp, id, x, t, flow_steps) - x);
                });
        } else {
            lifts[id] = SampledVectorField::sample(budget.omega(id, 2.0), per_axis, value);
        }
    }
    return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
}

std::vector<std::pair<double, Orbisection>> evolve(const TimeDependentSection& gamma,
                                                   const NeighborhoodBudget& budget, int K,
                                                   int per_axis, int flow_steps) {
    require_budget_caps(gamma, budget);
    std::vector<std::pair<double, Orbisection>> path;
    path.reserve(static_cast<std::size_t>(K) + 1);
    for (int j = 0; j <= K; ++j) {
        const double t = static_cast<double>(j) / K;
        path.emplace_back(t, evolve_section_at(gamma, budget, t, per_axis, flow_steps));
    }
    return path;
}

LocalDiffeo evol(const TimeDependentSection& gamma, const NeighborhoodBudget& budget, int per_axis,
                 int flow_steps) {
    require_budget_caps(gamma, budget);
    return exp_section(evolve_section_at(gamma, budget, 1.0, per_axis, flow_steps), budget);
}

Orbisection right_log_derivative(const std::function<LocalDiffeo(double)>& path,
                                 const NeighborhoodBudget& budget, double t, double h_fd) {
    const LocalDiffeo p_mid = path(t);
    const LocalDiffeo p_plus = path(t + h_fd);
    const LocalDiffeo p_minus = path(t - h_fd);
    const auto& atlas = budget.atlas();
    std::map<std::string, FieldPtr> lifts;
    for (const auto& chart : atlas.charts()) {
        const std::string id = chart.id;
        lifts[id] = std::make_shared<CallbackVectorField>(
            chart.dim(), [p_mid, p_plus, p_minus, &budget, id, h_fd](const Vec& x) {
                const Vec z = p_mid.lift_inverse(id, x);
                const Vec fwd = budget.log(id, x, p_plus.lift(id, z));
                const Vec bwd = budget.log(id, x, p_minus.lift(id, z));
                return Vec((fwd - bwd) / (2.0 * h_fd));
            });
    }
    return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
}

}  // namespace orb
