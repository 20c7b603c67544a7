#pragma once

#include "orb/budget.hpp"
#include "orb/section.hpp"

namespace orb {

struct BudgetReport {
    struct PerChart {
        std::string chart;
        double c1;            // c1_norm of the lift on Omega_1
        double tau;           // cap it is measured against
        double sup_metric;    // sup of |sigma(x)|_g on Omega_2
        double sup_cap;       // min{eps, nu}
        double min_abs_det;   // sampled |det D(exp o sigma)| on Omega_2
        bool injective;       // sampled injectivity of exp o sigma on Omega_2
        bool pass;
        std::string failing;  // name of the violated norm, empty when pass
    };
    std::vector<PerChart> charts;
    bool pass = true;
    std::string summary() const;
};

/// Near-identity local diffeomorphism E(sigma) = exp_Orb o sigma, realized
/// through its per-chart lifts e^sigma = exp o sigma.
class LocalDiffeo {
  public:
    LocalDiffeo() = default;
    LocalDiffeo(const NeighborhoodBudget& budget, Orbisection sigma);

    const Orbisection& section() const { return sigma_; }
    const NeighborhoodBudget& budget() const { return *budget_; }

    /// Chart lift e^sigma(x) = exp(x, sigma(x)).
    Vec lift(const std::string& chart, const Vec& x) const;
    /// Inverse of the lift by damped Newton (initial guess y).
    Vec lift_inverse(const std::string& chart, const Vec& y) const;
    /// Underlying orbit map on canonical representatives.
    OrbitPoint apply(const OrbitPoint& p) const;

  private:
    const NeighborhoodBudget* budget_ = nullptr;
    Orbisection sigma_;
};

/// Per-chart report of the budget conditions for sigma; never throws.
BudgetReport validate_budget(const Orbisection& sigma, const NeighborhoodBudget& budget,
                             int per_axis = 17);

/// E(sigma): requires validate_budget to pass (BudgetError naming the chart
/// and norm otherwise) and verifies that each lift is an etale embedding and
/// equivariant on a sample grid.
LocalDiffeo exp_section(const Orbisection& sigma, const NeighborhoodBudget& budget);

/// Pointwise (sigma <> tau)(x) = b(x, e^sigma(e^tau(x))): the exact value of
/// the composition section at x.
Vec diamond_at(const Orbisection& sigma, const Orbisection& tau, const NeighborhoodBudget& budget,
               const std::string& chart, const Vec& x);
/// Pointwise sigma*(y) = b(y, (e^sigma)^{-1}(y)).
Vec star_at(const Orbisection& sigma, const NeighborhoodBudget& budget, const std::string& chart,
            const Vec& y);

/// sigma <> tau with exp o (sigma <> tau) = e^sigma o e^tau on Omega_2. Flat
/// charts carry the closed form tau(x) + sigma(x + tau(x)); curved charts a
/// sampled lattice over Omega_2 with multilinear interpolation.
Orbisection compose_sections(const Orbisection& sigma, const Orbisection& tau,
                             const NeighborhoodBudget& budget, int per_axis = 9);

/// sigma* with exp o sigma* = (e^sigma)^{-1} on Omega_{5/4}.
Orbisection invert_section(const Orbisection& sigma, const NeighborhoodBudget& budget,
                           int per_axis = 9);

}  // namespace orb
