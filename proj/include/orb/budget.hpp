#pragma once

#include "orb/geodesic.hpp"

namespace orb {

/// Per-chart neighborhood constants for the local diffeomorphism chart:
/// eps   sampled injectivity radius of exp(x, .)
/// delta local inverse reach: B_delta(x) inside exp(x, B_eps(0))
/// sigma_t  |exp(x, v) - x| <= delta/2 whenever |v| <= sigma_t
/// nu    shared injectivity constant (min eps over the atlas)
/// tau   C1 norm cap for sections entering the chart
/// R     budget radius; the ordering eps < min{tau, nu} and tau < R is
///       enforced by construction.
struct ChartBudget {
    double eps = 0.0;
    double delta = 0.0;
    double sigma_t = 0.0;
    double nu = 0.0;
    double tau = 0.0;
    double R = 0.0;
};

/// Budget for a whole atlas. Holds non-owning references to the atlas and
/// metric used to estimate it; keep those alive while the budget is in use.
class NeighborhoodBudget {
  public:
    NeighborhoodBudget() = default;
    NeighborhoodBudget(const Atlas& atlas, const OrbifoldMetric& metric,
                       std::map<std::string, ChartBudget> charts, int shoot_steps);

    const Atlas& atlas() const { return *atlas_; }
    const OrbifoldMetric& metric() const { return *metric_; }
    const ChartBudget& chart(const std::string& id) const;
    /// Nested region Omega_r: the chart domain scaled by r/5.
    Region omega(const std::string& id, double r) const;
    int shoot_steps() const { return shoot_steps_; }

    /// Riemannian exponential of the chart metric (flat charts: x + v).
    Vec exp(const std::string& chart, const Vec& x, const Vec& v) const;
    /// b(x, y) = exp(x, .)^{-1}(y); flat charts return y - x exactly, curved
    /// charts run a damped Newton iteration (cap 50, residual 1e-12).
    Vec log(const std::string& chart, const Vec& x, const Vec& y) const;

  private:
    const Atlas* atlas_ = nullptr;
    const OrbifoldMetric* metric_ = nullptr;
    std::map<std::string, ChartBudget> charts_;
    int shoot_steps_ = 64;
};

/// Sampled dyadic search for the budget constants; throws NumericalError
/// when no admissible injectivity radius is found.
NeighborhoodBudget estimate_budget(const Atlas& atlas, const OrbifoldMetric& metric,
                                   int shoot_steps = 64);

/// b(x, y) with its defining property exp(x, b(x, y)) = y within 1e-10.
Vec local_inverse_exp(const NeighborhoodBudget& budget, const std::string& chart, const Vec& x,
                      const Vec& y);

}  // namespace orb
