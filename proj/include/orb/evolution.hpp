#pragma once

#include "orb/diffeo.hpp"

namespace orb {

/// Time-dependent orbisection on [0,1]: either polynomial in t (orbisection
/// coefficients of t^k) or K+1 equally spaced slices with linear
/// interpolation in time. Every slice is a valid orbisection.
class TimeDependentSection {
  public:
    static TimeDependentSection polynomial(std::vector<Orbisection> coefficients);
    static TimeDependentSection slices(std::vector<Orbisection> slices);

    const Atlas& atlas() const;
    /// Field value gamma(t)(x) on a chart.
    Vec eval(const std::string& chart, const Vec& x, double t) const;
    /// The slice gamma(t) as an orbisection.
    Orbisection at(double t) const;
    /// sup over slice times of c1_norm on the given region.
    double sup_c1_norm(const std::string& chart, const Region& K) const;

  private:
    enum class Kind { PolynomialInT, Slices } kind_ = Kind::PolynomialInT;
    std::vector<Orbisection> parts_;
};

/// RK4 solve of x'(s) = gamma(s)(x(s)), x(0) = x0, evaluated at t in [0,1].
/// Throws BudgetError (flow escape) when the trajectory leaves Omega_3.
Vec flow(const TimeDependentSection& gamma, const NeighborhoodBudget& budget,
         const std::string& chart, const Vec& x0, double t, int steps = 128);

/// e(gamma)(t)(x) = b(x, Fl(t, x, gamma)) for one time.
Orbisection evolve_section_at(const TimeDependentSection& gamma, const NeighborhoodBudget& budget,
                              double t, int per_axis = 9, int flow_steps = 128);

/// Path of sections e(gamma)(t_j), t_j = j/K. e(gamma)(0) is the zero
/// section; gamma == 0 gives the zero section for every t.
std::vector<std::pair<double, Orbisection>> evolve(const TimeDependentSection& gamma,
                                                   const NeighborhoodBudget& budget, int K = 64,
                                                   int per_axis = 9, int flow_steps = 128);

/// Evolution operator: E(e(gamma)(1)).
LocalDiffeo evol(const TimeDependentSection& gamma, const NeighborhoodBudget& budget,
                 int per_axis = 9, int flow_steps = 128);

/// Central-difference right logarithmic derivative of a diffeomorphism path:
/// x -> [b(x, p(t+h)(z)) - b(x, p(t-h)(z))] / (2h) at z = p(t)^{-1}(x).
Orbisection right_log_derivative(const std::function<LocalDiffeo(double)>& path,
                                 const NeighborhoodBudget& budget, double t, double h_fd = 1e-4);

}  // namespace orb
