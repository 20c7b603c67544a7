#pragma once

#include "orb/atlas.hpp"

namespace orb {

/// Smooth flat-top bump profile: 1 on [0, flat_top], 0 at 1, C-infinity
/// transition in between.
double bump_profile(double r, double flat_top);
/// Derivative of the profile with respect to r.
double bump_profile_derivative(double r, double flat_top);

/// Orbifold partition of unity: equivariant bump lifts chi_{alpha,beta}
/// (bump of chart alpha expressed in chart beta), normalized so the
/// quotient-level sum is 1 on every chart.
class PartitionOfUnity {
  public:
    PartitionOfUnity(const Atlas& atlas, double flat_top = 0.5);

    /// chi_{alpha,beta}(x) for x in chart beta. Throws CoverageError when no
    /// bump covers x.
    double lift(const std::string& alpha, const std::string& beta, const Vec& x) const;
    /// Sum over alpha of chi_{alpha,beta}(x).
    double sum(const std::string& beta, const Vec& x) const;

    double max_sum_residual(int per_axis = 15) const;
    double max_equivariance_residual(int per_axis = 9) const;

  private:
    double theta(const std::string& alpha, const Vec& x) const;       // averaged bump on its own chart
    double theta_lift(const std::string& alpha, const std::string& beta, const Vec& x) const;

    const Atlas* atlas_;
    double flat_top_;
};

PartitionOfUnity build_partition_of_unity(const Atlas& atlas, double flat_top = 0.5);

}  // namespace orb
