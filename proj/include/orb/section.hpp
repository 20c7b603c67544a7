#pragma once

#include "orb/atlas.hpp"
#include "orb/vector_field.hpp"

namespace orb {

/// How strictly the orbisection invariants are enforced at construction.
enum class SectionCheck {
    Strict,   // closed-form lifts: residuals < tol_alg
    Relaxed,  // sampled/integrated lifts: residuals < tol_integration-scale
    Skip,
};

/// Compatible equivariant family of per-chart vector fields (the canonical
/// lifts of an orbisection).
class Orbisection {
  public:
    Orbisection() = default;
    Orbisection(const Atlas& atlas, std::map<std::string, FieldPtr> lifts,
                SectionCheck check = SectionCheck::Strict);

    static Orbisection zero(const Atlas& atlas);

    const Atlas& atlas() const { return *atlas_; }
    const std::map<std::string, FieldPtr>& lifts() const { return lifts_; }
    const FieldPtr& lift(const std::string& chart) const;
    Vec eval(const std::string& chart, const Vec& x) const { return lift(chart)->eval(x); }
    Mat jacobian(const std::string& chart, const Vec& x) const { return lift(chart)->jacobian(x); }
    bool zero_section(double eps = 0.0) const;

  private:
    const Atlas* atlas_ = nullptr;
    std::map<std::string, FieldPtr> lifts_;
};

/// Max equivariance residual |A_g f(x) - f(g x)| over charts, grid, group.
double check_equivariance(const Orbisection& sigma, int per_axis = 9);

/// Max compatibility residual |f_target(lambda x) - T lambda f_source(x)|
/// over declared changes.
double check_compatibility(const Orbisection& sigma, int per_axis = 9);

/// Max residual of the local-group constraint f(x) in fixed(G_x), sampled on
/// the fixed subspaces of the group elements (20 points per subspace).
double check_preserves_local_groups(const Orbisection& sigma);

/// Canonical lift on the target chart transported from charts where lifts
/// are already given, f_W(z) = T lambda f_V(lambda^{-1} z) along any
/// covering declared change. Evaluation at an uncovered point throws
/// CoverageError.
struct TransportResult {
    FieldPtr field;
    double choice_residual;  // max disagreement between covering choices on a grid
};
TransportResult canonical_lift_transport(const std::map<std::string, FieldPtr>& partial,
                                         const std::string& target, const Atlas& atlas,
                                         int per_axis = 9);

Orbisection linear_combination(const Orbisection& sigma, const Orbisection& tau, double a);
Orbisection scale_section(const Orbisection& sigma, double t);

/// Negative of the vector-field bracket: per-chart D sigma . tau - D tau . sigma.
/// Polynomial lifts stay polynomial (analytic Jacobians).
Orbisection bracket(const Orbisection& sigma, const Orbisection& tau);

double c1_norm(const Orbisection& sigma, const std::string& chart, const Region& K,
               int per_axis = 9);

/// Conservative bounding region of the nonzero samples on the chart,
/// expanded by one grid cell; nullopt when the lift vanishes on the grid.
std::optional<Region> support(const Orbisection& sigma, const std::string& chart, int per_axis = 17);

}  // namespace orb
