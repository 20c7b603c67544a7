#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orb/group.hpp"
#include "orb/region.hpp"

namespace orb {

/// Orbifold chart: a connected region of R^d carrying a finite group of
/// affine isometries. The domain must be invariant under the group action
/// (checked on boundary samples at construction).
struct OrbifoldChart {
    std::string id;
    Region domain;
    FiniteGroup group;

    int dim() const { return domain.dim(); }
    void validate() const;
};

/// Declared change of charts: an affine isometry defined on a sub-region of
/// the source chart, mapping into the target chart.
struct ChangeOfCharts {
    std::string source;
    std::string target;
    Region domain;  // subset of the source chart domain
    GroupElement map;

    Vec apply(const Vec& x) const { return map.apply(x); }
    Vec apply_tangent(const Vec& v) const { return map.apply_tangent(v); }
};

struct OrbitPoint {
    std::string chart;
    Vec rep;
};

/// Formal orbifold tangent vector (chart, base point, vector), compared
/// under the derived action of group elements and changes of charts.
struct TangentOrbVector {
    std::string chart;
    Vec base;
    Vec vec;
};

class Atlas {
  public:
    Atlas() = default;
    Atlas(std::vector<OrbifoldChart> charts, std::vector<ChangeOfCharts> changes);

    int dim() const { return charts_.empty() ? 0 : charts_.front().dim(); }
    const std::vector<OrbifoldChart>& charts() const { return charts_; }
    const std::vector<ChangeOfCharts>& changes() const { return changes_; }
    const OrbifoldChart& chart(const std::string& id) const;
    bool has_chart(const std::string& id) const;
    /// Declared changes with the given source chart.
    std::vector<const ChangeOfCharts*> changes_from(const std::string& source) const;

    void validate_point(const OrbitPoint& p) const;
    void validate_vector(const TangentOrbVector& xi) const;

  private:
    void validate() const;

    std::vector<OrbifoldChart> charts_;
    std::vector<ChangeOfCharts> changes_;
    std::map<std::string, std::size_t> index_;
};

/// Subgroup of the chart group fixing x (the local group of the point).
FiniteGroup isotropy_group(const OrbifoldChart& chart, const Vec& x);

bool is_singular(const OrbifoldChart& chart, const Vec& x);

/// Equality in the orbit space, searching group elements and declared
/// changes composed with at most one group element on each side (depth-1;
/// a completeness assumption on the declared change list).
bool orbit_equal(const OrbitPoint& p, const OrbitPoint& q, const Atlas& atlas);

/// Representative of the orbit of p.rep: the lexicographically greatest
/// element of {g.rep : g in G} (componentwise, ties broken by the next
/// coordinate). Idempotent; for the mirror group this folds onto |x| >= 0.
Vec canonical_representative(const OrbitPoint& p, const Atlas& atlas);

/// Equivalence of formal tangent vectors under (lambda(x), T lambda . v).
bool tangent_equal(const TangentOrbVector& xi, const TangentOrbVector& zeta, const Atlas& atlas);

/// Quantitative companion of orbit_equal: the smallest distance between a
/// depth-1 image of p and the representative of q (and symmetrically).
/// Zero (up to numerics) iff the points represent the same orbit;
/// +infinity when the depth-1 search connects no chart pair.
double orbit_distance(const OrbitPoint& p, const OrbitPoint& q, const Atlas& atlas);

}  // namespace orb
