#pragma once

#include <random>
#include <vector>

#include "orb/types.hpp"

namespace orb {

/// Connected chart domain: an open ball or an open axis-aligned box.
/// Membership takes an optional margin that shrinks the region, which is how
/// boundary events and "with margin" preconditions are expressed.
struct Region {
    enum class Kind { Ball, Box };

    Kind kind = Kind::Ball;
    Vec center;
    double radius = 0.0;  // Ball
    Vec halfwidths;       // Box

    static Region ball(const Vec& center, double radius);
    static Region box(const Vec& center, const Vec& halfwidths);

    int dim() const { return static_cast<int>(center.size()); }

    bool contains(const Vec& x, double margin = 0.0) const;
    /// Distance from x to the boundary (negative outside).
    double clearance(const Vec& x) const;
    /// One length describing the size of the region (radius / max halfwidth).
    double scale() const;
    /// Region scaled about its center by factor s.
    Region scaled(double s) const;

    Vec bounding_lo() const;
    Vec bounding_hi() const;
};

/// Deterministic lattice of points inside the region: per_axis nodes per
/// coordinate over the bounding box, filtered to the (margin-shrunk) region,
/// capped at max_points by striding.
std::vector<Vec> grid_points(const Region& region, int per_axis, double margin = 0.0,
                             std::size_t max_points = 4096);

/// Points on (a sample of) the boundary of the region.
std::vector<Vec> boundary_points(const Region& region, int count, std::mt19937_64& rng);

Vec uniform_in_region(const Region& region, std::mt19937_64& rng, double margin = 0.0);

}  // namespace orb
