#include "orb/region.hpp"

#include <algorithm>
#include <cmath>

namespace orb {

Region Region::ball(const Vec& center, double radius) {
    Region r;
    r.kind = Kind::Ball;
    r.center = center;
    r.radius = radius;
    return r;
}

Region Region::box(const Vec& center, const Vec& halfwidths) {
    Region r;
    r.kind = Kind::Box;
    r.center = center;
    r.halfwidths = halfwidths;
    return r;
}

bool Region::contains(const Vec& x, double margin) const {
    return clearance(x) > margin;
}

double Region::clearance(const Vec& x) const {
    if (kind == Kind::Ball) return radius - (x - center).norm();
    double c = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < center.size(); ++i)
        c = std::min(c, halfwidths[i] - std::abs(x[i] - center[i]));
    return c;
}

double Region::scale() const {
    if (kind == Kind::Ball) return radius;
    return halfwidths.maxCoeff();
}

Region Region::scaled(double s) const {
    if (kind == Kind::Ball) return ball(center, radius * s);
    return box(center, halfwidths * s);
}

Vec Region::bounding_lo() const {
    if (kind == Kind::Ball) return center.array() - radius;
    return center - halfwidths;
}

Vec Region::bounding_hi() const {
    if (kind == Kind::Ball) return center.array() + radius;
    return center + halfwidths;
}

std::vector<Vec> grid_points(const Region& region, int per_axis, double margin,
                             std::size_t max_points) {
    const int d = region.dim();
    const Vec lo = region.bounding_lo();
    const Vec hi = region.bounding_hi();
    std::vector<Vec> pts;
    std::vector<int> idx(d, 0);
    const long total = static_cast<long>(std::pow(per_axis, d));
    for (long n = 0; n < total; ++n) {
        long rest = n;
        Vec x(d);
        for (int i = 0; i < d; ++i) {
            const int k = static_cast<int>(rest % per_axis);
            rest /= per_axis;
            const double t = per_axis == 1 ? 0.5 : static_cast<double>(k) / (per_axis - 1);
            x[i] = lo[i] + t * (hi[i] - lo[i]);
        }
        if (region.contains(x, margin)) pts.push_back(std::move(x));
    }
    if (pts.size() > max_points) {
        std::vector<Vec> thinned;
        const double stride = static_cast<double>(pts.size()) / static_cast<double>(max_points);
        for (std::size_t k = 0; k < max_points; ++k)
            thinned.push_back(pts[static_cast<std::size_t>(k * stride)]);
        pts = std::move(thinned);
    }
    return pts;
}

std::vector<Vec> boundary_points(const Region& region, int count, std::mt19937_64& rng) {
    const int d = region.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_int_distribution<int> pick_axis(0, d - 1);
    std::uniform_int_distribution<int> pick_side(0, 1);
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        Vec x(d);
        if (region.kind == Region::Kind::Ball) {
            Vec dir(d);
            do {
                for (int i = 0; i < d; ++i) dir[i] = normal(rng);
            } while (dir.norm() < 1e-12);
            x = region.center + region.radius * dir.normalized();
        } else {
            for (int i = 0; i < d; ++i) x[i] = region.center[i] + uni(rng) * region.halfwidths[i];
            const int axis = pick_axis(rng);
            x[axis] = region.center[axis] + (pick_side(rng) ? 1.0 : -1.0) * region.halfwidths[axis];
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

Vec uniform_in_region(const Region& region, std::mt19937_64& rng, double margin) {
    const int d = region.dim();
    const Vec lo = region.bounding_lo();
    const Vec hi = region.bounding_hi();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = lo[i] + uni(rng) * (hi[i] - lo[i]);
        if (region.contains(x, margin)) return x;
    }
    throw NumericalError("uniform_in_region: rejection sampling failed");
}

}  // namespace orb
