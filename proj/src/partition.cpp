#include "orb/partition.hpp"

#include <cmath>
#include <sstream>

namespace orb {

namespace {
double psi(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double psi_prime(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

/// Normalized sup/euclidean radial coordinate of x in the region: 0 at the
/// center, 1 on the boundary.
double radial(const Region& region, const Vec& x) {
    if (region.kind == Region::Kind::Ball) return (x - region.center).norm() / region.radius;
    double r = 0.0;
    for (Index i = 0; i < x.size(); ++i)
        r = std::max(r, std::abs(x[i] - region.center[i]) / region.halfwidths[i]);
    return r;
}
}  // namespace

double bump_profile(double r, double flat_top) {
    if (r <= flat_top) return 1.0;
    if (r >= 1.0) return 0.0;
    const double t = (r - flat_top) / (1.0 - flat_top);
    const double a = psi(1.0 - t);
    const double b = psi(t);
    return a / (a + b);
}

double bump_profile_derivative(double r, double flat_top) {
    if (r <= flat_top || r >= 1.0) return 0.0;
    const double t = (r - flat_top) / (1.0 - flat_top);
    const double a = psi(1.0 - t), b = psi(t);
    const double da = -psi_prime(1.0 - t), db = psi_prime(t);
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b)) / (1.0 - flat_top);
}

PartitionOfUnity::PartitionOfUnity(const Atlas& atlas, double flat_top)
    : atlas_(&atlas), flat_top_(flat_top) {}

double PartitionOfUnity::theta(const std::string& alpha, const Vec& x) const {
    const auto& chart = atlas_->chart(alpha);
    double sum = 0.0;
    for (const auto& g : chart.group.elements())
        sum += bump_profile(radial(chart.domain, g.apply(x)), flat_top_);
    return sum / static_cast<double>(chart.group.order());
}

double PartitionOfUnity::theta_lift(const std::string& alpha, const std::string& beta,
                                    const Vec& x) const {
    if (alpha == beta) return theta(alpha, x);
    const auto& src = atlas_->chart(beta);
    for (const auto& g : src.group.elements()) {
        const Vec gx = g.apply(x);
        for (const auto* ch : atlas_->changes_from(beta)) {
            if (ch->target != alpha) continue;
            if (!ch->domain.contains(gx)) continue;
            return theta(alpha, ch->apply(gx));
        }
    }
    return 0.0;
}

double PartitionOfUnity::lift(const std::string& alpha, const std::string& beta, const Vec& x) const {
    double denom = 0.0;
    for (const auto& c : atlas_->charts()) denom += theta_lift(c.id, beta, x);
    if (denom <= 0.0) {
        std::ostringstream os;
        os << "partition of unity: no bump covers point [";
        for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
        os << "] in chart '" << beta << "'";
        throw CoverageError(os.str());
    }
    return theta_lift(alpha, beta, x) / denom;
}

double PartitionOfUnity::sum(const std::string& beta, const Vec& x) const {
    double s = 0.0;
    for (const auto& c : atlas_->charts()) s += lift(c.id, beta, x);
    return s;
}

double PartitionOfUnity::max_sum_residual(int per_axis) const {
    double res = 0.0;
    for (const auto& c : atlas_->charts()) {
        for (const Vec& x : grid_points(c.domain, per_axis, 1e-9 * c.domain.scale()))
            res = std::max(res, std::abs(sum(c.id, x) - 1.0));
    }
    return res;
}

double PartitionOfUnity::max_equivariance_residual(int per_axis) const {
    double res = 0.0;
    for (const auto& beta : atlas_->charts()) {
        for (const Vec& x : grid_points(beta.domain, per_axis, 1e-9 * beta.domain.scale())) {
            for (const auto& g : beta.group.elements()) {
                for (const auto& alpha : atlas_->charts()) {
                    res = std::max(res,
                                   std::abs(lift(alpha.id, beta.id, g.apply(x)) - lift(alpha.id, beta.id, x)));
                }
            }
        }
    }
    return res;
}

PartitionOfUnity build_partition_of_unity(const Atlas& atlas, double flat_top) {
    PartitionOfUnity pu(atlas, flat_top);
    // cover check on a sample grid: every grid point of every chart must be
    // reached by at least one bump
    std::vector<std::string> uncovered;
    for (const auto& c : atlas.charts()) {
        for (const Vec& x : grid_points(c.domain, 9, 1e-9 * c.domain.scale())) {
            try {
                pu.sum(c.id, x);
            } catch (const CoverageError& e) {
                uncovered.push_back(e.what());
            }
        }
    }
    if (!uncovered.empty()) throw CoverageError(uncovered.front());
    return pu;
}

}  // namespace orb
