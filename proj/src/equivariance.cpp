#include "orb/equivariance.hpp"

namespace orb {

bool check_IS(const FiniteGroup& group, int dim) {
    for (std::size_t i = 1; i < group.order(); ++i) {
        const Mat A = group.element(i).linear - Mat::Identity(dim, dim);
        Eigen::JacobiSVD<Mat> svd(A);
        if (svd.singularValues().minCoeff() < 1e-9) return false;
    }
    return true;
}

WeakEquivalence is_weak_equivalence(const MapFn& h, const FiniteGroup& group, const Region& region,
                                    int per_axis) {
    if (group.order() > 64)
        throw ValidationError("is_weak_equivalence: group order exceeds 64");
    const auto grid = grid_points(region, per_axis);
    WeakEquivalence result;
    result.alpha.assign(group.order(), -1);
    result.residual = 0.0;
    for (std::size_t gi = 0; gi < group.order(); ++gi) {
        const auto& g = group.element(gi);
        double best = std::numeric_limits<double>::infinity();
        int best_a = -1;
        for (std::size_t ai = 0; ai < group.order(); ++ai) {
            const auto& a = group.element(ai);
            double res = 0.0;
            for (const Vec& x : grid)
                res = std::max(res, (h(g.apply(x)) - a.apply(h(x))).cwiseAbs().maxCoeff());
            if (res < best) {
                best = res;
                best_a = static_cast<int>(ai);
            }
        }
        result.alpha[gi] = best_a;
        result.residual = std::max(result.residual, best);
    }
    result.accepted = result.residual < tol().alg;
    if (!result.accepted) return result;
    // alpha must be a bijection and a table homomorphism
    std::vector<bool> hit(group.order(), false);
    bool bijective = true;
    for (int a : result.alpha) {
        if (hit[static_cast<std::size_t>(a)]) bijective = false;
        hit[static_cast<std::size_t>(a)] = true;
    }
    bool hom = true;
    for (std::size_t i = 0; i < group.order() && hom; ++i)
        for (std::size_t j = 0; j < group.order(); ++j) {
            const int ij = group.product(static_cast<int>(i), static_cast<int>(j));
            const int lhs = result.alpha[static_cast<std::size_t>(ij)];
            const int rhs = group.product(result.alpha[i], result.alpha[j]);
            if (lhs != rhs) {
                hom = false;
                break;
            }
        }
    result.automorphism = bijective && hom;
    result.accepted = result.accepted && result.automorphism;
    return result;
}

OrbitPoint descend(const MapFn& h, const Atlas& atlas, const OrbitPoint& p) {
    atlas.validate_point(p);
    const Vec image = h(p.rep);
    const auto& chart = atlas.chart(p.chart);
    if (!chart.domain.contains(image, -tol().alg))
        throw DomainError("descend: image leaves the chart domain");
    // well-definedness at this point: translates of the representative land
    // on the same orbit
    const Vec canon = canonical_representative({p.chart, image}, atlas);
    for (const auto& g : chart.group.elements()) {
        const Vec other = h(g.apply(p.rep));
        const Vec canon_g = canonical_representative({p.chart, other}, atlas);
        if ((canon_g - canon).norm() >= 1e-8)
            throw ValidationError("descend: map is not well defined on the orbit of the point");
    }
    return OrbitPoint{p.chart, canon};
}

double descend_well_defined_residual(const MapFn& h, const Atlas& atlas, const std::string& chart_id,
                                     int samples, unsigned long seed) {
    const auto& chart = atlas.chart(chart_id);
    std::mt19937_64 rng(seed);
    double res = 0.0;
    int used = 0;
    // sample an inner region; points whose image leaves the chart carry no
    // information about the descended map
    const Region inner = chart.domain.scaled(0.4);
    for (int k = 0; k < samples; ++k) {
        const Vec x = uniform_in_region(inner, rng);
        try {
            const Vec canon = canonical_representative({chart_id, h(x)}, atlas);
            for (const auto& g : chart.group.elements()) {
                const Vec other = canonical_representative({chart_id, h(g.apply(x))}, atlas);
                res = std::max(res, (other - canon).norm());
            }
            ++used;
        } catch (const DomainError&) {
        }
    }
    if (used == 0) throw DomainError("descend: no sample image stays inside the chart");
    return res;
}

KernelResult kernel_witness(const MapFn& h, const Atlas& atlas, const std::string& chart_id,
                            int samples, unsigned long seed) {
    const auto& chart = atlas.chart(chart_id);
    std::mt19937_64 rng(seed);
    std::vector<Vec> pts;
    const Region inner = chart.domain.scaled(0.4);
    for (int k = 0; k < samples; ++k) pts.push_back(uniform_in_region(inner, rng));

    KernelResult result;
    // is D(h) the identity orbit map on the samples?
    for (const Vec& x : pts) {
        try {
            const Vec lhs = canonical_representative({chart_id, h(x)}, atlas);
            const Vec rhs = canonical_representative({chart_id, x}, atlas);
            result.residual = std::max(result.residual, (lhs - rhs).norm());
        } catch (const DomainError&) {
            // image left the chart: certainly not the identity orbit map
            result.status = KernelResult::Status::NotInKernel;
            result.residual = std::numeric_limits<double>::infinity();
            return result;
        }
    }
    if (result.residual >= tol().alg) {
        result.status = KernelResult::Status::NotInKernel;
        return result;
    }
    for (std::size_t gi = 0; gi < chart.group.order(); ++gi) {
        const auto& g = chart.group.element(gi);
        double res = 0.0;
        for (const Vec& x : pts) res = std::max(res, (h(x) - g.apply(x)).cwiseAbs().maxCoeff());
        if (res < tol().alg) {
            result.status = KernelResult::Status::Witness;
            result.witness = static_cast<int>(gi);
            result.residual = res;
            return result;
        }
    }
    result.status = KernelResult::Status::Violation;  // kernel property violated: inspect
    return result;
}

}  // namespace orb
