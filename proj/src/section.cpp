#include "orb/section.hpp"

#include <algorithm>

namespace orb {

namespace {

double check_tolerance(SectionCheck check) {
    switch (check) {
        case SectionCheck::Strict:
            return tol().alg;
        case SectionCheck::Relaxed:
            return 1e-6;
        default:
            return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

Orbisection::Orbisection(const Atlas& atlas, std::map<std::string, FieldPtr> lifts,
                         SectionCheck check)
    : atlas_(&atlas), lifts_(std::move(lifts)) {
    for (const auto& c : atlas.charts())
        if (!lifts_.count(c.id))
            throw ValidationError("orbisection: missing lift for chart '" + c.id + "'");
    if (check == SectionCheck::Skip) return;
    const double cap = check_tolerance(check);
    const double eq = check_equivariance(*this, 7);
    if (eq >= cap)
        throw ValidationError("orbisection: equivariance residual " + std::to_string(eq));
    const double comp = check_compatibility(*this, 7);
    if (comp >= cap)
        throw ValidationError("orbisection: compatibility residual " + std::to_string(comp));
}

Orbisection Orbisection::zero(const Atlas& atlas) {
    std::map<std::string, FieldPtr> lifts;
    for (const auto& c : atlas.charts()) lifts[c.id] = PolyVectorField::zero(c.dim());
    return Orbisection(atlas, std::move(lifts), SectionCheck::Skip);
}

const FieldPtr& Orbisection::lift(const std::string& chart) const {
    auto it = lifts_.find(chart);
    if (it == lifts_.end()) throw DomainError("orbisection: no lift on chart '" + chart + "'");
    return it->second;
}

bool Orbisection::zero_section(double eps) const {
    for (const auto& c : atlas_->charts()) {
        for (const Vec& x : grid_points(c.domain, 5)) {
            try {
                if (lift(c.id)->eval(x).cwiseAbs().maxCoeff() > eps) return false;
            } catch (const Error&) {
                // lifts with restricted validity (sampled, evolved) are
                // compared only where they are defined
            }
        }
    }
    return true;
}

double check_equivariance(const Orbisection& sigma, int per_axis) {
    double res = 0.0;
    for (const auto& c : sigma.atlas().charts()) {
        const auto& f = sigma.lift(c.id);
        for (const Vec& x : grid_points(c.domain, per_axis)) {
            Vec fx;
            try {
                fx = f->eval(x);
            } catch (const Error&) {
                continue;  // sampled lifts may be undefined near the rim
            }
            for (const auto& g : c.group.elements()) {
                try {
                    res = std::max(res, (g.apply_tangent(fx) - f->eval(g.apply(x))).cwiseAbs().maxCoeff());
                } catch (const Error&) {
                }
            }
        }
    }
    return res;
}

double check_compatibility(const Orbisection& sigma, int per_axis) {
    double res = 0.0;
    for (const auto& ch : sigma.atlas().changes()) {
        const auto& fs = sigma.lift(ch.source);
        const auto& ft = sigma.lift(ch.target);
        for (const Vec& x : grid_points(ch.domain, per_axis)) {
            try {
                res = std::max(
                    res, (ft->eval(ch.apply(x)) - ch.apply_tangent(fs->eval(x))).cwiseAbs().maxCoeff());
            } catch (const Error&) {
            }
        }
    }
    return res;
}

double check_preserves_local_groups(const Orbisection& sigma) {
    double res = 0.0;
    std::mt19937_64 rng(0x5ec7104u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (const auto& c : sigma.atlas().charts()) {
        const auto& f = sigma.lift(c.id);
        for (std::size_t gi = 1; gi < c.group.order(); ++gi) {
            const Mat basis = fixed_subspace({c.group.element(gi)}, c.dim());
            for (int k = 0; k < 20; ++k) {
                Vec x;
                if (basis.cols() == 0) {
                    x = Vec::Zero(c.dim());  // only the origin is fixed
                } else {
                    Vec coeff(basis.cols());
                    for (Index i = 0; i < coeff.size(); ++i)
                        coeff[i] = uni(rng) * 0.8 * c.domain.scale();
                    x = basis * coeff;
                }
                if (!c.domain.contains(x)) continue;
                const auto iso = isotropy_group(c, x);
                const Mat fixed = fixed_subspace(iso);
                try {
                    res = std::max(res, distance_to_subspace(f->eval(x), fixed));
                } catch (const Error&) {
                }
                if (basis.cols() == 0) break;  // single fixed point, one sample suffices
            }
        }
    }
    return res;
}

TransportResult canonical_lift_transport(const std::map<std::string, FieldPtr>& partial,
                                         const std::string& target, const Atlas& atlas,
                                         int per_axis) {
    const auto& tgt = atlas.chart(target);
    // keep the source data by value so the returned field owns everything
    auto sources = std::make_shared<const std::map<std::string, FieldPtr>>(partial);
    const Atlas* atlas_ptr = &atlas;

    // all transported values at z: T(lambda) f_V(lambda^{-1} z) for every
    // covering change, where lambda^{-1} = (declared change W -> V) o g
    auto candidates = [sources, atlas_ptr, target](const Vec& z) {
        std::vector<Vec> out;
        if (auto it = sources->find(target); it != sources->end()) out.push_back(it->second->eval(z));
        const auto& grp = atlas_ptr->chart(target).group;
        for (const auto& g : grp.elements()) {
            const Vec gz = g.apply(z);
            for (const auto* ch : atlas_ptr->changes_from(target)) {
                auto src = sources->find(ch->target);
                if (src == sources->end()) continue;
                if (!ch->domain.contains(gz)) continue;
                const Vec value = src->second->eval(ch->apply(gz));
                // pull the tangent vector back through g then ch
                out.push_back(g.linear.transpose() * (ch->map.linear.transpose() * value));
            }
        }
        return out;
    };

    double residual = 0.0;
    for (const Vec& z : grid_points(tgt.domain, per_axis)) {
        const auto vals = candidates(z);
        for (std::size_t i = 0; i < vals.size(); ++i)
            for (std::size_t j = i + 1; j < vals.size(); ++j)
                residual = std::max(residual, (vals[i] - vals[j]).cwiseAbs().maxCoeff());
        if (vals.empty())
            throw CoverageError("canonical_lift_transport: chart '" + target +
                                "' has an uncovered grid point");
    }

    auto field = std::make_shared<CallbackVectorField>(tgt.dim(), [candidates, target](const Vec& z) {
        const auto vals = candidates(z);
        if (vals.empty())
            throw CoverageError("canonical_lift_transport: uncovered point in chart '" + target + "'");
        return vals.front();
    });
    return {field, residual};
}

Orbisection linear_combination(const Orbisection& sigma, const Orbisection& tau, double a) {
    std::map<std::string, FieldPtr> lifts;
    for (const auto& c : sigma.atlas().charts())
        lifts[c.id] = field_lincomb(1.0, sigma.lift(c.id), a, tau.lift(c.id));
    const bool closed = std::all_of(lifts.begin(), lifts.end(),
                                    [](const auto& kv) { return kv.second->analytic(); });
    return Orbisection(sigma.atlas(), std::move(lifts),
                       closed ? SectionCheck::Strict : SectionCheck::Skip);
}

Orbisection scale_section(const Orbisection& sigma, double t) {
    std::map<std::string, FieldPtr> lifts;
    for (const auto& c : sigma.atlas().charts()) lifts[c.id] = field_scale(t, sigma.lift(c.id));
    return Orbisection(sigma.atlas(), std::move(lifts), SectionCheck::Skip);
}

namespace {

class BracketField : public VectorField {
  public:
    BracketField(FieldPtr f, FieldPtr g) : f_(std::move(f)), g_(std::move(g)) {}
    int dim() const override { return f_->dim(); }
    Vec eval(const Vec& x) const override {
        return f_->jacobian(x) * g_->eval(x) - g_->jacobian(x) * f_->eval(x);
    }

  private:
    FieldPtr f_, g_;
};

}  // namespace

Orbisection bracket(const Orbisection& sigma, const Orbisection& tau) {
    std::map<std::string, FieldPtr> lifts;
    bool closed = true;
    for (const auto& c : sigma.atlas().charts()) {
        const auto& f = sigma.lift(c.id);
        const auto& g = tau.lift(c.id);
        const auto* pf = dynamic_cast<const PolyVectorField*>(f.get());
        const auto* pg = dynamic_cast<const PolyVectorField*>(g.get());
        if (pf && pg) {
            // (D f . g - D g . f)_i stays polynomial
            const int d = c.dim();
            std::vector<Polynomial> comps(static_cast<std::size_t>(d), Polynomial(d));
            for (int i = 0; i < d; ++i) {
                Polynomial sum(d);
                for (int j = 0; j < d; ++j) {
                    sum += pf->components()[static_cast<std::size_t>(i)].partial(j) *
                           pg->components()[static_cast<std::size_t>(j)];
                    sum += pg->components()[static_cast<std::size_t>(i)].partial(j) *
                           pf->components()[static_cast<std::size_t>(j)] * (-1.0);
                }
                comps[static_cast<std::size_t>(i)] = std::move(sum);
            }
            lifts[c.id] = std::make_shared<PolyVectorField>(std::move(comps));
        } else {
            lifts[c.id] = std::make_shared<BracketField>(f, g);
            closed = false;
        }
    }
    return Orbisection(sigma.atlas(), std::move(lifts),
                       closed ? SectionCheck::Strict : SectionCheck::Skip);
}

double c1_norm(const Orbisection& sigma, const std::string& chart, const Region& K, int per_axis) {
    return c1_norm(*sigma.lift(chart), K, per_axis);
}

std::optional<Region> support(const Orbisection& sigma, const std::string& chart, int per_axis) {
    const auto& c = sigma.atlas().chart(chart);
    const auto& f = sigma.lift(chart);
    if (const auto* bump = dynamic_cast<const BumpVectorField*>(f.get())) {
        const double cell = 2.0 * c.domain.scale() / (per_axis - 1);
        return Region::ball(bump->center(), bump->radius() + cell);
    }
    const Vec lo_box = c.domain.bounding_lo();
    const Vec hi_box = c.domain.bounding_hi();
    Vec lo = hi_box, hi = lo_box;
    bool any = false;
    std::size_t inside = 0, nonzero = 0;
    for (const Vec& x : grid_points(c.domain, per_axis)) {
        ++inside;
        Vec v;
        try {
            v = f->eval(x);
        } catch (const Error&) {
            continue;
        }
        if (v.cwiseAbs().maxCoeff() <= 1e-12) continue;
        ++nonzero;
        any = true;
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    if (!any) return std::nullopt;
    if (nonzero == inside) return c.domain;  // nonzero everywhere sampled
    Vec cell = (hi_box - lo_box) / (per_axis - 1);
    const Vec center = 0.5 * (lo + hi);
    const Vec halfw = 0.5 * (hi - lo) + cell;
    return Region::box(center, halfw);
}

}  // namespace orb
