#include "orb/atlas.hpp"

#include <algorithm>

namespace orb {

void OrbifoldChart::validate() const {
    std::mt19937_64 rng(0x0bf1d5u);
    const auto boundary = boundary_points(domain, 64, rng);
    for (const auto& g : group.elements()) {
        for (const auto& x : boundary) {
            const Vec gx = g.apply(x);
            if (domain.clearance(gx) < -tol().alg)
                throw ValidationError("chart '" + id + "': domain is not invariant under its group");
        }
        // the center of an invariant ball must be fixed up to nothing at all:
        // g maps the domain into itself, so g(center) must stay inside
        if (!domain.contains(g.apply(domain.center), -tol().alg))
            throw ValidationError("chart '" + id + "': group element moves the domain");
    }
}

Atlas::Atlas(std::vector<OrbifoldChart> charts, std::vector<ChangeOfCharts> changes)
    : charts_(std::move(charts)), changes_(std::move(changes)) {
    for (std::size_t i = 0; i < charts_.size(); ++i) {
        if (index_.count(charts_[i].id))
            throw ValidationError("atlas: duplicate chart id '" + charts_[i].id + "'");
        index_[charts_[i].id] = i;
    }
    validate();
}

const OrbifoldChart& Atlas::chart(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("atlas: unknown chart id '" + id + "'");
    return charts_[it->second];
}

bool Atlas::has_chart(const std::string& id) const { return index_.count(id) > 0; }

std::vector<const ChangeOfCharts*> Atlas::changes_from(const std::string& source) const {
    std::vector<const ChangeOfCharts*> out;
    for (const auto& c : changes_)
        if (c.source == source) out.push_back(&c);
    return out;
}

void Atlas::validate() const {
    for (const auto& c : charts_) {
        if (c.dim() != dim())
            throw ValidationError("atlas: chart '" + c.id + "' has mismatched dimension");
        c.validate();
    }
    std::mt19937_64 rng(0xa71a5u);
    for (const auto& ch : changes_) {
        if (!index_.count(ch.source) || !index_.count(ch.target))
            throw ValidationError("atlas: change references unknown chart '" + ch.source + "'->'" +
                                  ch.target + "'");
        const auto& src = chart(ch.source);
        const auto& tgt = chart(ch.target);
        // domain inside source, image inside target (sampled)
        for (int k = 0; k < 32; ++k) {
            const Vec x = uniform_in_region(ch.domain, rng);
            if (src.domain.clearance(x) < -tol().alg)
                throw ValidationError("atlas: change domain leaves source chart '" + ch.source + "'");
            if (tgt.domain.clearance(ch.apply(x)) < -tol().alg)
                throw ValidationError("atlas: change image leaves target chart '" + ch.target + "'");
        }
        // the formally inverted change must be declared
        bool found_inverse = false;
        const GroupElement inv = ch.map.inverse();
        for (const auto& other : changes_) {
            if (other.source != ch.target || other.target != ch.source) continue;
            if (other.map.distance(inv) < tol().alg) {
                found_inverse = true;
                break;
            }
        }
        if (!found_inverse)
            throw ValidationError("atlas: change '" + ch.source + "'->'" + ch.target +
                                  "' has no declared inverse");
    }
    // compatibility: composing a change with a group element, where the
    // composite domain overlaps another declared change, must agree with it
    // up to a target group element (sampled)
    for (const auto& ch : changes_) {
        const auto& src = chart(ch.source);
        const auto& tgt = chart(ch.target);
        for (const auto& g : src.group.elements()) {
            for (const auto& other : changes_) {
                if (other.source != ch.source || other.target != ch.target) continue;
                for (int k = 0; k < 8; ++k) {
                    const Vec x = uniform_in_region(other.domain, rng);
                    const Vec gx = g.apply(x);
                    if (!ch.domain.contains(gx)) continue;
                    const Vec via_ch = ch.apply(gx);
                    const Vec via_other = other.apply(x);
                    bool matched = false;
                    for (const auto& h : tgt.group.elements()) {
                        if ((h.apply(via_other) - via_ch).norm() < tol().alg) {
                            matched = true;
                            break;
                        }
                    }
                    if (!matched)
                        throw ValidationError("atlas: changes '" + ch.source + "'->'" + ch.target +
                                              "' are incompatible on an overlap");
                }
            }
        }
    }
}

void Atlas::validate_point(const OrbitPoint& p) const {
    const auto& c = chart(p.chart);
    if (!c.domain.contains(p.rep, -tol().alg))
        throw DomainError("orbit point lies outside chart '" + p.chart + "'");
}

void Atlas::validate_vector(const TangentOrbVector& xi) const {
    const auto& c = chart(xi.chart);
    if (!c.domain.contains(xi.base, -tol().alg))
        throw DomainError("tangent vector based outside chart '" + xi.chart + "'");
}

FiniteGroup isotropy_group(const OrbifoldChart& chart, const Vec& x) {
    if (!chart.domain.contains(x, -tol().alg))
        throw DomainError("isotropy_group: point outside chart '" + chart.id + "'");
    return chart.group.subgroup(chart.group.stabilizer_indices(x, tol().alg));
}

bool is_singular(const OrbifoldChart& chart, const Vec& x) {
    return isotropy_group(chart, x).order() > 1;
}

namespace {

// Candidate images of (x, v) in the target chart reachable by
// [group element] o change o [group element], at most one on each side.
template <typename Visitor>
void visit_depth1_images(const Atlas& atlas, const std::string& chart_id, const Vec& x, const Vec& v,
                         Visitor&& visit) {
    const auto& src = atlas.chart(chart_id);
    for (const auto& g : src.group.elements()) {
        const Vec gx = g.apply(x);
        const Vec gv = g.apply_tangent(v);
        visit(chart_id, gx, gv);
        for (const auto* ch : atlas.changes_from(chart_id)) {
            if (!ch->domain.contains(gx, -tol().alg)) continue;
            const Vec y = ch->apply(gx);
            const Vec w = ch->apply_tangent(gv);
            const auto& tgt = atlas.chart(ch->target);
            for (const auto& h : tgt.group.elements()) visit(ch->target, h.apply(y), h.apply_tangent(w));
        }
    }
}

}  // namespace

bool orbit_equal(const OrbitPoint& p, const OrbitPoint& q, const Atlas& atlas) {
    atlas.validate_point(p);
    atlas.validate_point(q);
    bool equal = false;
    visit_depth1_images(atlas, p.chart, p.rep, Vec::Zero(p.rep.size()),
                        [&](const std::string& chart, const Vec& y, const Vec&) {
                            if (chart == q.chart && (y - q.rep).norm() < tol().alg) equal = true;
                        });
    if (equal) return true;
    // symmetric direction (q may reach p's chart even when p does not list a
    // change towards q)
    visit_depth1_images(atlas, q.chart, q.rep, Vec::Zero(q.rep.size()),
                        [&](const std::string& chart, const Vec& y, const Vec&) {
                            if (chart == p.chart && (y - p.rep).norm() < tol().alg) equal = true;
                        });
    return equal;
}

Vec canonical_representative(const OrbitPoint& p, const Atlas& atlas) {
    atlas.validate_point(p);
    const auto& group = atlas.chart(p.chart).group;
    Vec best = p.rep;
    for (const auto& g : group.elements()) {
        const Vec y = g.apply(p.rep);
        if (lex_less(best, y)) best = y;
    }
    return best;
}

double orbit_distance(const OrbitPoint& p, const OrbitPoint& q, const Atlas& atlas) {
    atlas.validate_point(p);
    atlas.validate_point(q);
    double dist = std::numeric_limits<double>::infinity();
    visit_depth1_images(atlas, p.chart, p.rep, Vec::Zero(p.rep.size()),
                        [&](const std::string& chart, const Vec& y, const Vec&) {
                            if (chart == q.chart) dist = std::min(dist, (y - q.rep).norm());
                        });
    visit_depth1_images(atlas, q.chart, q.rep, Vec::Zero(q.rep.size()),
                        [&](const std::string& chart, const Vec& y, const Vec&) {
                            if (chart == p.chart) dist = std::min(dist, (y - p.rep).norm());
                        });
    return dist;
}

bool tangent_equal(const TangentOrbVector& xi, const TangentOrbVector& zeta, const Atlas& atlas) {
    atlas.validate_vector(xi);
    atlas.validate_vector(zeta);
    bool equal = false;
    const auto match = [&](const std::string& chart, const Vec& y, const Vec& w,
                           const TangentOrbVector& target) {
        if (chart == target.chart && (y - target.base).norm() < tol().alg &&
            (w - target.vec).norm() < tol().alg)
            equal = true;
    };
    visit_depth1_images(atlas, xi.chart, xi.base, xi.vec,
                        [&](const std::string& c, const Vec& y, const Vec& w) { match(c, y, w, zeta); });
    if (equal) return true;
    visit_depth1_images(atlas, zeta.chart, zeta.base, zeta.vec,
                        [&](const std::string& c, const Vec& y, const Vec& w) { match(c, y, w, xi); });
    return equal;
}

}  // namespace orb
