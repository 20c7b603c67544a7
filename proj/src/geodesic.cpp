#include "orb/geodesic.hpp"

#include <algorithm>
#include <future>

namespace orb {

namespace {

constexpr double kTimeEps = 1e-12;
constexpr double kMarginFactor = 0.05;
constexpr int kMaxTransitions = 1000;

struct State {
    Vec x;
    Vec v;
};

State rhs(const MetricField& metric, const State& s) {
    State d;
    d.x = s.v;
    if (metric.flat()) {
        d.v = Vec::Zero(s.v.size());
        return d;
    }
    const auto gamma = christoffel(metric, s.x);
    d.v = Vec::Zero(s.v.size());
    for (Index k = 0; k < s.v.size(); ++k)
        d.v[k] = -s.v.dot(gamma[static_cast<std::size_t>(k)] * s.v);
    return d;
}

State rk4_step(const MetricField& metric, const State& s, double h) {
    const State k1 = rhs(metric, s);
    const State k2 = rhs(metric, {s.x + 0.5 * h * k1.x, s.v + 0.5 * h * k1.v});
    const State k3 = rhs(metric, {s.x + 0.5 * h * k2.x, s.v + 0.5 * h * k2.v});
    const State k4 = rhs(metric, {s.x + h * k3.x, s.v + h * k3.v});
    return {s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
            s.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

}  // namespace

GeodesicSegment::Sample GeodesicSegment::at(double t) const {
    if (t < t0 - kTimeEps || t > t1 + kTimeEps)
        throw DomainError("geodesic segment: time outside the sampled span");
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const Sample& s, double tt) { return s.t < tt; });
    if (it == samples.end()) return samples.back();
    if (std::abs(it->t - t) < kTimeEps) return *it;
    if (it == samples.begin()) return samples.front();
    const Sample& hi = *it;
    const Sample& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return {t, (1 - w) * lo.x + w * hi.x, (1 - w) * lo.v + w * hi.v};
}

GeodesicSegment::Sample OrbifoldGeodesic::state_at(double t, std::string* chart) const {
    for (const auto& seg : segments) {
        if (t >= seg.t0 - kTimeEps && t <= seg.t1 + kTimeEps) {
            if (chart) *chart = seg.chart;
            return seg.at(t);
        }
    }
    throw DomainError("orbifold geodesic: time outside the traced span");
}

GeodesicSegment integrate_geodesic(const OrbifoldChart& chart, const MetricField& metric,
                                   const Vec& x0, const Vec& v0, double t0, double t1, double step,
                                   double margin) {
    if (step <= 0.0) throw NumericalError("integrate_geodesic: step must be positive");
    if (!chart.domain.contains(x0, -tol().alg))
        throw DomainError("integrate_geodesic: initial point outside chart '" + chart.id + "'");

    GeodesicSegment seg;
    seg.chart = chart.id;
    seg.t0 = t0;

    State s{x0, v0};
    double t = t0;
    long full_steps = 0;
    seg.samples.push_back({t, s.x, s.v});
    const double energy0 = s.v.dot(metric.eval(s.x) * s.v);
    const bool moving = v0.norm() > 0.0;

    while (t < t1 - kTimeEps) {
        const double h = std::min(step, t1 - t);
        State next = rk4_step(metric, s, h);
        if (moving && !chart.domain.contains(next.x, margin)) {
            // bisection on the partial step length to localize the crossing
            // of the margin-shrunk boundary to 1e-10 in time
            double lo = 0.0, hi = h;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const State probe = rk4_step(metric, s, mid);
                if (chart.domain.contains(probe.x, margin))
                    lo = mid;
                else
                    hi = mid;
            }
            const State exit_state = rk4_step(metric, s, hi);
            t += hi;
            seg.samples.push_back({t, exit_state.x, exit_state.v});
            const double e = exit_state.v.dot(metric.eval(exit_state.x) * exit_state.v);
            seg.energy_drift = std::max(seg.energy_drift, std::abs(e - energy0));
            break;
        }
        s = std::move(next);
        // keep sample times lattice-exact instead of accumulating rounding
        if (h == step) {
            ++full_steps;
            t = t0 + static_cast<double>(full_steps) * step;
        } else {
            t = t1;
        }
        seg.samples.push_back({t, s.x, s.v});
        const double e = s.v.dot(metric.eval(s.x) * s.v);
        seg.energy_drift = std::max(seg.energy_drift, std::abs(e - energy0));
    }
    seg.t1 = t;
    return seg;
}

namespace {

struct Continuation {
    std::string target;
    Vec x;
    Vec v;
    int change_index;
    GroupElement group_adjust;
    double clearance;
};

std::vector<Continuation> continuation_candidates(const Atlas& atlas, const std::string& chart_id,
                                                  const Vec& x, const Vec& v, double exit_clearance) {
    std::vector<Continuation> out;
    const auto& src = atlas.chart(chart_id);
    const double required = exit_clearance + 0.1 * kMarginFactor * src.domain.scale();
    for (std::size_t gi = 0; gi < src.group.order(); ++gi) {
        const auto& g = src.group.element(gi);
        const Vec gx = g.apply(x);
        const Vec gv = g.apply_tangent(v);
        // same-chart recentering
        if (src.domain.clearance(gx) > required)
            out.push_back({chart_id, gx, gv, -1, g, src.domain.clearance(gx)});
        for (std::size_t ci = 0; ci < atlas.changes().size(); ++ci) {
            const auto& ch = atlas.changes()[ci];
            if (ch.source != chart_id) continue;
            if (!ch.domain.contains(gx)) continue;
            const Vec y = ch.apply(gx);
            const Vec w = ch.apply_tangent(gv);
            const double c = atlas.chart(ch.target).domain.clearance(y);
            if (c > required)
                out.push_back({ch.target, y, w, static_cast<int>(ci), g, c});
        }
    }
    return out;
}

}  // namespace

OrbifoldGeodesic trace_orbifold_geodesic(const Atlas& atlas, const OrbifoldMetric& metric,
                                         const TangentOrbVector& xi, double horizon, double step) {
    atlas.validate_vector(xi);
    if (step <= 0.0) throw NumericalError("trace: step must be positive");

    OrbifoldGeodesic geo;
    std::string chart_id = xi.chart;
    Vec x = xi.base, v = xi.vec;
    double t = 0.0;
    int hops = 0;
    while (true) {
        const auto& chart = atlas.chart(chart_id);
        const double margin = kMarginFactor * chart.domain.scale();
        auto seg = integrate_geodesic(chart, metric.field(chart_id), x, v, t, horizon, step, margin);
        t = seg.t1;
        x = seg.back().x;
        v = seg.back().v;
        geo.segments.push_back(std::move(seg));
        if (t >= horizon - kTimeEps) {
            geo.stop_reason = OrbifoldGeodesic::StopReason::TimeHorizon;
            geo.maximal = false;
            break;
        }
        const double exit_clearance = chart.domain.clearance(x);
        auto candidates = continuation_candidates(atlas, chart_id, x, v, exit_clearance);
        if (candidates.empty()) {
            geo.stop_reason = OrbifoldGeodesic::StopReason::LeftAtlas;
            geo.maximal = true;
            break;
        }
        // continuations into the same target chart must agree as tangent
        // orbifold vectors; a mismatch means the declared changes are
        // inconsistent
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                if (candidates[i].target != candidates[j].target) continue;
                if (!tangent_equal({candidates[i].target, candidates[i].x, candidates[i].v},
                                   {candidates[j].target, candidates[j].x, candidates[j].v}, atlas))
                    throw NumericalError("trace: ambiguous inconsistent continuation at t=" +
                                         std::to_string(t));
            }
        }
        auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [](const Continuation& a, const Continuation& b) {
                                         if (a.clearance != b.clearance) return a.clearance > b.clearance;
                                         return a.target < b.target;
                                     });
        geo.transitions.push_back({t, best->change_index, chart_id, best->target, best->group_adjust});
        chart_id = best->target;
        x = best->x;
        v = best->v;
        if (++hops > kMaxTransitions)
            throw NumericalError("trace: transition count exceeded; atlas produces no progress");
    }
    return geo;
}

OrbitPoint exp_orb(const Atlas& atlas, const OrbifoldMetric& metric, const TangentOrbVector& xi,
                   double step) {
    auto geo = trace_orbifold_geodesic(atlas, metric, xi, 1.0, step);
    if (geo.t_end() < 1.0 - kTimeEps)
        throw DomainError("exp_orb: geodesic leaves the atlas before t=1 (outside the domain of exp)");
    std::string chart;
    const auto s = geo.state_at(1.0, &chart);
    return OrbitPoint{chart, canonical_representative({chart, s.x}, atlas)};
}

OrbitPoint geodesic_flow(const Atlas& atlas, const OrbifoldMetric& metric,
                         const TangentOrbVector& xi, double t, double step) {
    if (t == 0.0)
        return OrbitPoint{xi.chart, canonical_representative({xi.chart, xi.base}, atlas)};
    TangentOrbVector dir = xi;
    double span = t;
    if (t < 0.0) {
        dir.vec = -dir.vec;
        span = -t;
    }
    auto geo = trace_orbifold_geodesic(atlas, metric, dir, span, step);
    if (geo.t_end() < span - kTimeEps)
        throw DomainError("geodesic_flow: geodesic leaves the atlas before the requested time");
    std::string chart;
    const auto s = geo.state_at(span, &chart);
    return OrbitPoint{chart, canonical_representative({chart, s.x}, atlas)};
}

std::vector<OrbitPoint> geodesic_flow(const Atlas& atlas, const OrbifoldMetric& metric,
                                      const std::vector<TangentOrbVector>& xis, double t,
                                      double step) {
    std::vector<std::future<OrbitPoint>> futures;
    futures.reserve(xis.size());
    for (const auto& xi : xis)
        futures.push_back(std::async(std::launch::async | std::launch::deferred,
                                     [&, xi] { return geodesic_flow(atlas, metric, xi, t, step); }));
    std::vector<OrbitPoint> out;
    out.reserve(xis.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

TangentOrbVector initial_vector(const OrbifoldGeodesic& geo, double t) {
    std::string chart;
    const auto s = geo.state_at(t, &chart);
    return TangentOrbVector{chart, s.x, s.v};
}

OrbifoldGeodesic restrict_geodesic(const OrbifoldGeodesic& geo, double t0, double t1) {
    if (t0 < geo.t_begin() - kTimeEps || t1 > geo.t_end() + kTimeEps || t0 >= t1)
        throw DomainError("restrict_geodesic: [t0,t1] not inside the traced span");
    OrbifoldGeodesic out;
    for (const auto& seg : geo.segments) {
        if (seg.t1 < t0 - kTimeEps || seg.t0 > t1 + kTimeEps) continue;
        GeodesicSegment cut;
        cut.chart = seg.chart;
        cut.energy_drift = seg.energy_drift;
        for (const auto& s : seg.samples)
            if (s.t >= t0 - kTimeEps && s.t <= t1 + kTimeEps) cut.samples.push_back(s);
        if (cut.samples.empty()) continue;
        cut.t0 = cut.samples.front().t;
        cut.t1 = cut.samples.back().t;
        out.segments.push_back(std::move(cut));
    }
    for (const auto& tr : geo.transitions)
        if (tr.time >= t0 - kTimeEps && tr.time <= t1 + kTimeEps) out.transitions.push_back(tr);
    out.maximal = false;
    out.stop_reason = OrbifoldGeodesic::StopReason::TimeHorizon;
    if (out.segments.empty()) throw DomainError("restrict_geodesic: empty restriction");
    return out;
}

OrbifoldGeodesic join_geodesics(const OrbifoldGeodesic& a, const OrbifoldGeodesic& b,
                                const Atlas& atlas) {
    const double lo = std::max(a.t_begin(), b.t_begin());
    const double hi = std::min(a.t_end(), b.t_end());
    if (lo > hi + kTimeEps) throw NumericalError("join_geodesics: spans are disjoint");
    // look for a common sample time where the tangent vectors agree
    double stitch = std::numeric_limits<double>::quiet_NaN();
    for (const auto& seg : a.segments) {
        for (const auto& s : seg.samples) {
            if (s.t < lo - kTimeEps || s.t > hi + kTimeEps) continue;
            try {
                std::string cb;
                const auto sb = b.state_at(s.t, &cb);
                if (tangent_equal({seg.chart, s.x, s.v}, {cb, sb.x, sb.v}, atlas)) {
                    stitch = s.t;
                    break;
                }
            } catch (const DomainError&) {
                continue;
            }
        }
        if (!std::isnan(stitch)) break;
    }
    if (std::isnan(stitch))
        throw ValidationError("join_geodesics: initial vectors disagree at every common sample time");

    const OrbifoldGeodesic& first = a.t_begin() <= b.t_begin() ? a : b;
    const OrbifoldGeodesic& second = a.t_end() >= b.t_end() ? a : b;
    OrbifoldGeodesic out;
    if (first.t_begin() < stitch) {
        auto head = restrict_geodesic(first, first.t_begin(), stitch);
        out.segments = std::move(head.segments);
        out.transitions = std::move(head.transitions);
    }
    if (second.t_end() > stitch) {
        auto tail = restrict_geodesic(second, stitch, second.t_end());
        for (auto& seg : tail.segments) out.segments.push_back(std::move(seg));
        for (auto& tr : tail.transitions) out.transitions.push_back(std::move(tr));
    }
    if (out.segments.empty()) {
        out = restrict_geodesic(first, first.t_begin(), first.t_end());
    }
    out.maximal = false;
    out.stop_reason = OrbifoldGeodesic::StopReason::TimeHorizon;
    return out;
}

Vec chart_exp(const OrbifoldChart& chart, const MetricField& metric, const Vec& x, const Vec& v,
              int steps) {
    if (metric.flat()) {
        const Vec y = x + v;
        if (!chart.domain.contains(y, 0.0))
            throw BudgetError("chart_exp: endpoint leaves chart '" + chart.id + "'");
        return y;
    }
    State s{x, v};
    const double h = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        s = rk4_step(metric, s, h);
        if (!chart.domain.contains(s.x, 0.0))
            throw BudgetError("chart_exp: geodesic leaves chart '" + chart.id + "'");
    }
    return s.x;
}

}  // namespace orb
