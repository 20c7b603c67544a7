#pragma once

#include "orb/metric.hpp"

namespace orb {

/// One chart-local piece of a geodesic: RK4 samples of (x, v) on [t0, t1].
struct GeodesicSegment {
    struct Sample {
        double t;
        Vec x;
        Vec v;
    };

    std::string chart;
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<Sample> samples;
    double energy_drift = 0.0;  // max |v'g v - const| observed along the segment

    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }
    /// Linear interpolation between bracketing samples (exact at samples).
    Sample at(double t) const;
};

/// Chart hop applied between two consecutive segments: the declared change
/// (by index into the atlas change list, -1 for a pure group adjust)
/// composed with a group element of the source chart.
struct TransitionRecord {
    double time = 0.0;
    int change_index = -1;
    std::string source;
    std::string target;
    GroupElement group_adjust;
};

struct OrbifoldGeodesic {
    enum class StopReason { TimeHorizon, LeftAtlas };

    std::vector<GeodesicSegment> segments;
    std::vector<TransitionRecord> transitions;
    bool maximal = false;  // true when continuation failed before the horizon
    StopReason stop_reason = StopReason::TimeHorizon;

    double t_begin() const { return segments.front().t0; }
    double t_end() const { return segments.back().t1; }
    /// State from the earliest segment covering t.
    GeodesicSegment::Sample state_at(double t, std::string* chart = nullptr) const;
};

/// Integrates x'' + Gamma(x)(x', x') = 0 with classical fixed-step RK4 from
/// (x0, v0) over [t0, t1]. Stops early with a boundary event when the point
/// exits the margin-shrunk chart domain; the event time is localized by
/// bisection to 1e-10.
GeodesicSegment integrate_geodesic(const OrbifoldChart& chart, const MetricField& metric,
                                   const Vec& x0, const Vec& v0, double t0, double t1, double step,
                                   double margin);

/// Geodesic continued across declared changes of charts up to the horizon.
OrbifoldGeodesic trace_orbifold_geodesic(const Atlas& atlas, const OrbifoldMetric& metric,
                                         const TangentOrbVector& xi, double horizon, double step);

/// Time-1 point of the geodesic with initial vector xi, as a canonical
/// orbit representative. Throws DomainError when the geodesic leaves the
/// atlas before t = 1.
OrbitPoint exp_orb(const Atlas& atlas, const OrbifoldMetric& metric, const TangentOrbVector& xi,
                   double step = 1e-3);

/// Geodesic flow alpha(t, xi); negative t follows the reversed velocity.
OrbitPoint geodesic_flow(const Atlas& atlas, const OrbifoldMetric& metric,
                         const TangentOrbVector& xi, double t, double step = 1e-3);
std::vector<OrbitPoint> geodesic_flow(const Atlas& atlas, const OrbifoldMetric& metric,
                                      const std::vector<TangentOrbVector>& xis, double t,
                                      double step = 1e-3);

/// Tangent vector of the arc at time t (earliest segment on overlaps).
TangentOrbVector initial_vector(const OrbifoldGeodesic& geo, double t);

/// Restriction of the trace to [t0, t1] (segments cut at sample boundaries).
OrbifoldGeodesic restrict_geodesic(const OrbifoldGeodesic& geo, double t0, double t1);

/// Concatenation of two traces whose initial vectors agree at a common
/// sample time. Throws NumericalError when spans are disjoint and
/// ValidationError when the vectors disagree at every common sample time.
OrbifoldGeodesic join_geodesics(const OrbifoldGeodesic& a, const OrbifoldGeodesic& b,
                                const Atlas& atlas);

/// Riemannian exponential map of one chart: geodesic shoot from x with
/// initial velocity v to t = 1 (flat charts short-circuit to x + v).
/// Throws BudgetError when the path leaves the chart domain.
Vec chart_exp(const OrbifoldChart& chart, const MetricField& metric, const Vec& x, const Vec& v,
              int steps = 64);

}  // namespace orb
