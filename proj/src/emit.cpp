#include "orb/emit.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace orb {

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trace_csv(const OrbifoldGeodesic& geo, const Atlas& atlas, unsigned long seed) {
    std::ostringstream os;
    const int d = atlas.dim();
    os << "# seed=" << seed << "\n";
    os << "t,chart_id";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    for (int i = 1; i <= d; ++i) os << ",v_" << i;
    for (int i = 1; i <= d; ++i) os << ",canonical_x_" << i;
    os << ",transition_flag\n";
    for (std::size_t si = 0; si < geo.segments.size(); ++si) {
        const auto& seg = geo.segments[si];
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            const auto& s = seg.samples[k];
            const Vec canon = canonical_representative({seg.chart, s.x}, atlas);
            os << format_number(s.t) << "," << seg.chart;
            for (int i = 0; i < d; ++i) os << "," << format_number(s.x[i]);
            for (int i = 0; i < d; ++i) os << "," << format_number(s.v[i]);
            for (int i = 0; i < d; ++i) os << "," << format_number(canon[i]);
            os << "," << ((si > 0 && k == 0) ? 1 : 0) << "\n";
        }
    }
    return os.str();
}

std::string field_csv(const Orbisection& sigma, int per_axis, double omega_scale,
                      unsigned long seed) {
    std::ostringstream os;
    const auto& atlas = sigma.atlas();
    const int d = atlas.dim();
    os << "# seed=" << seed << "\n";
    os << "chart_id";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    for (int i = 1; i <= d; ++i) os << ",f_" << i;
    os << "\n";
    for (const auto& chart : atlas.charts()) {
        for (const Vec& x : grid_points(chart.domain.scaled(omega_scale), per_axis)) {
            Vec v;
            try {
                v = sigma.eval(chart.id, x);
            } catch (const Error&) {
                continue;  // outside the validity of a sampled lift
            }
            os << chart.id;
            for (int i = 0; i < d; ++i) os << "," << format_number(x[i]);
            for (int i = 0; i < d; ++i) os << "," << format_number(v[i]);
            os << "\n";
        }
    }
    return os.str();
}

std::string trace_svg(const OrbifoldGeodesic& geo, const Atlas& atlas) {
    if (atlas.dim() != 2) throw ConfigError("svg output is only available for d = 2");
    // view box from the union of chart bounds (canonical representatives live
    // inside the chart domains)
    double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
    for (const auto& chart : atlas.charts()) {
        const Vec lo = chart.domain.bounding_lo();
        const Vec hi = chart.domain.bounding_hi();
        lo_x = std::min(lo_x, lo[0]);
        lo_y = std::min(lo_y, lo[1]);
        hi_x = std::max(hi_x, hi[0]);
        hi_y = std::max(hi_y, hi[1]);
    }
    const double w = hi_x - lo_x, h = hi_y - lo_y;
    const double size = 640.0;
    const double scale = size / std::max(w, h);
    auto X = [&](double x) { return (x - lo_x) * scale; };
    auto Y = [&](double y) { return size - (y - lo_y) * scale; };  // flip for svg coords

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
       << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // chart domains
    for (const auto& chart : atlas.charts()) {
        if (chart.domain.kind == Region::Kind::Ball) {
            os << "<circle cx=\"" << X(chart.domain.center[0]) << "\" cy=\"" << Y(chart.domain.center[1])
               << "\" r=\"" << chart.domain.radius * scale
               << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
        } else {
            const Vec lo = chart.domain.bounding_lo();
            os << "<rect x=\"" << X(lo[0]) << "\" y=\"" << Y(lo[1] + 2 * chart.domain.halfwidths[1])
               << "\" width=\"" << 2 * chart.domain.halfwidths[0] * scale << "\" height=\""
               << 2 * chart.domain.halfwidths[1] * scale
               << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
        }
    }
    // singular locus: fixed sets of the non-identity group elements
    for (const auto& chart : atlas.charts()) {
        for (std::size_t gi = 1; gi < chart.group.order(); ++gi) {
            const Mat basis = fixed_subspace({chart.group.element(gi)}, 2);
            if (basis.cols() == 0) {
                os << "<circle cx=\"" << X(chart.domain.center[0]) << "\" cy=\""
                   << Y(chart.domain.center[1])
                   << "\" r=\"4\" fill=\"#d62728\"/>\n";
            } else if (basis.cols() == 1) {
                const Vec dir = basis.col(0);
                const double r = chart.domain.scale();
                const Vec a = chart.domain.center - r * dir;
                const Vec b = chart.domain.center + r * dir;
                os << "<line x1=\"" << X(a[0]) << "\" y1=\"" << Y(a[1]) << "\" x2=\"" << X(b[0])
                   << "\" y2=\"" << Y(b[1])
                   << "\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
            }
        }
    }
    // quotient arc through canonical representatives
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& seg : geo.segments) {
        for (const auto& s : seg.samples) {
            const Vec c = canonical_representative({seg.chart, s.x}, atlas);
            os << X(c[0]) << "," << Y(c[1]) << " ";
        }
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out << content;
}

}  // namespace orb
