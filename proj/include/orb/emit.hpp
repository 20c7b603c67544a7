#pragma once

#include <string>

#include "orb/geodesic.hpp"
#include "orb/section.hpp"

namespace orb {

/// Shortest round-trip formatting used by every emitter (17 significant
/// digits, byte-stable across runs).
std::string format_number(double x);

/// Trace CSV: t, chart_id, x_1..x_d, v_1..v_d, canonical_x_1..d,
/// transition_flag. The seed lands in a header comment.
std::string trace_csv(const OrbifoldGeodesic& geo, const Atlas& atlas, unsigned long seed);

/// Sampled field CSV: chart, x_1..x_d, f_1..f_d over per-chart grids.
std::string field_csv(const Orbisection& sigma, int per_axis, double omega_scale,
                      unsigned long seed);

/// 2-d quotient arc plot with the singular locus overlaid.
std::string trace_svg(const OrbifoldGeodesic& geo, const Atlas& atlas);

void write_file(const std::string& path, const std::string& content);

}  // namespace orb
