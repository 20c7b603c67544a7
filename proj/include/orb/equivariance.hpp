#pragma once

#include <functional>

#include "orb/atlas.hpp"

namespace orb {

using MapFn = std::function<Vec(const Vec&)>;

/// (IS): every non-identity element has no nonzero fixed vector,
/// i.e. rank(A_g - I) = d for all g != id.
bool check_IS(const FiniteGroup& group, int dim);

/// Result of the weak-equivalence search h o g = alpha(g) o h.
struct WeakEquivalence {
    bool accepted = false;
    std::vector<int> alpha;  // alpha[i]: index of alpha(g_i) in the group
    double residual = 0.0;   // max |h(g x) - alpha(g)(h x)| over the grid
    bool automorphism = false;
};

/// Exhaustive candidate search over group elements (|G| <= 64 enforced) on a
/// grid over the region. Rejection is a value, not an error.
WeakEquivalence is_weak_equivalence(const MapFn& h, const FiniteGroup& group, const Region& region,
                                    int per_axis = 9);

/// Underlying orbit map D(h): p -> canonical(h(rep)). Checks well-definedness
/// on samples (group translates of the representative map to the same orbit)
/// and throws ValidationError on failure.
OrbitPoint descend(const MapFn& h, const Atlas& atlas, const OrbitPoint& p);
double descend_well_defined_residual(const MapFn& h, const Atlas& atlas, const std::string& chart,
                                     int samples = 50, unsigned long seed = 1);

struct KernelResult {
    enum class Status { NotInKernel, Witness, Violation };
    Status status = Status::NotInKernel;
    int witness = -1;   // group element index when status == Witness
    double residual = 0.0;
};

/// If D(h) is the identity on samples, find the group element g with h = g
/// on a grid; none found flags a violation of the kernel property.
KernelResult kernel_witness(const MapFn& h, const Atlas& atlas, const std::string& chart,
                            int samples = 60, unsigned long seed = 1);

}  // namespace orb
