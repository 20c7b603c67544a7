#pragma once

#include "orb/scenario.hpp"

namespace orb {

struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    double bound = 0.0;
    std::string detail;
};

/// Runs the invariant suite of every module against one scenario. The list
/// adapts to the scenario (transition checks only run on multi-chart
/// atlases, etc.).
std::vector<CheckResult> run_verification(const Scenario& scenario);

}  // namespace orb
