#pragma once

#include <optional>

#include "orb/equivariance.hpp"
#include "orb/evolution.hpp"

namespace orb {

struct ScenarioParams {
    double step = 1e-3;
    double horizon = 3.0;
    int grid = 9;
    double tol_override = 0.0;  // 0: keep defaults
    unsigned long seed = 42;
};

/// A named map with its callable lift (for the equivariance subcommand).
struct NamedMap {
    std::string kind;
    MapFn fn;
};

/// Everything a CLI run needs: atlas, metric, named sections, optional
/// time-dependent section, named maps and run parameters. Owns the atlas and
/// metric (shared pointers) so budgets can reference them safely.
struct Scenario {
    std::string name;
    std::shared_ptr<const Atlas> atlas;
    std::shared_ptr<const OrbifoldMetric> metric;
    std::map<std::string, Orbisection> fields;
    std::optional<TimeDependentSection> time_field;
    std::map<std::string, NamedMap> maps;
    ScenarioParams params;

    NeighborhoodBudget make_budget(int shoot_steps = 64) const {
        return estimate_budget(*atlas, *metric, shoot_steps);
    }
};

/// Parses the scenario description (JSON). Throws ConfigError with the
/// offending field path in the message.
Scenario load_scenario_text(const std::string& text);
Scenario load_scenario_file(const std::string& path);

namespace fixtures {

/// Bundled fixtures: "mirror", "cone3", "line", "teardrop", "plane", and the
/// conformal variants "mirror_conformal", "cone3_conformal".
Scenario get(const std::string& name);
std::vector<std::string> names();
bool exists(const std::string& name);

/// Random polynomial orbisection, equivariant by group averaging, scaled so
/// its largest per-chart c1 norm over Omega_2 equals amplitude.
Orbisection random_section(const Scenario& scenario, std::mt19937_64& rng, double amplitude,
                           int degree = 3);

/// random_section scaled to fraction * min over charts of min{eps, tau}, so
/// it passes validate_budget with headroom for fraction < ~0.85.
Orbisection random_budget_section(const Scenario& scenario, const NeighborhoodBudget& budget,
                                  std::mt19937_64& rng, double fraction, int degree = 3);

/// Deterministic budget-sized fields "sigma", "tau" and the time-dependent
/// section sigma + t tau, for scenarios that do not declare their own.
void attach_default_fields(Scenario& scenario);

}  // namespace fixtures

}  // namespace orb
