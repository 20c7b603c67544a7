#include "orb/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "orb/emit.hpp"
#include "orb/verify.hpp"

namespace orb::cli {

namespace {

using json = nlohmann::json;

struct Options {
    std::string scenario = "mirror";
    double step = 0.0;     // 0: use scenario default
    double horizon = 0.0;  // 0: use scenario default
    int grid = 0;
    double tol_flag = 0.0;
    unsigned long seed = 0;
    bool seed_set = false;
    std::string out = "out";
    bool svg = false;

    std::string chart;
    std::vector<double> base;
    std::vector<double> vec;
    std::string sigma_name = "sigma";
    std::string tau_name = "tau";
    std::string map_name = "h";
    std::string field_name;
};

Scenario load(const Options& opt) {
    Scenario sc = std::filesystem::exists(opt.scenario) ? load_scenario_file(opt.scenario)
                  : fixtures::exists(opt.scenario)      ? fixtures::get(opt.scenario)
                                                        : throw ConfigError(
                                                         "scenario '" + opt.scenario +
                                                         "' is neither a file nor a bundled fixture");
    if (opt.step > 0) sc.params.step = opt.step;
    if (opt.horizon > 0) sc.params.horizon = opt.horizon;
    if (opt.grid > 0) sc.params.grid = opt.grid;
    if (opt.seed_set) sc.params.seed = opt.seed;
    if (opt.tol_flag > 0) sc.params.tol_override = opt.tol_flag;
    if (sc.params.tol_override > 0) tol().alg = sc.params.tol_override;
    return sc;
}

Scenario load_with_fields(const Options& opt) {
    Scenario sc = load(opt);
    fixtures::attach_default_fields(sc);
    return sc;
}

const Orbisection& named_field(const Scenario& sc, const std::string& name) {
    auto it = sc.fields.find(name);
    if (it == sc.fields.end())
        throw ConfigError("scenario has no field named '" + name + "'");
    return it->second;
}

Vec to_vec(const std::vector<double>& raw, int dim, const std::string& flag) {
    if (static_cast<int>(raw.size()) != dim)
        throw ConfigError("--" + flag + " needs " + std::to_string(dim) + " comma-separated numbers");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = raw[static_cast<std::size_t>(i)];
    return v;
}

std::string out_path(const Options& opt, const std::string& file) {
    return (std::filesystem::path(opt.out) / file).string();
}

json budget_report_json(const BudgetReport& report) {
    json j;
    j["pass"] = report.pass;
    for (const auto& c : report.charts) {
        json jc;
        jc["c1_norm"] = c.c1;
        jc["tau"] = c.tau;
        jc["sup_metric"] = c.sup_metric;
        jc["sup_cap"] = c.sup_cap;
        jc["min_abs_det"] = c.min_abs_det;
        jc["injective"] = c.injective;
        jc["pass"] = c.pass;
        if (!c.failing.empty()) jc["failing"] = c.failing;
        j["charts"][c.chart] = jc;
    }
    return j;
}

int cmd_trace(const Options& opt) {
    const Scenario sc = load(opt);
    const int d = sc.atlas->dim();
    const std::string chart = opt.chart.empty() ? sc.atlas->charts().front().id : opt.chart;
    if (opt.base.empty() || opt.vec.empty())
        throw ConfigError("trace needs --base and --vec");
    TangentOrbVector xi{chart, to_vec(opt.base, d, "base"), to_vec(opt.vec, d, "vec")};
    const auto geo =
        trace_orbifold_geodesic(*sc.atlas, *sc.metric, xi, sc.params.horizon, sc.params.step);
    write_file(out_path(opt, "trace.csv"), trace_csv(geo, *sc.atlas, sc.params.seed));
    if (opt.svg) write_file(out_path(opt, "trace.svg"), trace_svg(geo, *sc.atlas));
    std::cout << "trace: " << geo.segments.size() << " segment(s), " << geo.transitions.size()
              << " transition(s), span [" << format_number(geo.t_begin()) << ", "
              << format_number(geo.t_end()) << "]"
              << (geo.maximal ? " (maximal: left atlas)" : "") << "\n";
    return 0;
}

int cmd_expmap(const Options& opt) {
    const Scenario sc = opt.field_name.empty() ? load(opt) : load_with_fields(opt);
    const int d = sc.atlas->dim();
    std::ostringstream os;
    os << "# seed=" << sc.params.seed << "\n";
    os << "chart_id";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    for (int i = 1; i <= d; ++i) os << ",v_" << i;
    os << ",exp_chart";
    for (int i = 1; i <= d; ++i) os << ",exp_x_" << i;
    os << "\n";
    const Orbisection* field = nullptr;
    if (!opt.field_name.empty()) field = &named_field(sc, opt.field_name);
    for (const auto& chart : sc.atlas->charts()) {
        for (const Vec& x : grid_points(chart.domain.scaled(2.0 / 5.0), sc.params.grid)) {
            const Vec v = field ? field->eval(chart.id, x) : Vec(Vec::Zero(d));
            OrbitPoint p;
            try {
                p = exp_orb(*sc.atlas, *sc.metric, {chart.id, x, v}, sc.params.step);
            } catch (const DomainError&) {
                continue;  // outside the domain of exp
            }
            os << chart.id;
            for (int i = 0; i < d; ++i) os << "," << format_number(x[i]);
            for (int i = 0; i < d; ++i) os << "," << format_number(v[i]);
            os << "," << p.chart;
            for (int i = 0; i < d; ++i) os << "," << format_number(p.rep[i]);
            os << "\n";
        }
    }
    write_file(out_path(opt, "expmap.csv"), os.str());
    std::cout << "expmap: wrote " << out_path(opt, "expmap.csv") << "\n";
    return 0;
}

int cmd_compose(const Options& opt) {
    const Scenario sc = load_with_fields(opt);
    const auto budget = sc.make_budget();
    const auto& sigma = named_field(sc, opt.sigma_name);
    const auto& tau = named_field(sc, opt.tau_name);
    const auto comp = compose_sections(sigma, tau, budget, sc.params.grid);
    write_file(out_path(opt, "compose.csv"), field_csv(comp, sc.params.grid, 2.0 / 5.0, sc.params.seed));

    // residual report: group law sampled on orbit points, measured with the
    // exact compositional evaluator (the CSV carries the sampled lattice)
    auto Es = exp_section(sigma, budget);
    auto Et = exp_section(tau, budget);
    std::mt19937_64 rng(sc.params.seed);
    double law = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto& chart = sc.atlas->charts()[rng() % sc.atlas->charts().size()];
        const Vec x = uniform_in_region(budget.omega(chart.id, 1.0), rng);
        const Vec via = budget.exp(chart.id, x, diamond_at(sigma, tau, budget, chart.id, x));
        law = std::max(law, (Es.apply(Et.apply({chart.id, x})).rep -
                             canonical_representative({chart.id, via}, *sc.atlas))
                                .norm());
    }
    json report;
    report["operation"] = "compose";
    report["group_law_residual"] = law;
    report["budget_sigma"] = budget_report_json(validate_budget(sigma, budget));
    report["budget_tau"] = budget_report_json(validate_budget(tau, budget));
    write_file(out_path(opt, "compose_report.json"), report.dump(2) + "\n");
    std::cout << "compose: group-law residual " << format_number(law) << "\n";
    return 0;
}

int cmd_invert(const Options& opt) {
    const Scenario sc = load_with_fields(opt);
    const auto budget = sc.make_budget();
    const auto& sigma = named_field(sc, opt.sigma_name);
    const auto inv = invert_section(sigma, budget, sc.params.grid);
    write_file(out_path(opt, "invert.csv"),
               field_csv(inv, sc.params.grid, 1.0 / 5.0, sc.params.seed));

    auto Es = exp_section(sigma, budget);
    std::mt19937_64 rng(sc.params.seed);
    double round = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto& chart = sc.atlas->charts()[rng() % sc.atlas->charts().size()];
        const Vec x = uniform_in_region(budget.omega(chart.id, 1.0), rng);
        const auto mid = Es.apply({chart.id, x});
        const Vec back = budget.exp(mid.chart, mid.rep, star_at(sigma, budget, mid.chart, mid.rep));
        round = std::max(round, (canonical_representative({mid.chart, back}, *sc.atlas) -
                                 canonical_representative({chart.id, x}, *sc.atlas))
                                    .norm());
    }
    json report;
    report["operation"] = "invert";
    report["inversion_residual"] = round;
    report["budget_sigma"] = budget_report_json(validate_budget(sigma, budget));
    write_file(out_path(opt, "invert_report.json"), report.dump(2) + "\n");
    std::cout << "invert: E(sigma*) o E(sigma) residual " << format_number(round) << "\n";
    return 0;
}

int cmd_bracket(const Options& opt) {
    const Scenario sc = load_with_fields(opt);
    const auto& sigma = named_field(sc, opt.sigma_name);
    const auto& tau = named_field(sc, opt.tau_name);
    const auto br = bracket(sigma, tau);
    write_file(out_path(opt, "bracket.csv"),
               field_csv(br, sc.params.grid, 2.0 / 5.0, sc.params.seed));
    json report;
    report["operation"] = "bracket";
    report["equivariance_residual"] = check_equivariance(br);
    report["compatibility_residual"] = check_compatibility(br);
    double anti = 0.0;
    const auto br2 = bracket(tau, sigma);
    for (const auto& chart : sc.atlas->charts())
        for (const Vec& x : grid_points(chart.domain.scaled(0.4), 5))
            anti = std::max(anti, (br.eval(chart.id, x) + br2.eval(chart.id, x)).norm());
    report["antisymmetry_residual"] = anti;
    write_file(out_path(opt, "bracket_report.json"), report.dump(2) + "\n");
    std::cout << "bracket: equivariance residual "
              << format_number(report["equivariance_residual"].get<double>()) << "\n";
    return 0;
}

int cmd_evolve(const Options& opt) {
    const Scenario sc = load_with_fields(opt);
    if (!sc.time_field) throw ConfigError("scenario has no time_field");
    const auto budget = sc.make_budget();
    const auto path = evolve(*sc.time_field, budget, 16, sc.params.grid);
    std::ostringstream os;
    const int d = sc.atlas->dim();
    os << "# seed=" << sc.params.seed << "\n";
    os << "t,chart_id";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    for (int i = 1; i <= d; ++i) os << ",e_" << i;
    os << "\n";
    for (const auto& [t, slice] : path) {
        for (const auto& chart : sc.atlas->charts()) {
            for (const Vec& x : grid_points(budget.omega(chart.id, 1.0), sc.params.grid)) {
                Vec v;
                try {
                    v = slice.eval(chart.id, x);
                } catch (const Error&) {
                    continue;
                }
                os << format_number(t) << "," << chart.id;
                for (int i = 0; i < d; ++i) os << "," << format_number(x[i]);
                for (int i = 0; i < d; ++i) os << "," << format_number(v[i]);
                os << "\n";
            }
        }
    }
    write_file(out_path(opt, "evolve.csv"), os.str());

    auto diffeo_path = [&](double t) {
        return exp_section(evolve_section_at(*sc.time_field, budget, t, 17), budget);
    };
    double rld = 0.0;
    for (double t : {0.25, 0.5, 0.75}) {
        auto delta = right_log_derivative(diffeo_path, budget, t);
        for (const auto& chart : sc.atlas->charts())
            for (const Vec& x : grid_points(budget.omega(chart.id, 1.0), 5))
                rld = std::max(rld,
                               (delta.eval(chart.id, x) - sc.time_field->eval(chart.id, x, t)).norm());
    }
    json report;
    report["operation"] = "evolve";
    report["right_log_derivative_residual"] = rld;
    report["slices"] = path.size();
    write_file(out_path(opt, "evolve_report.json"), report.dump(2) + "\n");
    std::cout << "evolve: delta^r residual " << format_number(rld) << "\n";
    return rld < 1e-4 ? 0 : 1;
}

int cmd_equivariance(const Options& opt) {
    const Scenario sc = load_with_fields(opt);
    auto it = sc.maps.find(opt.map_name);
    if (it == sc.maps.end()) throw ConfigError("scenario has no map named '" + opt.map_name + "'");
    const std::string chart = opt.chart.empty() ? sc.atlas->charts().front().id : opt.chart;
    const auto& group = sc.atlas->chart(chart).group;
    const auto res =
        is_weak_equivalence(it->second.fn, group, sc.atlas->chart(chart).domain.scaled(0.4),
                            sc.params.grid);
    json report;
    report["map"] = opt.map_name;
    report["chart"] = chart;
    report["accepted"] = res.accepted;
    report["residual"] = res.residual;
    report["automorphism"] = res.automorphism;
    if (res.accepted) report["alpha"] = res.alpha;
    report["is_condition"] = check_IS(group, sc.atlas->dim());
    const auto kw = kernel_witness(it->second.fn, *sc.atlas, chart);
    report["kernel"] = kw.status == KernelResult::Status::Witness
                           ? "witness " + std::to_string(kw.witness)
                       : kw.status == KernelResult::Status::NotInKernel ? "not-in-kernel"
                                                                        : "violation";
    write_file(out_path(opt, "equivariance_report.json"), report.dump(2) + "\n");
    std::cout << "equivariance: " << (res.accepted ? "accepted" : "rejected") << " (residual "
              << format_number(res.residual) << ")\n";
    return 0;
}

int cmd_verify(const Options& opt) {
    const Scenario sc = load(opt);
    const auto results = run_verification(sc);
    bool all_pass = true;
    json report;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << sc.name << "." << r.name << " (residual "
                  << format_number(r.residual) << ", bound " << format_number(r.bound) << ")"
                  << (r.detail.empty() ? "" : " - " + r.detail) << "\n";
        json jr;
        jr["pass"] = r.pass;
        jr["residual"] = r.residual;
        jr["bound"] = r.bound;
        if (!r.detail.empty()) jr["detail"] = r.detail;
        report[r.name] = jr;
        all_pass = all_pass && r.pass;
    }
    write_file(out_path(opt, "verify_report.json"), report.dump(2) + "\n");
    std::cout << (all_pass ? "verify: all invariants hold" : "verify: INVARIANT FAILURE") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Riemannian orbifold toolkit: geodesics, orbisections and the local "
                 "structure of the diffeomorphism group"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    Options opt;
    app.add_option("--scenario", opt.scenario, "Scenario file or bundled fixture name");
    app.add_option("--step", opt.step, "Integrator step");
    app.add_option("--horizon", opt.horizon, "Trace horizon");
    app.add_option("--grid", opt.grid, "Grid density per axis");
    app.add_option("--tol", opt.tol_flag, "Algebraic tolerance override");
    app.add_option("--seed", opt.seed, "Random seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    app.add_option("--out", opt.out, "Output directory");
    app.add_flag("--svg", opt.svg, "Also emit SVG plots (d = 2)");

    auto* trace = app.add_subcommand("trace", "Trace an orbifold geodesic");
    trace->add_option("--chart", opt.chart, "Start chart (default: first)");
    trace->add_option("--base", opt.base, "Base point coordinates")->delimiter(',');
    trace->add_option("--vec", opt.vec, "Initial velocity coordinates")->delimiter(',');

    auto* expmap = app.add_subcommand("expmap", "Evaluate exp_orb over a grid");
    expmap->add_option("--field", opt.field_name, "Named field supplying the vectors");

    auto* compose = app.add_subcommand("compose", "Compose two sections (diamond)");
    compose->add_option("--sigma", opt.sigma_name, "First field name");
    compose->add_option("--tau", opt.tau_name, "Second field name");

    auto* invert = app.add_subcommand("invert", "Invert a section (star)");
    invert->add_option("--sigma", opt.sigma_name, "Field name");

    auto* brk = app.add_subcommand("bracket", "Lie bracket of two sections");
    brk->add_option("--sigma", opt.sigma_name, "First field name");
    brk->add_option("--tau", opt.tau_name, "Second field name");

    app.add_subcommand("evolve", "Evolve the scenario's time-dependent section");

    auto* equi = app.add_subcommand("equivariance", "Weak-equivalence checks for a named map");
    equi->add_option("--map", opt.map_name, "Map name");
    equi->add_option("--chart", opt.chart, "Chart whose group is used");

    app.add_subcommand("verify", "Run the full invariant suite");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (trace->parsed()) return cmd_trace(opt);
        if (expmap->parsed()) return cmd_expmap(opt);
        if (compose->parsed()) return cmd_compose(opt);
        if (invert->parsed()) return cmd_invert(opt);
        if (brk->parsed()) return cmd_bracket(opt);
        if (app.get_subcommand("evolve")->parsed()) return cmd_evolve(opt);
        if (equi->parsed()) return cmd_equivariance(opt);
        if (app.get_subcommand("verify")->parsed()) return cmd_verify(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace orb::cli
