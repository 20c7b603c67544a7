#include "orb/scenario.hpp"

#include <fstream>
#include <json.hpp>

namespace orb {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("scenario: " + where + ": " + what);
}

Vec parse_vec(const json& j, const std::string& where, int dim = -1) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(where, "expected a number at index " + std::to_string(i));
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    if (dim >= 0 && v.size() != dim) fail(where, "expected " + std::to_string(dim) + " entries");
    return v;
}

Mat parse_mat(const json& j, const std::string& where, int dim) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(dim))
        fail(where, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r) m.row(r) = parse_vec(j[static_cast<std::size_t>(r)], where, dim).transpose();
    return m;
}

Region parse_region(const json& j, const std::string& where, int dim) {
    if (!j.is_object() || !j.contains("kind")) fail(where, "region needs a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const Vec center = parse_vec(j.at("center"), where + ".center", dim);
    if (kind == "ball") {
        if (!j.contains("radius")) fail(where, "ball region needs 'radius'");
        return Region::ball(center, j.at("radius").get<double>());
    }
    if (kind == "box") {
        if (!j.contains("halfwidths")) fail(where, "box region needs 'halfwidths'");
        return Region::box(center, parse_vec(j.at("halfwidths"), where + ".halfwidths", dim));
    }
    fail(where, "unknown region kind '" + kind + "'");
}

GroupElement parse_map_element(const json& j, const std::string& where, int dim) {
    const Mat A = parse_mat(j.at("matrix"), where + ".matrix", dim);
    Vec b = Vec::Zero(dim);
    if (j.contains("translation")) b = parse_vec(j.at("translation"), where + ".translation", dim);
    try {
        return GroupElement(A, b);
    } catch (const ValidationError& e) {
        fail(where, e.what());
    }
}

Polynomial parse_poly(const json& j, const std::string& where, int dim) {
    // [[coeff, [e_1, ..., e_d]], ...]
    if (!j.is_array()) fail(where, "expected an array of [coeff, exponents] terms");
    std::vector<Polynomial::Term> terms;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& t = j[k];
        if (!t.is_array() || t.size() != 2)
            fail(where, "term " + std::to_string(k) + " must be [coeff, exponents]");
        Polynomial::Term term;
        term.coeff = t[0].get<double>();
        const Vec e = parse_vec(t[1], where + "[" + std::to_string(k) + "]", dim);
        for (Index i = 0; i < e.size(); ++i) term.expo.push_back(static_cast<int>(e[i]));
        terms.push_back(std::move(term));
    }
    return Polynomial(dim, std::move(terms));
}

std::shared_ptr<const MetricTensor> parse_metric_kind(const json& j, const std::string& where,
                                                      int dim) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "flat") return std::make_shared<ConstantMetric>(Mat::Identity(dim, dim));
    if (kind == "constant")
        return std::make_shared<ConstantMetric>(parse_mat(j.at("matrix"), where + ".matrix", dim));
    if (kind == "conformal")
        return std::make_shared<ConformalMetric>(parse_poly(j.at("phi"), where + ".phi", dim));
    if (kind == "polynomial") {
        const auto& rows = j.at("entries");
        std::vector<std::vector<Polynomial>> entries;
        for (int i = 0; i < dim; ++i) {
            std::vector<Polynomial> row;
            for (int c = 0; c < dim - i; ++c)
                row.push_back(parse_poly(rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)),
                                         where + ".entries", dim));
            entries.push_back(std::move(row));
        }
        return std::make_shared<PolynomialMetric>(dim, std::move(entries));
    }
    fail(where, "unknown metric kind '" + kind + "'");
}

FieldPtr parse_field_kind(const json& j, const std::string& where, const OrbifoldChart& chart) {
    const int dim = chart.dim();
    const std::string kind = j.at("kind").get<std::string>();
    FieldPtr field;
    if (kind == "polynomial") {
        const auto& comps = j.at("components");
        if (comps.size() != static_cast<std::size_t>(dim)) fail(where, "need one component per axis");
        std::vector<Polynomial> polys;
        for (int i = 0; i < dim; ++i)
            polys.push_back(parse_poly(comps[static_cast<std::size_t>(i)],
                                       where + ".components[" + std::to_string(i) + "]", dim));
        field = std::make_shared<PolyVectorField>(std::move(polys));
    } else if (kind == "linear") {
        field = PolyVectorField::linear(parse_mat(j.at("matrix"), where + ".matrix", dim));
    } else if (kind == "constant") {
        field = PolyVectorField::constant(parse_vec(j.at("vector"), where + ".vector", dim));
    } else if (kind == "bump") {
        const Vec center = parse_vec(j.at("center"), where + ".center", dim);
        const Vec dir = parse_vec(j.at("vector"), where + ".vector", dim);
        const double radius = j.at("radius").get<double>();
        const double flat_top = j.value("flat_top", 0.5);
        field = std::make_shared<BumpVectorField>(center, radius, dir, flat_top);
    } else if (kind == "sum") {
        std::vector<std::pair<double, FieldPtr>> terms;
        const auto& arr = j.at("terms");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const double w = arr[k].value("weight", 1.0);
            terms.push_back({w, parse_field_kind(arr[k], where + ".terms[" + std::to_string(k) + "]",
                                                 chart)});
        }
        field = std::make_shared<SumVectorField>(std::move(terms));
    } else {
        fail(where, "unknown field kind '" + kind + "'");
    }
    if (j.value("average", false)) {
        if (const auto* poly = dynamic_cast<const PolyVectorField*>(field.get())) {
            field = poly->group_average(chart.group);
        } else {
            // average non-polynomial kinds as an explicit group sum
            std::vector<std::pair<double, FieldPtr>> terms;
            const double w = 1.0 / static_cast<double>(chart.group.order());
            for (const auto& g : chart.group.elements()) {
                const Mat ginv = g.linear.transpose();
                const FieldPtr inner = field;
                const GroupElement gg = g;
                terms.push_back({w, std::make_shared<CallbackVectorField>(
                                        chart.dim(), [inner, gg, ginv](const Vec& x) {
                                            return Vec(ginv * inner->eval(gg.apply(x)));
                                        })});
            }
            field = std::make_shared<SumVectorField>(std::move(terms));
        }
    }
    return field;
}

Orbisection parse_section(const json& j, const std::string& where, const Atlas& atlas) {
    std::map<std::string, FieldPtr> lifts;
    if (j.contains("*")) {
        for (const auto& chart : atlas.charts())
            lifts[chart.id] = parse_field_kind(j.at("*"), where + ".*", chart);
    } else {
        for (const auto& chart : atlas.charts()) {
            if (!j.contains(chart.id)) fail(where, "missing field for chart '" + chart.id + "'");
            lifts[chart.id] = parse_field_kind(j.at(chart.id), where + "." + chart.id, chart);
        }
    }
    try {
        return Orbisection(atlas, std::move(lifts), SectionCheck::Strict);
    } catch (const ValidationError& e) {
        fail(where, e.what());
    }
}

}  // namespace

Scenario load_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario: JSON parse error: ") + e.what());
    }
    Scenario sc;
    sc.name = j.value("name", "scenario");
    if (!j.contains("dimension")) fail("dimension", "missing");
    const int dim = j.at("dimension").get<int>();

    // atlas
    if (!j.contains("atlas")) fail("atlas", "missing");
    const auto& ja = j.at("atlas");
    std::vector<OrbifoldChart> charts;
    for (std::size_t k = 0; k < ja.at("charts").size(); ++k) {
        const auto& jc = ja.at("charts")[k];
        const std::string where = "atlas.charts[" + std::to_string(k) + "]";
        OrbifoldChart chart;
        chart.id = jc.at("id").get<std::string>();
        chart.domain = parse_region(jc.at("region"), where + ".region", dim);
        std::vector<GroupElement> gens;
        if (jc.contains("group")) {
            for (std::size_t g = 0; g < jc.at("group").at("generators").size(); ++g)
                gens.push_back(parse_map_element(jc.at("group").at("generators")[g],
                                                 where + ".group.generators[" + std::to_string(g) + "]",
                                                 dim));
        }
        try {
            chart.group = FiniteGroup::generate(dim, gens);
        } catch (const ValidationError& e) {
            fail(where + ".group", e.what());
        }
        charts.push_back(std::move(chart));
    }
    std::vector<ChangeOfCharts> changes;
    if (ja.contains("changes")) {
        for (std::size_t k = 0; k < ja.at("changes").size(); ++k) {
            const auto& jc = ja.at("changes")[k];
            const std::string where = "atlas.changes[" + std::to_string(k) + "]";
            ChangeOfCharts ch;
            ch.source = jc.at("source").get<std::string>();
            ch.target = jc.at("target").get<std::string>();
            ch.domain = parse_region(jc.at("region"), where + ".region", dim);
            ch.map = parse_map_element(jc.at("map"), where + ".map", dim);
            changes.push_back(std::move(ch));
        }
    }
    try {
        sc.atlas = std::make_shared<Atlas>(std::move(charts), std::move(changes));
    } catch (const Error& e) {
        fail("atlas", e.what());
    }

    // metric (default flat everywhere)
    std::map<std::string, MetricField> fields;
    for (const auto& chart : sc.atlas->charts()) {
        std::shared_ptr<const MetricTensor> tensor;
        if (j.contains("metric") && j.at("metric").contains(chart.id))
            tensor = parse_metric_kind(j.at("metric").at(chart.id), "metric." + chart.id, dim);
        else if (j.contains("metric") && j.at("metric").contains("*"))
            tensor = parse_metric_kind(j.at("metric").at("*"), "metric.*", dim);
        else
            tensor = std::make_shared<ConstantMetric>(Mat::Identity(dim, dim));
        fields[chart.id] = MetricField{chart.id, tensor};
    }
    try {
        sc.metric = std::make_shared<OrbifoldMetric>(*sc.atlas, std::move(fields));
    } catch (const Error& e) {
        fail("metric", e.what());
    }

    // named sections
    if (j.contains("fields")) {
        for (auto it = j.at("fields").begin(); it != j.at("fields").end(); ++it)
            sc.fields.emplace(it.key(), parse_section(it.value(), "fields." + it.key(), *sc.atlas));
    }

    // time-dependent section
    if (j.contains("time_field")) {
        const auto& jt = j.at("time_field");
        const std::string kind = jt.at("kind").get<std::string>();
        std::vector<Orbisection> parts;
        const char* array_key = (kind == "poly_t") ? "coefficients" : "slices";
        if (kind != "poly_t" && kind != "slices") fail("time_field", "unknown kind '" + kind + "'");
        for (std::size_t k = 0; k < jt.at(array_key).size(); ++k)
            parts.push_back(parse_section(jt.at(array_key)[k],
                                          "time_field." + std::string(array_key) + "[" +
                                              std::to_string(k) + "]",
                                          *sc.atlas));
        sc.time_field = (kind == "poly_t") ? TimeDependentSection::polynomial(std::move(parts))
                                           : TimeDependentSection::slices(std::move(parts));
    }

    // maps for the equivariance checks
    if (j.contains("maps")) {
        for (auto it = j.at("maps").begin(); it != j.at("maps").end(); ++it) {
            const auto& jm = it.value();
            const std::string where = "maps." + it.key();
            const std::string kind = jm.at("kind").get<std::string>();
            NamedMap nm;
            nm.kind = kind;
            if (kind == "linear" || kind == "affine") {
                const Mat A = parse_mat(jm.at("matrix"), where + ".matrix", dim);
                Vec b = Vec::Zero(dim);
                if (jm.contains("translation"))
                    b = parse_vec(jm.at("translation"), where + ".translation", dim);
                nm.fn = [A, b](const Vec& x) { return Vec(A * x + b); };
            } else if (kind == "group") {
                const std::string chart = jm.value("chart", sc.atlas->charts().front().id);
                const int index = jm.at("index").get<int>();
                const auto& grp = sc.atlas->chart(chart).group;
                if (index < 0 || index >= static_cast<int>(grp.order()))
                    fail(where, "group element index out of range");
                const GroupElement g = grp.element(static_cast<std::size_t>(index));
                nm.fn = [g](const Vec& x) { return g.apply(x); };
            } else if (kind == "polynomial") {
                std::vector<Polynomial> comps;
                for (int i = 0; i < dim; ++i)
                    comps.push_back(parse_poly(jm.at("components")[static_cast<std::size_t>(i)],
                                               where + ".components", dim));
                auto poly = std::make_shared<PolyVectorField>(std::move(comps));
                nm.fn = [poly](const Vec& x) { return poly->eval(x); };
            } else {
                fail(where, "unknown map kind '" + kind + "'");
            }
            sc.maps.emplace(it.key(), std::move(nm));
        }
    }

    // run parameters
    if (j.contains("params")) {
        const auto& jp = j.at("params");
        sc.params.step = jp.value("step", sc.params.step);
        sc.params.horizon = jp.value("horizon", sc.params.horizon);
        sc.params.grid = jp.value("grid", sc.params.grid);
        sc.params.seed = jp.value("seed", sc.params.seed);
        sc.params.tol_override = jp.value("tol", 0.0);
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_scenario_text(text);
}

}  // namespace orb
