#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "orb/cli.hpp"
#include "orb/emit.hpp"
#include "orb/verify.hpp"

using namespace orb;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string scenario_path(const std::string& name) {
    return std::string(ORB_SCENARIO_DIR) + "/" + name + ".json";
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
        : path(std::filesystem::temp_directory_path() / ("orbtool_test_" + tag)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("scenario files load and agree with the bundled fixtures") {
    for (const std::string name : {"mirror", "cone3", "line", "teardrop", "plane",
                                   "mirror_conformal", "cone3_conformal"}) {
        auto from_file = load_scenario_file(scenario_path(name));
        auto builtin = fixtures::get(name);
        CHECK(from_file.atlas->dim() == builtin.atlas->dim());
        REQUIRE(from_file.atlas->charts().size() == builtin.atlas->charts().size());
        for (std::size_t i = 0; i < builtin.atlas->charts().size(); ++i) {
            const auto& a = from_file.atlas->charts()[i];
            const auto& b = builtin.atlas->charts()[i];
            CHECK(a.id == b.id);
            CHECK(a.group.order() == b.group.order());
            CHECK(a.domain.scale() == doctest::Approx(b.domain.scale()));
            // metric values agree on a grid
            for (const Vec& x : grid_points(b.domain.scaled(0.5), 5))
                CHECK((from_file.metric->field(a.id).eval(x) - builtin.metric->field(b.id).eval(x))
                          .cwiseAbs()
                          .maxCoeff() < 1e-12);
        }
        // declared fields satisfy the orbisection laws by construction
        CHECK(from_file.fields.count("sigma") == 1);
        CHECK(from_file.fields.count("tau") == 1);
        CHECK(from_file.time_field.has_value());
    }
}

TEST_CASE("config errors carry field paths and exit code 2") {
    CHECK_THROWS_AS(load_scenario_text("{ not json"), ConfigError);
    CHECK_THROWS_AS(load_scenario_text(R"({"name":"x"})"), ConfigError);  // no dimension
    try {
        load_scenario_text(R"({"dimension":2,"atlas":{"charts":[
            {"id":"a","region":{"kind":"ball","center":[0,0],"radius":2},
             "group":{"generators":[{"matrix":[[1,1],[0,1]]}]}}]}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("atlas.charts[0].group") != std::string::npos);
    }

    TempDir dir("exitcodes");
    CHECK(cli::run({"verify", "--scenario", "no_such_fixture", "--out", dir.str()}) == 2);
    CHECK(cli::run({"trace", "--scenario", "mirror", "--out", dir.str()}) == 2);  // missing --base
}

TEST_CASE("trace output is byte-identical across runs and hits the fold values") {
    TempDir d1("trace1"), d2("trace2");
    const std::vector<std::string> args = {"trace",     "--scenario", "mirror", "--base", "2,1",
                                           "--vec",     "-1,-1",      "--horizon", "3",   "--step",
                                           "1e-3",      "--svg"};
    auto run_in = [&](const std::string& out) {
        auto a = args;
        a.push_back("--out");
        a.push_back(out);
        return cli::run(a);
    };
    REQUIRE(run_in(d1.str()) == 0);
    REQUIRE(run_in(d2.str()) == 0);
    CHECK(slurp(d1.str() + "/trace.csv") == slurp(d2.str() + "/trace.csv"));
    CHECK(slurp(d1.str() + "/trace.svg") == slurp(d2.str() + "/trace.svg"));

    // the row at t=3 carries the folded canonical point (1, -2)
    std::istringstream csv(slurp(d1.str() + "/trace.csv"));
    std::string line;
    bool found = false;
    while (std::getline(csv, line)) {
        if (line.rfind("3,m,", 0) == 0) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            REQUIRE(cells.size() == 9);
            CHECK(std::abs(std::stod(cells[6]) - 1.0) < 1e-6);
            CHECK(std::abs(std::stod(cells[7]) + 2.0) < 1e-6);
            found = true;
        }
    }
    CHECK(found);
    // seed lands in the header comment
    CHECK(slurp(d1.str() + "/trace.csv").rfind("# seed=42", 0) == 0);
}

TEST_CASE("compose with zero fields emits the all-zero field") {
    TempDir dir("zerocompose");
    const std::string scenario = R"({
        "name": "zero", "dimension": 2,
        "atlas": {"charts": [{"id": "u", "region": {"kind":"ball","center":[0,0],"radius":8},
                              "group": {"generators": []}}]},
        "fields": {
            "sigma": {"u": {"kind": "constant", "vector": [0, 0]}},
            "tau":  {"u": {"kind": "constant", "vector": [0, 0]}}
        }
    })";
    const std::string path = dir.str() + "/zero.json";
    write_file(path, scenario);
    REQUIRE(cli::run({"compose", "--scenario", path, "--out", dir.str()}) == 0);
    std::istringstream csv(slurp(dir.str() + "/compose.csv"));
    std::string line;
    std::getline(csv, line);  // seed comment
    std::getline(csv, line);  // header
    int rows = 0;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 5);
        CHECK(std::stod(cells[3]) == 0.0);
        CHECK(std::stod(cells[4]) == 0.0);
        ++rows;
    }
    CHECK(rows > 0);
}

TEST_CASE("numerical failures exit with code 3") {
    TempDir dir("numfail");
    // constant fields far above every budget cap
    const std::string scenario = R"({
        "name": "toolarge", "dimension": 2,
        "atlas": {"charts": [{"id": "u", "region": {"kind":"ball","center":[0,0],"radius":8},
                              "group": {"generators": []}}]},
        "fields": {
            "sigma": {"u": {"kind": "constant", "vector": [5, 0]}},
            "tau":  {"u": {"kind": "constant", "vector": [0, 5]}}
        }
    })";
    const std::string path = dir.str() + "/toolarge.json";
    write_file(path, scenario);
    CHECK(cli::run({"compose", "--scenario", path, "--out", dir.str()}) == 3);
}

TEST_CASE("verify subcommand exits zero on the bundled mirror fixture") {
    TempDir dir("verify");
    CHECK(cli::run({"verify", "--scenario", "mirror", "--out", dir.str()}) == 0);
    CHECK(std::filesystem::exists(dir.path / "verify_report.json"));
}

TEST_CASE("equivariance subcommand reports rejection as a value") {
    TempDir dir("equi");
    const std::string scenario = R"({
        "name": "shifted", "dimension": 1,
        "atlas": {"charts": [{"id": "l", "region": {"kind":"ball","center":[0],"radius":8},
                              "group": {"generators": [{"matrix": [[-1]]}]}}]},
        "maps": {"shift": {"kind": "affine", "matrix": [[1]], "translation": [0.5]}}
    })";
    const std::string path = dir.str() + "/shifted.json";
    write_file(path, scenario);
    REQUIRE(cli::run({"equivariance", "--scenario", path, "--map", "shift", "--out", dir.str()}) ==
            0);
    const std::string report = slurp(dir.str() + "/equivariance_report.json");
    CHECK(report.find("\"accepted\": false") != std::string::npos);
}
