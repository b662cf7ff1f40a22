#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "relu_morse/cli.hpp"
#include "support.hpp"

using namespace relu_morse;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "relu_morse_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string write(const std::string& name, const std::string& text) {
    auto p = scratch(name);
    std::ofstream(p) << text;
    return p.string();
}

std::size_t count(const std::string& text, const std::string& pattern) {
    std::regex re(pattern);
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

}  // namespace

TEST_CASE("gen") {
    auto r = run({"gen", "--fixture", "net-b"});
    REQUIRE(r.code == 0);
    auto net = network_from_json(r.out);
    auto c = build_complex(net);
    REQUIRE(c.vertices().size() == 3);
    std::vector<std::pair<double, double>> locs;
    for (const auto& v : c.vertices()) locs.emplace_back(v.location(0), v.location(1));
    std::sort(locs.begin(), locs.end());
    CHECK(locs == std::vector<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 0}});

    auto a = run({"gen", "--arch", "2,3,1", "--seed", "7"});
    auto b = run({"gen", "--arch", "2,3,1", "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != run({"gen", "--arch", "2,3,1", "--seed", "8"}).out);

    // Output files are written whole.
    auto path = scratch("gen.json").string();
    CHECK(run({"gen", "--arch", "2,3,1", "--seed", "7", "-o", path}).code == 0);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == a.out);

    CHECK(run({"gen", "--arch", "2,3"}).code == 1);
    CHECK(run({"gen"}).code == 1);
}

TEST_CASE("build") {
    auto r = run({"build", "--fixture", "net-b"});
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    CHECK(j["cells"].size() == 19);

    auto file = write("net_b.json", run({"gen", "--fixture", "net-b"}).out);
    CHECK(run({"build", "-i", file}).out == r.out);

    auto bad = write("bad.json", "{\"dims\": [2, 3");
    auto e = run({"build", "-i", bad});
    CHECK(e.code == 1);
    CHECK(e.err.find("error") != std::string::npos);
    CHECK(run({"build", "-i", scratch("missing.json").string()}).code == 1);

    auto dup = write("dup.json", R"({"dims":[2,3,1],
        "layers":[{"weights":[[1,0],[0,1],[1,0]],"bias":[0,0,0]}],
        "final":{"weights":[[1,2,4]],"bias":[0]}})");
    e = run({"build", "-i", dup});
    CHECK(e.code == 2);
    CHECK(Json::parse(e.err)["error"] == "genericity");
}

TEST_CASE("classify") {
    auto j = Json::parse(run({"classify", "--fixture", "net-b"}).out);
    int critical = 0, regular = 0;
    for (const auto& v : j["vertices"]) {
        if (v["kind"] == "critical") {
            ++critical;
            CHECK(v["index"] == 0);
        } else {
            ++regular;
        }
    }
    CHECK(critical == 1);
    CHECK(regular == 2);
    CHECK(j["shallow"]["class"] == "all-away");

    j = Json::parse(run({"classify", "--fixture", "net-b-negated"}).out);
    REQUIRE(j["shallow"]["critical"].size() == 1);
    CHECK(j["shallow"]["critical"][0]["index"] == 2);

    // Seed 3 has a flat region under this generator; the invariants are
    // checked on the first seed from 3 upward that is in scope.
    auto seed3 = write("a241.json", run({"gen", "--arch", "2,4,1", "--seed", "3"}).out);
    auto r = run({"classify", "-i", seed3});
    CHECK(r.code == 2);
    CHECK(Json::parse(r.err)["error"] == "flat_cell");
    bool found = false;
    for (int seed = 3; seed < 60 && !found; ++seed) {
        auto file = write("a241.json", run({"gen", "--arch", "2,4,1", "--seed", std::to_string(seed)}).out);
        r = run({"classify", "-i", file});
        if (r.code != 0) continue;
        found = true;
        j = Json::parse(r.out);
        CHECK_FALSE(j.contains("shallow"));
        CHECK(j["vertices"].size() == 6);
        for (const auto& v : j["vertices"]) {
            // Critical iff no flow axis; index counts descending axes.
            bool crit = v["kind"] == "critical";
            CHECK(crit == v["flow_axis"].is_null());
            if (crit) CHECK(v["index"] == v["descending_axes"].size());
        }
    }
    CHECK(found);
}

TEST_CASE("dgvf") {
    auto j = Json::parse(run({"dgvf", "--fixture", "net-b"}).out);
    CHECK(j["report"]["result"] == "pass");
    CHECK(j["matching"]["pairs"].size() == 3);

    j = Json::parse(run({"dgvf", "--fixture", "net-b", "--local-check"}).out);
    CHECK(j["report"]["local_check"] == "pass");
    CHECK(j["report"]["result"] == "pass");

    auto r = run({"dgvf", "--fixture", "net-b", "--corrupt-matching", "0"});
    CHECK(r.code == 0);
    CHECK(Json::parse(r.out)["report"]["result"] == "fail");

    auto file = write("a341.json", run({"gen", "--arch", "3,4,1", "--seed", "7"}).out);
    r = run({"dgvf", "-i", file, "--local-check"});
    CHECK(r.code == 0);
    CHECK(Json::parse(r.out)["report"]["result"] == "pass");

    file = write("a341_1.json", run({"gen", "--arch", "3,4,1", "--seed", "1"}).out);
    r = run({"dgvf", "-i", file});
    CHECK(r.code == 2);
    CHECK(Json::parse(r.err)["error"] == "flat_cell");
}

TEST_CASE("render") {
    auto r = run({"render", "--fixture", "net-b"});
    REQUIRE(r.code == 0);
    CHECK(count(r.out, "<polyline class=\"edge") == 9);
    CHECK(count(r.out, "<circle class=\"critical\"") == 1);
    CHECK(r.out == run({"render", "--fixture", "net-b"}).out);

    auto line = write("line.json", R"({"dims":[2,1,1],
        "layers":[{"weights":[[1,-1]],"bias":[0]}],
        "final":{"weights":[[1]],"bias":[0]}})");
    r = run({"render", "-i", line});
    REQUIRE(r.code == 0);
    CHECK(count(r.out, "<polyline class=\"edge") == 1);
    CHECK(count(r.out, "<circle") == 0);

    auto three = write("three.json", run({"gen", "--arch", "3,4,1", "--seed", "7"}).out);
    r = run({"render", "-i", three});
    CHECK(r.code == 2);
    CHECK(Json::parse(r.err)["error"] == "dimension");
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"build"}).code == 1);
    CHECK(run({"build", "--fixture", "net-b", "--lp-tol", "-1"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}
