#include "catch_amalgamated.hpp"

#include "gcstab/cli.hpp"
#include "gcstab/error.hpp"
#include "gcstab/parallel.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

using namespace gcstab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string corpus(const std::string& name) { return (fs::path(GCSTAB_CORPUS_DIR) / (name + ".json")).string(); }

json problem_json(const std::string& name) {
    std::ifstream in(corpus(name));
    return json::parse(in);
}

std::string error_tag(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.tag();
    }
    return "none";
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("problem round trip", "[cli]") {
    for (const auto& e : fs::directory_iterator(GCSTAB_CORPUS_DIR)) {
        if (e.path().extension() != ".json") continue;
        INFO(e.path().string());
        auto p = load_problem(e.path().string());
        auto again = parse_problem(to_json(p));
        CHECK(again == p);
        CHECK(to_json(again) == to_json(p));
    }
    auto j = problem_json("quadric_sl2");
    j["polytope"]["facets"][0]["lambda"] = "12/2";
    CHECK(parse_problem(j).facets[0].lambda == 6);
}

TEST_CASE("problem validation", "[cli]") {
    auto j = problem_json("square");
    SECTION("unknown fields") {
        auto k = j;
        k["extra"] = 1;
        CHECK(error_tag([&] { parse_problem(k); }) == "cli.UnknownField");
        k = j;
        k["root_system"]["weyl"] = 1;
        CHECK(error_tag([&] { parse_problem(k); }) == "cli.UnknownField");
        k = j;
        k["options"] = {{"speed", 3}};
        CHECK(error_tag([&] { parse_problem(k); }) == "cli.UnknownField");
    }
    SECTION("bad values") {
        auto k = j;
        k["analyses"] = {"ke", "volume"};
        CHECK(error_tag([&] { parse_problem(k); }) == "cli.UnknownAnalysis");
        k = j;
        k["root_system"]["gram"] = {"1", "0", "0"};
        CHECK(error_tag([&] { parse_problem(k); }) == "cli.Schema");
        k = j;
        k["root_system"]["gram"][0] = "1/0";
        CHECK(error_tag([&] { parse_problem(k); }) == "input.BadRational");
        k = j;
        k["schema"] = "gcstab-problem/9";
        CHECK(error_tag([&] { parse_problem(k); }) == "cli.Schema");
        k = j;
        k["polytope"]["vertices"] = json::array({json::array({"2", "2"})});
        CHECK(error_tag([&] { build_chamber(parse_problem(k)); }) == "cli.VertexMismatch");
    }
    SECTION("non-positive gram exits with a validation error") {
        auto k = j;
        k["root_system"]["gram"] = {"1", "0", "0", "-1"};
        auto out = run_problem(parse_problem(k));
        CHECK(out.exit_code == 2);
        REQUIRE(out.report["errors"].size() == 1);
        CHECK(out.report["errors"][0]["tag"] == "rootdata.DegenerateGram");
        CHECK(out.report["status"] == "error");
    }
    SECTION("invalid polytope") {
        auto k = j;
        k["polytope"]["facets"][0]["u"] = {"2", "0"};
        auto out = run_problem(parse_problem(k));
        CHECK(out.exit_code == 2);
        CHECK(out.report["errors"][0]["tag"].get<std::string>().rfind("polyint.", 0) == 0);
    }
}

TEST_CASE("quadric report", "[cli]") {
    auto p = load_problem(corpus("quadric_sl2"));
    p.analyses = {"ke"};
    auto out = run_problem(p);
    CHECK(out.exit_code == 0);
    const auto& r = out.report;
    CHECK(r["verdicts"]["KE_fano"] == "yes");
    // bar = ∫_0^6 y³ / ∫_0^6 y²
    Rational bar = oracle::power_integral({{1, 3}}, 0, 6) / oracle::power_integral({{1, 2}}, 0, 6);
    CHECK(r["moments"]["bar"][0] == to_string(bar));
    CHECK(r["moments"]["bar"][0] == "9/2");
    CHECK(r["rootdata"]["four_rho"][0] == "4");
    CHECK_FALSE(r.contains("soliton"));
    CHECK_FALSE(r.contains("kenergy"));
    CHECK_FALSE(r.contains("timings"));
    CHECK(run_problem(p, RunFlags{true}).report.contains("timings"));
}

TEST_CASE("soliton on the symmetric square", "[cli]") {
    auto p = load_problem(corpus("square"));
    p.analyses = {"soliton"};
    auto out = run_problem(p);
    CHECK(out.exit_code == 0);
    const auto& s = out.report["soliton"];
    CHECK(s["c"] == json::array({0.0, 0.0}));
    CHECK(s["moment_residual"] == 0.0);
    CHECK(s["normalization_residual"] == 0.0);
    CHECK(out.report["verdicts"]["soliton"] == "yes");
}

TEST_CASE("plot data export", "[cli]") {
    auto square = run_problem(load_problem(corpus("square"))).report;
    auto csv = export_plot_data(square, "polytope", "csv");
    CHECK(count_lines(csv) == 1 + 4 + 4);
    auto pj = json::parse(export_plot_data(square, "polytope", "json"));
    CHECK(pj["vertices"].size() == 4);
    CHECK(pj["edges"].size() == 4);

    auto quadric = run_problem(load_problem(corpus("quadric_sl2"))).report;
    auto bj = json::parse(export_plot_data(quadric, "barycenters", "json"));
    CHECK(bj["points"]["bar"][0] == 4.5);
    CHECK(bj["points"]["four_rho"][0] == 4.0);
    CHECK(bj["xi_rays"].size() == 1);
    CHECK(export_plot_data(quadric, "barycenters", "csv").find("point,bar,4.5\n") != std::string::npos);

    CHECK(error_tag([&] { export_plot_data(square, "descent-trace", "csv"); }) == "cli.MissingData");
    CHECK(error_tag([&] { export_plot_data(square, "volumes", "csv"); }) == "cli.UnknownSelector");
    CHECK(error_tag([&] { export_plot_data(square, "polytope", "xml"); }) == "cli.UnknownSelector");
}

TEST_CASE("descent trace export", "[cli][slow]") {
    auto p = load_problem(corpus("dp6"));
    REQUIRE(p.options.minimize);
    p.analyses = {"kenergy"};
    auto out = run_problem(p);
    const auto& mz = out.report["kenergy"]["minimize"];
    CHECK(out.exit_code == (mz["converged"].get<bool>() ? 0 : 3));
    auto csv = export_plot_data(out.report, "descent-trace", "csv");
    CHECK(count_lines(csv) == 1 + mz["iterations"].get<std::size_t>());
    CHECK(json::parse(export_plot_data(out.report, "descent-trace", "json")).size() == mz["trace"].size());
}

TEST_CASE("candidate files", "[cli]") {
    auto cp = build_chamber(load_problem(corpus("square")));
    json j = {{"guillemin", false},
              {"terms", {{{"exponents", {2, 0}}, {"coeff", "1/2"}}, {{"exponents", {0, 2}}, {"coeff", "1/2"}}}}};
    auto u = parse_candidate(j, cp);
    CHECK_FALSE(u.guillemin_part().has_value());
    CHECK(u.jet({0.5, 0.25}, 0).value == 0.5 * (0.25 + 0.0625));
    CHECK(parse_candidate(json{{"guillemin", true}}, cp).guillemin_part().has_value());
    CHECK(error_tag([&] { parse_candidate(json{{"guillemin", false}}, cp); }) == "cli.Schema");
    CHECK(error_tag([&] { parse_candidate(json{{"shape", 1}}, cp); }) == "cli.UnknownField");
}

TEST_CASE("reports are deterministic across thread counts", "[cli]") {
    for (const auto& name : {"a2_hexagon", "blowup", "quadric_sl2"}) {
        INFO(name);
        auto p = load_problem(corpus(name));
        set_thread_count(1);
        auto a = dump_report(run_problem(p).report);
        set_thread_count(8);
        auto b = dump_report(run_problem(p).report);
        auto c = dump_report(run_problem(p).report);
        set_thread_count(0);
        CHECK(a == b);
        CHECK(b == c);
    }
}

TEST_CASE("report comparison", "[cli]") {
    json a = {{"x", 1.0}, {"s", "9/2"}, {"provenance", {{"version", "1"}}}, {"v", {1, 2}}};
    json b = a;
    b["x"] = 1.0 + 1e-12;
    b["provenance"]["version"] = "2";
    CHECK(compare_reports(a, b).empty());
    b["x"] = 1.1;
    CHECK(compare_reports(a, b).size() == 1);
    b = a;
    b["s"] = "9/4";
    CHECK(compare_reports(a, b).size() == 1);
    b = a;
    b["v"] = {1, 2, 3};
    CHECK(compare_reports(a, b).size() == 1);
    b = a;
    b["new"] = true;
    CHECK(compare_reports(a, b).size() == 1);
}

TEST_CASE("FNV-1a hash", "[cli]") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
