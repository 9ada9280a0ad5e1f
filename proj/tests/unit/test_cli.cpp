#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polycycle/cli.hpp"
#include "polycycle/document.hpp"
#include "polycycle/errors.hpp"

using namespace polycycle;

namespace {

const std::string kDir = POLYCYCLE_MODELS_DIR;

int run(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    if (out) *out = o.str();
    return code;
}

bool cites(const CyclicityVerdict& v, const std::string& item) {
    for (const auto& s : v.rationale)
        if (s.rfind(item, 0) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("analyze the game model") {
    const Model m = load_model(kDir + "/game.model");
    const Analysis a = analyze(m, m.defaults());
    CHECK(std::abs(a.at.ret.r - 1.0) < 1e-12);
    CHECK(std::abs(a.at.ret.a1n - 1.0) < 1e-9);
    CHECK(a.ret.verdict.lower == 2);
    CHECK(a.ret.verdict.upper == 2);
    CHECK(cites(a.ret.verdict, "Thm A(d)"));
    CHECK(cites(a.ret.verdict, "Thm B(a)"));
    REQUIRE(a.flow_probe);
    CHECK(a.flow_probe->found);
    CHECK(a.flow_probe->s >= 1e-3);
    CHECK(a.flow_probe->s <= 1e-1);
    REQUIRE(a.disp);
    CHECK(a.disp->verdict.upper == 2);
}

TEST_CASE("analyze away from the special point") {
    const Model m = load_model(kDir + "/game.model");
    const Analysis a = analyze(m, m.bind({{"l1", 0.4}}));
    CHECK(a.at.ret.r == doctest::Approx(1.35));
    CHECK(a.ret.verdict.lower == 0);
    CHECK(a.ret.verdict.upper == 0);
    CHECK(cites(a.ret.verdict, "Thm A(a)"));
}

TEST_CASE("identity model stays inconclusive") {
    const Model m = load_model(kDir + "/identity.model");
    const Analysis a = analyze(m, m.defaults());
    REQUIRE(a.flow_probe);
    CHECK_FALSE(a.flow_probe->found);
    CHECK_FALSE(a.ret.verdict.lower);
    CHECK_FALSE(a.ret.verdict.upper);
    CHECK_THROWS_AS(analyze(load_model(kDir + "/limit_cycle.model"), {{"a", 1.0}}), UsageError);
}

TEST_CASE("scan kernels") {
    const Model m = load_model(kDir + "/game.model");
    const std::vector<GridAxis> axes{parse_grid_axis("l1=0.28:0.31:11")};
    const ScanTable s = scan_serial(m, m.defaults(), axes), p = scan_parallel(m, m.defaults(), axes);
    REQUIRE(s.rows.size() == 11);
    int crossings = 0;
    for (size_t k = 0; k < s.rows.size(); ++k) {
        for (size_t c = 0; c < s.columns.size(); ++c) {
            const double a = s.rows[k].values[c], b = p.rows[k].values[c];
            CHECK(((a == b) || (std::isnan(a) && std::isnan(b))));
        }
        if (k > 0 && s.rows[k - 1].values[0] < 0 && s.rows[k].values[0] > 0) {
            ++crossings;
            CHECK(s.rows[k - 1].mu.at("l1") < 8.0 / 27.0);
            CHECK(s.rows[k].mu.at("l1") > 8.0 / 27.0);
        }
    }
    CHECK(crossings == 1);
    CHECK(scan_serial(m, m.defaults(), {parse_grid_axis("l2=1.5")}).rows.size() == 1);
    CHECK_THROWS_AS(scan_serial(m, m.defaults(), {parse_grid_axis("q=1")}), UsageError);
    CHECK_THROWS_AS(scan_serial(m, m.defaults(), {parse_grid_axis("l1=0:1:1001"), parse_grid_axis("l2=0:1:1001")}),
                    UsageError);
    CHECK_THROWS_AS(parse_grid_axis("l1=0:1"), UsageError);
    CHECK_THROWS_AS(parse_grid_axis("l1=0:1:0"), UsageError);
}

TEST_CASE("csv quoting") {
    ScanTable t;
    t.axes = {"a"};
    t.columns = {"v"};
    ScanRow r;
    r.mu = {{"a", 0.1}};
    r.values = {std::nan("")};
    r.error = "bad \"value\", again";
    t.rows.push_back(r);
    CHECK(to_csv(t) == "a,v,error\r\n0.10000000000000001,,\"bad \"\"value\"\", again\"\r\n");
}

TEST_CASE("result document round trip") {
    const Model m = load_model(kDir + "/game.model");
    const Json doc = analysis_document(m, analyze(m, m.defaults()));
    CHECK(Json::parse(doc.dump()) == doc);
    CHECK(Json::parse(doc.dump(2)) == doc);
    CHECK(doc["verdict"]["cycl_lower"] == 2);
    CHECK(doc["provenance"]["model_sha1"] == m.digest);
    CHECK(doc["verdict"]["tolerance"]["zero_tol"] == 1e-9);
}

TEST_CASE("cli commands and exit codes") {
    std::string out;
    CHECK(run({"analyze", "--model", kDir + "/game.model"}, &out) == kExitOk);
    const Json doc = Json::parse(out);
    CHECK(doc["verdict"]["cycl_upper"] == 2);

    CHECK(run({"analyze", "--model", kDir + "/game.model", "--set", "nope=1"}) == kExitUsage);
    CHECK(run({"analyze", "--model", kDir + "/game.model", "--tol", "nope=1"}) == kExitUsage);
    CHECK(run({"analyze"}) == kExitUsage);
    CHECK(run({}) == kExitUsage);
    CHECK(run({"oracle", "--model", kDir + "/game.model", "return", "--s-min", "1e-2", "--s-max", "1e-3"}) ==
          kExitUsage);
    CHECK(run({"oracle", "--model", kDir + "/game.model", "dulac", "7"}) == kExitUsage);
    CHECK(run({"scan", "--model", kDir + "/game.model", "--grid", "zz=1"}) == kExitUsage);

    const std::string bad = "cli_bad.model";
    std::ofstream(bad) << "[field]\ndot_x = x*(\ndot_y = y\n";
    CHECK(run({"analyze", "--model", bad}) == kExitModel);
    std::remove(bad.c_str());

    // Every sample beyond the basin fails.
    CHECK(run({"oracle", "--model", kDir + "/game.model", "return", "--s-min", "2", "--s-max", "3", "--count", "3"}) ==
          kExitNumeric);

    CHECK(run({"oracle", "--model", kDir + "/linear_saddle.model", "dulac", "1"}, &out) == kExitOk);
    const Json d = Json::parse(out);
    CHECK(d["fit"]["exponent"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(d["d00_relative_deviation"].get<double>() < 1e-6);

    CHECK(run({"oracle", "--model", kDir + "/limit_cycle.model", "cycles"}, &out) == kExitOk);
    CHECK(Json::parse(out)["cycles"]["count"] == 1);

    CHECK(run({"compose-check", "--seed", "42", "--count", "0"}, &out) == kExitOk);
    CHECK(Json::parse(out)["report"]["cases"].empty());

    CHECK(run({"scan", "--model", kDir + "/game.model", "--grid", "l1=8/27"}, &out) == kExitOk);
    CHECK(std::count(out.begin(), out.end(), '\n') == 2);

    const std::string path = "cli_out.json";
    CHECK(run({"analyze", "--model", kDir + "/game.model", "--no-flow", "--out", path}, &out) == kExitOk);
    CHECK(out.empty());
    std::ifstream in(path);
    CHECK(Json::parse(in)["verdict"]["cycl_lower"] == 2);
    std::remove(path.c_str());
}
