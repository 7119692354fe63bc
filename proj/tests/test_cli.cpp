#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "mim/cli.hpp"
#include "mim/io.hpp"

using namespace mim;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "mimcav");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

io::Table parse(const std::string& csv) {
    std::istringstream in(csv);
    return io::read_csv(in);
}

double num(const io::Cell& c) { return std::stod(std::get<std::string>(c)); }

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "mimcav_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

const std::vector<std::string> kTableArgs{"spectrum", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--beta", "0.2", "--count", "20"};

}  // namespace

TEST_CASE("format_number") {
    CHECK(io::format_number(1.5624140689753) == "1.56241407");
    CHECK(io::format_number(1.5624140689753, 6) == "1.56241");
    CHECK(io::format_number(-0.0) == "0");
    CHECK(io::format_number(2.5e-12, 3) == "2.5e-12");
}

TEST_CASE("spectrum reproduces the first reference row") {
    const auto r = run(kTableArgs);
    REQUIRE(r.code == 0);
    const auto t = parse(r.out);
    CHECK(t.columns == std::vector<std::string>{"n", "omega", "omega_a", "delta_bound", "percent"});
    REQUIRE(t.rows.size() == 20);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 21);
    const double expect[] = {1, 1.56241, 1.56266, 0.00293, -0.01548};
    for (int i = 0; i < 5; ++i) CHECK(num(t.rows[0][i]) == doctest::Approx(expect[i]).epsilon(2e-4));
}

TEST_CASE("structural verification") {
    const auto r = run({"structural", "--xi-l", "2", "--alpha", "2", "--n", "5", "--k", "2", "--verify", "--grid", "100"});
    REQUIRE(r.code == 0);
    const auto t = parse(r.out);
    REQUIRE(t.rows.size() == 1);
    CHECK(num(t.rows[0][3]) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(num(t.rows[0][4]) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(std::get<std::string>(t.rows[0].back()) == "PASS");
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({"spectrum", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({"spectrum", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--chi0", "0.1", "--beta", "0.2"}).code == 2);
    CHECK(run({"spectrum", "--xi-l", "2", "--delta", "0.01", "--alpha", "2"}).code == 2);
    CHECK(run({"spectrum", "--xi-l", "2", "--delta", "3", "--alpha", "2", "--beta", "0.2"}).code == 2);
    CHECK(run({"spectrum", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--beta", "0.2", "--format", "xml"}).code == 2);
    const auto r = run({"spectrum", "--bogus"});
    CHECK(r.out.empty());
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(run({"spectrum", "--help"}).code == 0);
}

TEST_CASE("I/O failure exits with 1") {
    auto args = kTableArgs;
    args.insert(args.end(), {"--output", "/nonexistent/dir/out.csv"});
    CHECK(run(args).code == 1);
    CHECK(run({"--config", "/nonexistent/cfg.json"}).code == 1);
}

TEST_CASE("JSON config round trip; flags override the file") {
    const auto cfg = scratch("spectrum.json");
    auto args = kTableArgs;
    args.insert(args.end(), {"--digits", "7", "--write-config", cfg.string()});
    const auto first = run(args);
    REQUIRE(first.code == 0);
    const auto doc = nlohmann::json::parse(slurp(cfg));
    CHECK(doc["command"] == "spectrum");
    CHECK(doc["count"] == 20);
    CHECK(doc["digits"] == 7);

    const auto again = run({"--config", cfg.string()});
    REQUIRE(again.code == 0);
    CHECK(again.out == first.out);
    const auto trailing = run({"spectrum", "--config", cfg.string()});
    CHECK(trailing.out == first.out);

    const auto fewer = run({"spectrum", "--config", cfg.string(), "--count", "3"});
    CHECK(parse(fewer.out).rows.size() == 3);

    // Every subcommand round-trips.
    const std::vector<std::vector<std::string>> cmds{
        {"structural", "--xi-l", "2", "--alpha", "2", "--n", "5", "--k", "2", "--verify", "--grid", "20"},
        {"midpoint", "--xi-l", "2", "--alpha", "2", "--n-max", "2"},
        {"sweep", "--xi-l", "2", "--delta", "0.3", "--alpha", "2", "--points", "5", "--count", "4"},
        {"modes", "--xi-l", "2", "--delta", "0.2", "--chi0", "0.1", "--q0", "0.7", "--count", "2", "--points", "11"},
        {"couplings", "--xi-l", "2", "--delta", "0.2", "--alpha", "1.5", "--q0", "0.7", "--count", "3", "--method", "analytic"},
    };
    for (const auto& c : cmds) {
        const auto path = scratch(c[0] + ".json");
        auto a = c;
        a.insert(a.end(), {"--write-config", path.string()});
        const auto r1 = run(a);
        REQUIRE(r1.code == 0);
        const auto r2 = run({"--config", path.string()});
        CAPTURE(c[0]);
        CHECK(r2.code == 0);
        CHECK(r2.out == r1.out);
    }
}

TEST_CASE("sweep output is long-format and deterministic") {
    const std::vector<std::string> args{"sweep", "--xi-l", "2", "--delta", "0.3333333333333333", "--alpha", "2", "--points", "100", "--count", "29"};
    ::setenv("MIM_THREADS", "1", 1);
    const auto one = run(args);
    ::setenv("MIM_THREADS", "3", 1);
    const auto three = run(args);
    ::unsetenv("MIM_THREADS");
    REQUIRE(one.code == 0);
    CHECK(one.out == three.out);
    CHECK(run(args).out == one.out);
    const auto t = parse(one.out);
    CHECK(t.columns == std::vector<std::string>{"beta", "n", "omega"});
    CHECK(t.rows.size() == 100 * 29);
    // 3 pi is structural for this width: one index stays flat across the sweep.
    double flat_n = 0.0;
    for (int i = 0; i < 29; ++i)
        if (std::abs(num(t.rows[i][2]) - 3 * std::numbers::pi) < 1e-6) flat_n = num(t.rows[i][1]);
    REQUIRE(flat_n > 0.0);
    double lo = 1e9, hi = -1e9;
    for (const auto& row : t.rows) {
        if (num(row[1]) != flat_n) continue;
        lo = std::min(lo, num(row[2]));
        hi = std::max(hi, num(row[2]));
    }
    CHECK(lo == doctest::Approx(3 * std::numbers::pi).epsilon(1e-8));
    CHECK(hi - lo < 1e-7);
}

TEST_CASE("empty result gives a header-only file") {
    const auto path = scratch("empty.csv");
    const auto r = run({"structural", "--xi-l", "2", "--alpha", "2", "--delta", "0.31", "--output", path.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(path) == "n,k,omega,omega_over_pi,width\n");
    const auto j = run({"structural", "--xi-l", "2", "--alpha", "2", "--delta", "0.31", "--format", "json"});
    CHECK(nlohmann::json::parse(j.out).empty());
}

TEST_CASE("json output keeps column order") {
    auto args = kTableArgs;
    args.insert(args.end(), {"--format", "json", "--count", "2"});
    const auto r = run(args);
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    REQUIRE(doc.size() == 2);
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc[0].items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"n", "omega", "omega_a", "delta_bound", "percent"});
    CHECK(doc[0]["omega"].get<double>() == doctest::Approx(1.56241407).epsilon(1e-9));
}

TEST_CASE("midpoint and modes commands") {
    const auto m = parse(run({"midpoint", "--xi-l", "2", "--alpha", "2"}).out);
    REQUIRE(m.rows.size() == 4);
    for (const auto& row : m.rows) CHECK(std::abs(num(row[4])) < 1e-10);

    const auto g = parse(run({"modes", "--xi-l", "2", "--delta", "0.2", "--alpha", "2", "--beta", "0.3", "--count", "3", "--points", "21"}).out);
    REQUIRE(g.rows.size() == 63);
    for (const auto& row : g.rows) {
        const double xi = num(row[1]);
        if (xi == 0.0 || xi == 2.0) CHECK(std::abs(num(row[2])) < 1e-9);
    }
}

TEST_CASE("simulate writes diagnostics and profiles") {
    const auto prof = scratch("profiles.csv");
    const auto r = run({"simulate", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--times", "50,100", "--profile-times",
                        "0,100", "--profile-points", "11", "--profiles", prof.string(), "--m-series", "6", "--method", "analytic"});
    REQUIRE(r.code == 0);
    const auto d = parse(r.out);
    REQUIRE(d.rows.size() == 2);
    CHECK(d.columns.size() == 12);
    for (const auto& row : d.rows) CHECK(num(row[4]) < 0.01);
    const auto p = parse(slurp(prof));
    CHECK(p.rows.size() == 22);
    CHECK(run({"simulate", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--center", "1.9"}).code == 2);
    // A coarse table fails its validation: numerical failure.
    CHECK(run({"simulate", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--grid-points", "41", "--m-series", "4",
               "--method", "analytic"}).code == 1);
    CHECK(run({"simulate", "--xi-l", "2", "--delta", "0.01", "--alpha", "2", "--m-track", "12"}).code == 2);
}
