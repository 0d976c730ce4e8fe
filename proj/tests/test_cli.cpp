#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "relaxwave/numeric.hpp"

using nlohmann::json;
using relaxwave::ulp_distance;

namespace {

const std::string& cli_path() {
    static const std::string p = [] {
        const char* env = std::getenv("RELAXWAVE_CLI");
        return std::string(env ? env : "");
    }();
    return p;
}

std::string tmp_path(const std::string& name) {
    static const std::string dir = [] {
        const auto d = std::filesystem::temp_directory_path() /
                       ("relaxwave_cli_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d.string();
    }();
    return dir + "/" + name;
}

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, bool merge_stderr = false) {
    REQUIRE(!cli_path().empty());
    const std::string cmd =
        cli_path() + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

json run_json(const std::string& args) {
    const CliResult r = run_cli(args);
    REQUIRE(r.code == 0);
    return json::parse(r.out);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("cli: help and argument errors use the documented exit codes") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("").code == 2);                                    // subcommand required
    CHECK(run_cli("dispersion --alpha 1 --v -0.24 --bogus 7").code == 2);
    CHECK(run_cli("dispersion --v -0.24").code == 2);                // missing --alpha
}

TEST_CASE("cli coeffs: derived coefficients of the two-speed medium") {
    const json j = run_json("coeffs --ve 1 --vf 2");
    CHECK(j["meta"]["version"] == "relaxwave 1.0.0");
    CHECK(j["beta_f"].get<double>() == 1.5);
    CHECK(j["gamma_f"].get<double>() == 1.875);
    CHECK(ulp_distance(j["quad_free"]["alpha_tilde"].get<double>(),
                       0.44721359549995793) <= 1);
    CHECK(j["quad_free"]["v_frame"].get<double>() == 2.0);
    CHECK(j["quad_free"]["space_scale"].get<double>() < 0.0);
    // quadratic coefficient defaults to zero, so the mixed reduction is undefined
    CHECK(j["mixed"].contains("error"));
    CHECK(j["amplitude_match"]["c"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(j["amplitude_match"]["printed_claim"].get<double>() == 0.0);

    const json jm = run_json("coeffs --ve 1 --vf 2 --alpha-f 1");
    CHECK(!jm["mixed"].contains("error"));
    CHECK(ulp_distance(jm["mixed"]["alpha_tilde"].get<double>(),
                       0.67082039324993692) <= 1);

    // v_f <= v_e and non-positive tau are rejected up front
    CHECK(run_cli("coeffs --ve 3 --vf 2").code == 2);
    CHECK(run_cli("coeffs --ve 1 --vf 2 --tau -1").code == 2);
}

TEST_CASE("cli dispersion: real branch with frozen reference values") {
    const json j = run_json("dispersion --alpha 1 --v -0.24");
    const double K = j["K"].get<double>();
    CHECK(ulp_distance(K, 1.6015867021530819) <= 1);
    CHECK(j["omega1"].get<double>() == doctest::Approx(-0.12 * K).epsilon(1e-15));
    CHECK(j["omega2"].get<double>() == j["omega1"].get<double>());
    CHECK(ulp_distance(j["K_negative_branch"].get<double>(), -(1.0 + K)) <= 1);
    CHECK(std::abs(j["dispersion_residual"].get<double>()) < 1e-14);

    // comma decimals and p/q ratios parse to the same numbers
    const json jc = run_json("dispersion --alpha 1,0 --v -0,24");
    CHECK(jc["K"] == j["K"]);
    const json jr = run_json("dispersion --alpha 1 --v -6/25");
    CHECK(jr["K"] == j["K"]);

    // split speeds must come as a pair and exclude --v
    CHECK(run_cli("dispersion --alpha 1 --v1 -0.12").code == 2);
    CHECK(run_cli("dispersion --alpha 1 --v -0.24 --v1 -0.12 --v2 -0.12").code == 2);
}

TEST_CASE("cli dispersion: complex branch table and extended-precision closed form") {
    const json j = run_json("dispersion --alpha 0.06 --zeta 13/3 --v -0.24");
    CHECK(j["found"].get<bool>());
    // the zeta|v|-1 cancellation must not contaminate the reported digits
    CHECK(j["closed_form"]["K_r"].get<double>() == 1.5);
    CHECK(j["closed_form"]["omega_is_real"].get<bool>());
    CHECK(ulp_distance(j["closed_form"]["Omega"].get<double>(),
                       0.31807110961109114) <= 2);

    bool saw_oscillatory = false;
    for (const auto& b : j["branches"]) {
        CHECK(std::abs(b["residual"].get<double>()) < 1e-10);
        if (b["kind"] == "oscillatory") {
            saw_oscillatory = true;
            CHECK(b["K"]["re"].get<double>() == doctest::Approx(-0.125).epsilon(1e-9));
        }
    }
    CHECK(saw_oscillatory);

    REQUIRE(j.contains("root_finder"));
    CHECK(j["root_finder"]["K_r"].get<double>() == doctest::Approx(-0.125).epsilon(1e-9));
    CHECK(j["root_finder"]["Omega"].get<double>() ==
          doctest::Approx(0.67870351519530348).epsilon(1e-12));
}

TEST_CASE("cli classify: static and rotating families") {
    const json jh = run_json("classify --alpha 1.5 --v -0.24");
    CHECK(jh["kind"] == "hump");
    CHECK(jh["rotating"].get<bool>() == false);
    CHECK(!jh.contains("Omega"));
    CHECK(ulp_distance(jh["thresholds"]["alpha_c_static"].get<double>(),
                       1.4433756729740644) <= 1);

    CHECK(run_json("classify --alpha 1 --v -0.24")["kind"] == "loop");

    const json jl = run_json("classify --alpha 0.06 --zeta 13/3 --v -0.24");
    CHECK(jl["kind"] == "loop");
    CHECK(jl["rotating"].get<bool>());
    CHECK(ulp_distance(jl["Omega"].get<double>(), 0.31807110961109114) <= 2);
    CHECK(ulp_distance(jl["thresholds"]["alpha_c_rot"].get<double>(),
                       0.057735026918962576) <= 1);
    CHECK(ulp_distance(jl["thresholds"]["alpha_s"].get<double>(),
                       0.080064076902543566) <= 1);

    const json jn = run_json("classify --alpha 0.09 --zeta 13/3 --v -0.24");
    CHECK(jn["kind"] == "no-pattern");
    CHECK(!jn.contains("Omega"));

    // outside the rotating window the thresholds are undefined
    CHECK(run_cli("classify --alpha 0.06 --zeta 10 --v -0.24").code == 2);
}

TEST_CASE("cli render: csv body, json columns, sidecar metadata, determinism") {
    const std::string args = "render --alpha 1 --v -0.24 --n 101 --halfwidth 3";
    const CliResult r = run_cli(args);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("param,theta,x_tilde,y_tilde,u,slope\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 102); // header + n rows

    // identical invocations are byte-identical on stdout
    const CliResult r2 = run_cli(args);
    CHECK(r.out == r2.out);

    // --out writes the same bytes plus a metadata sidecar
    const std::string csvp = tmp_path("curve.csv");
    CHECK(run_cli(args + " --out " + csvp).code == 0);
    CHECK(slurp(csvp) == r.out);
    const json meta = json::parse(slurp(csvp + ".meta.json"));
    CHECK(meta["version"] == "relaxwave 1.0.0");
    CHECK(meta["config"]["alpha"] == "1");

    const json j = run_json(args + " --format json");
    CHECK(j["complex"].get<bool>() == false);
    CHECK(j["columns"]["u"].size() == 101);
    CHECK(j["columns"]["slope"].size() == 101);
    CHECK(j["features"]["implied_kind"] == "loop");
    CHECK(j["features"]["vertical_tangents"].size() == 2);
    CHECK(j["features"]["self_intersections"].size() == 1);

    // rotating section carries the complex columns
    const CliResult rc = run_cli(
        "render --alpha 0.06 --zeta 13/3 --v -0.24 --n 64 --halfwidth 3 --features 0");
    CHECK(rc.code == 0);
    CHECK(rc.out.rfind("param,theta,x_tilde,y_tilde,u,q_re,q_im,slope\n", 0) == 0);

    CHECK(run_cli(args + " --format yaml").code == 2);
}

TEST_CASE("cli invert: branch count across the fold") {
    const json j3 = run_json("invert --alpha 1 --v -0.24 --x -3.2");
    CHECK(j3["count"].get<int>() == 3);
    REQUIRE(j3["branches"].size() == 3);
    double prev = -1e300;
    for (const auto& b : j3["branches"]) {
        const double th = b["theta"].get<double>();
        CHECK(th > prev);
        prev = th;
        CHECK(std::abs(b["x_residual"].get<double>()) < 1e-9);
        CHECK(b["u"].get<double>() > 0.0);
    }

    CHECK(run_json("invert --alpha 1 --v -0.24 --x 0.5")["count"].get<int>() == 1);
    CHECK(run_json("invert --alpha 1 --v -0.24 --x -0.9")["count"].get<int>() == 1);
}

TEST_CASE("cli verify: claim verdicts land as designed") {
    const std::string args = "verify --pairs 25 --seed 3";
    const CliResult r = run_cli(args);
    CHECK(r.code == 0);
    const json j = json::parse(r.out);

    std::map<std::string, std::string> verdict;
    for (const auto& c : j["claims"])
        verdict[c["claim"].get<std::string>()] = c["verdict"].get<std::string>();

    const std::map<std::string, std::string> expected = {
        {"static-threshold-tabulated", "exact"},
        {"rotating-threshold-tabulated", "exact"},
        {"bilinear-second-member-vanishes", "exact"},
        {"bilinear-first-member", "holds-at-alpha=0"},
        {"bilinear-forcing-closed-form", "exact"},
        {"transformed-equation-solved", "holds-at-alpha=0"},
        {"transformed-residual-closed-form", "exact"},
        {"transformed-residual-fd-cross-check", "exact"},
        {"complex-residual-closed-form", "exact"},
        {"complex-accumulator-consistency", "exact"},
        {"bracket-sign-forced-reading", "holds-at-alpha=0"},
        {"bracket-sign-printed-reading", "discrepant"},
        {"rotating-parameters-vs-dispersion", "reported"},
        {"reduced-forms-constant-field", "exact"},
    };
    CHECK(verdict == expected);

    CHECK(j["rotating_comparison"]["closed_form"]["K_r"].get<double>() == 1.5);
    CHECK(j["rotating_comparison"].contains("closed_form_dispersion_residual"));

    // same seed, same bytes
    CHECK(run_cli(args).out == r.out);
}

TEST_CASE("cli simulate: loop-regime refusal names the regime and the way out") {
    const CliResult r =
        run_cli("simulate --case quad-free --alpha-tilde 0.1 --v -4 --steps 1", true);
    CHECK(r.code == 2);
    CHECK(r.out.find("multivalued") != std::string::npos);
    CHECK(r.out.find("loop") != std::string::npos);
    CHECK(r.out.find("transformed") != std::string::npos);

    // refusal with --out must not leave a partial file behind
    const std::string nope = tmp_path("nope.json");
    CHECK(run_cli("simulate --case quad-free --alpha-tilde 0.1 --v -4 --steps 1 --out " +
                  nope)
              .code == 2);
    CHECK(!std::filesystem::exists(nope));

    CHECK(run_cli("simulate --case bogus --steps 0").code == 2);
    CHECK(run_cli("simulate --steps 0").code == 2); // --case is required
}

TEST_CASE("cli simulate: damped run reports the decay-law invariants") {
    const json j = run_json(
        "simulate --case quad-free --alpha-tilde 0.5 --v -80 --steps 256 --dt 0.00390625");
    CHECK(j["parameters"]["case"] == "quad-free");
    const json& inv = j["invariants"];
    CHECK(inv["E_initial"].get<double>() > 0.0);
    CHECK(inv["mean_drift"].get<double>() < 1e-12);
    CHECK(inv["expected_decay_rate"].get<double>() == 1.0);
    CHECK(inv["decay_rel_error"].get<double>() < 1e-6);
    CHECK(j["final_coord"].get<double>() > 0.0);
}

TEST_CASE("cli simulate: transformed march transports the soliton") {
    const json j = run_json(
        "simulate --case transformed --alpha-tilde 0 --v -4 --steps 200 --dt 0.001");
    const json& inv = j["invariants"];
    CHECK(inv["transport_linf_error"].get<double>() < 1e-6);
    CHECK(inv["bracket_warning"].get<bool>() == false);
    CHECK(j["final_coord"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("cli simulate: snapshots and csv init round trip") {
    const std::string simp = tmp_path("sim.json");
    const CliResult r = run_cli(
        "simulate --case quad-free --alpha-tilde 0.5 --v -80 --steps 8 --snap-every 4 "
        "--out " +
        simp);
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(simp));
    const std::string stem = tmp_path("sim");
    for (const char* suffix : {"_000000.csv", "_000004.csv", "_000008.csv"})
        CHECK(std::filesystem::exists(stem + suffix));

    const std::string snap = slurp(stem + "_000008.csv");
    CHECK(snap.rfind("s,u\n", 0) == 0);

    // feed the final snapshot back in as the initial state
    const json j = run_json("simulate --case quad-free --alpha-tilde 0.5 --init file "
                            "--init-file " +
                            stem + "_000008.csv --steps 0");
    const double E_prev = json::parse(slurp(simp))["invariants"]["E_final"].get<double>();
    CHECK(j["invariants"]["E_initial"].get<double>() ==
          doctest::Approx(E_prev).epsilon(1e-15));

    // snapshots require a destination; malformed init files are rejected
    CHECK(run_cli("simulate --case quad-free --alpha-tilde 0.5 --v -80 --steps 4 "
                  "--snap-every 2")
              .code == 2);
    const std::string bad = tmp_path("bad.csv");
    std::ofstream(bad) << "a,b\n0,1\n";
    CHECK(run_cli("simulate --case quad-free --init file --init-file " + bad +
                  " --steps 0")
              .code == 2);
}

TEST_CASE("cli config: json file merges with flags, flags win") {
    const std::string cfg = tmp_path("cfg.json");
    std::ofstream(cfg) << R"({"alpha": 0.5, "v": "-0.24"})";

    const json a = run_json("dispersion --config " + cfg);
    const json b = run_json("dispersion --alpha 0.5 --v -0.24");
    CHECK(a["K"] == b["K"]);

    const json c = run_json("dispersion --config " + cfg + " --alpha 1");
    const json d = run_json("dispersion --alpha 1 --v -0.24");
    CHECK(c["K"] == d["K"]);
    CHECK(a["K"] != c["K"]);
    CHECK(c["meta"]["config"]["alpha"] == "1"); // the echo records the winning value

    CHECK(run_cli("dispersion --config " + tmp_path("absent.json") +
                  " --alpha 1 --v -0.24")
              .code == 2);
    const std::string mangled = tmp_path("mangled.json");
    std::ofstream(mangled) << "{not json";
    CHECK(run_cli("dispersion --config " + mangled + " --alpha 1 --v -0.24").code == 2);
}
