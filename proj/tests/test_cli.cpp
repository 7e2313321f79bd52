// Drives the CLI binary end to end: every subcommand, config-file overrides,
// manifests, exit codes. The binary path arrives as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    if (!ok) {
        std::cerr << "FAILED: " << what << "\n";
        ++g_failures;
    } else {
        std::cout << "ok: " << what << "\n";
    }
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int count_lines(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) ++n;
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: mfh_cli_tests <path-to-mfh>\n";
        return 2;
    }
    const std::string mfh = argv[1];
    fs::path dir = fs::temp_directory_path() / "mfh_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string out = " --out-dir " + dir.string();

    // invariant report
    check(run(mfh + out + " invariant --model toy --beta 0.1 --m 1.5 --alpha 1 > " +
              (dir / "inv.out").string()) == 0,
          "invariant exits 0");
    check(fs::exists(dir / "invariant.csv"), "invariant.csv written");
    {
        auto j = nlohmann::json::parse(slurp(dir / "invariant.json"));
        double gamma = j["gamma"].get<double>();
        check(std::abs(gamma - 1.0 / (std::log(5.0 / 3.0) + 0.1)) < 1e-7,
              "invariant gamma value");
        auto man = nlohmann::json::parse(slurp(dir / "invariant.manifest.json"));
        check(man.contains("config_hash") && man["config"]["alpha"] == 1.0,
              "invariant manifest embeds config and hash");
    }

    // volterra-check
    check(run(mfh + out + " volterra-check --alpha 1 --horizon 5 --dt 0.001 > " +
              (dir / "vol.out").string()) == 0,
          "volterra-check exits 0");
    {
        auto j = nlohmann::json::parse(slurp(dir / "volterra.json"));
        check(j["residual_mass"].get<double>() < 1e-4, "volterra residual under tolerance");
        check(count_lines(dir / "volterra.csv") == 5002, "volterra.csv row count");
    }

    // stability (single alpha, toy)
    check(run(mfh + out + " stability --model toy --beta 0.1 --m 1.5 --alpha 1 > " +
              (dir / "stab.out").string()) == 0,
          "stability exits 0");
    {
        auto j = nlohmann::json::parse(slurp(dir / "stability.json"));
        check(j["verdict"] == "Stable", "toy alpha=1 verdict is Stable");
        check(j["lambda_star"].get<double>() > 0.0, "lambda_star positive");
    }

    // hopf-curve (both flavors)
    check(run(mfh + out + " hopf-curve --omega 1 --samples 200") == 0, "hopf-curve exits 0");
    check(count_lines(dir / "hopf_curve.csv") > 100, "hopf_curve.csv populated");
    check(run(mfh + out + " hopf-curve --fixed-m 1.5 --samples 24 --ymax 20") == 0,
          "hopf-curve fixed-m exits 0");
    check(count_lines(dir / "hopf_curve_fixed_m.csv") > 3, "fixed-m csv populated");

    // bifurcation-point
    check(run(mfh + out + " bifurcation-point --omega0 1 --eps0 0.05 > " +
              (dir / "bif.out").string()) == 0,
          "bifurcation-point exits 0");
    {
        auto j = nlohmann::json::parse(slurp(dir / "bifurcation_point.json"));
        check(j["checks"]["nonresonance"] == true, "nonresonance check recorded");
        check(std::abs(j["y0"].get<double>() - 5.9690260418206066) < 1e-9, "y0 value");
    }

    // branch (tiny run)
    check(run(mfh + out + " branch --omega0 1 --eps0 0.05 --vmax 0.004 --vstep 0.002 "
                          "--nodes 512 > " +
              (dir / "branch.out").string()) == 0,
          "branch exits 0");
    check(count_lines(dir / "branch.csv") == 3, "branch.csv rows");
    check(fs::exists(dir / "branch_profile.csv"), "branch profile written");

    // simulate (small) + config file with flag override
    {
        std::ofstream cfg(dir / "sim.json");
        cfg << R"({"model": {"kind": "toy", "beta": 0.1, "m": 1.5},
                   "N": 500, "J": 0.2, "t_end": 3.0, "seed": 9})";
    }
    check(run(mfh + out + " --config " + (dir / "sim.json").string() +
              " simulate --seed 11 > " + (dir / "sim.out").string()) == 0,
          "simulate with config exits 0");
    {
        auto man = nlohmann::json::parse(slurp(dir / "simulate.manifest.json"));
        check(man["config"]["N"] == 500, "config value honored");
        check(man["config"]["seed"] == 11, "flag overrides config");
        check(count_lines(dir / "rate.csv") == 61, "rate.csv rows");
        check(fs::exists(dir / "raster.csv"), "raster.csv written");
    }

    // error paths: config error -> 1, numeric error -> 2
    int rc_cfg = run(mfh + out + " simulate --init bogus:3 2> /dev/null");
    check(WEXITSTATUS(rc_cfg) == 1, "config error exits 1");
    int rc_num = run(mfh + out + " invariant --model toy --beta 0.1 --m 1.5 --alpha -1 "
                                 "2> /dev/null");
    check(WEXITSTATUS(rc_num) == 2, "numeric error exits 2");

    std::printf("%s (%d failures)\n", g_failures == 0 ? "CLI suite passed" : "CLI suite FAILED",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
