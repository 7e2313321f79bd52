// mfh: mean-field spiking-network toolkit.
//
// Subcommands: simulate | invariant | stability | hopf-curve |
// bifurcation-point | branch | volterra-check. Each command accepts a JSON
// config (--config) whose values are overridden by explicitly given flags,
// writes its data files into --out-dir (default $MFH_OUT_DIR or cwd) and a
// manifest with the resolved configuration and its hash.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mfh/hopf.hpp"
#include "mfh/invariant.hpp"
#include "mfh/io.hpp"
#include "mfh/kernels.hpp"
#include "mfh/particle.hpp"
#include "mfh/periodic.hpp"
#include "mfh/spectral.hpp"
#include "mfh/volterra.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using mfh::Json;

struct ModelFlags {
    std::string kind = "toy";
    double beta = 0.1;
    double m = 1.5;
    double p = 10.0;
    double b0 = 2.0;
    double b1 = -2.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", kind, "model kind: toy | poly")
            ->check(CLI::IsMember({"toy", "poly", "poly10"}));
        cmd->add_option("--beta", beta, "step-rate time constant (toy)");
        cmd->add_option("--m", m, "drift plateau (toy: b = m - x)");
        cmd->add_option("--p", p, "rate exponent (poly: f = x^p)");
        cmd->add_option("--b0", b0, "affine drift constant term (poly)");
        cmd->add_option("--b1", b1, "affine drift slope (poly)");
    }

    void from_json(const Json& j, const CLI::App* cmd) {
        auto want = [&](const char* flag, const char* key) {
            return j.contains(key) && cmd->get_option(flag)->count() == 0;
        };
        if (want("--model", "kind")) kind = j["kind"].get<std::string>();
        if (want("--beta", "beta")) beta = j["beta"].get<double>();
        if (want("--m", "m")) m = j["m"].get<double>();
        if (want("--p", "p")) p = j["p"].get<double>();
        if (want("--b0", "b0")) b0 = j["b0"].get<double>();
        if (want("--b1", "b1")) b1 = j["b1"].get<double>();
    }

    mfh::ModelSpec build() const {
        if (kind == "toy") return mfh::ModelSpec::toy(beta, m);
        if (kind == "poly10") return mfh::ModelSpec::poly(10.0, b0, b1);
        return mfh::ModelSpec::poly(p, b0, b1);
    }

    Json to_json() const {
        Json j;
        j["kind"] = kind;
        if (kind == "toy") {
            j["beta"] = beta;
            j["m"] = m;
        } else {
            j["p"] = (kind == "poly10") ? 10.0 : p;
            j["drift"] = {{"affine", {b0, b1}}};
        }
        return j;
    }
};

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    std::ifstream is(path);
    if (!is) throw mfh::ConfigError("cannot read config file: " + path);
    Json j;
    is >> j;
    return j;
}

int run_simulate(const ModelFlags& mf, const mfh::SimConfig& cfg, const std::string& init,
                 const std::string& out_dir) {
    mfh::ModelSpec model = mf.build();
    mfh::SimOutput out = mfh::simulate(model, cfg);

    auto dir = mfh::resolve_out_dir(out_dir);
    {
        mfh::CsvWriter rate(dir / "rate.csv", {"t", "rate"});
        for (std::size_t i = 0; i < out.rate_series.size(); ++i)
            rate.row({out.bin_time[i], out.rate_series[i]});
    }
    {
        mfh::CsvWriter raster(dir / "raster.csv", {"neuron", "time"});
        for (const auto& e : out.raster) raster.row_mixed(e.neuron, e.time);
    }
    Json cfgj;
    cfgj["model"] = mf.to_json();
    cfgj["N"] = cfg.N;
    cfgj["J"] = cfg.J;
    cfgj["t_end"] = cfg.t_end;
    cfgj["dt_bin"] = cfg.dt_bin;
    cfgj["seed"] = cfg.seed;
    cfgj["init"] = init;
    cfgj["thinning_cap"] = cfg.thinning_cap;
    mfh::write_manifest(dir, "simulate", cfgj, {"rate.csv", "raster.csv"});

    std::cout << "spikes=" << out.total_spikes << " steps=" << out.steps
              << " mean_dt=" << mfh::format_g17(out.mean_dt)
              << " dominant_freq=" << mfh::format_g17(out.dominant_freq)
              << " snr=" << mfh::format_g17(out.snr)
              << " oscillating=" << (out.oscillation_flag ? "yes" : "no") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field spiking-network toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file (flags win)")
        ->expected(1);
    app.add_option("--out-dir", out_dir, "output directory (default $MFH_OUT_DIR)");
    app.add_option("--threads", threads, "worker threads (default: machine parallelism)");

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "particle-system Monte Carlo run");
    ModelFlags sim_model;
    sim_model.attach(sim);
    mfh::SimConfig sim_cfg;
    std::string sim_init = "uniform01";
    sim->add_option("--N", sim_cfg.N, "number of neurons");
    sim->add_option("--J", sim_cfg.J, "coupling strength");
    sim->add_option("--tend", sim_cfg.t_end, "simulated time");
    sim->add_option("--dtbin", sim_cfg.dt_bin, "rate-series bin width");
    sim->add_option("--seed", sim_cfg.seed, "RNG seed");
    sim->add_option("--init", sim_init, "uniform01 | point:<x> | invariant:<alpha> | zero-rate")
        ->expected(1);
    sim->add_option("--raster-neurons", sim_cfg.raster_neurons, "raster id cap");

    // ---- invariant ----
    auto* inv = app.add_subcommand("invariant", "invariant measure and J(alpha)");
    ModelFlags inv_model;
    inv_model.attach(inv);
    double inv_alpha = 1.0;
    inv->add_option("--alpha", inv_alpha, "constant current");

    // ---- stability ----
    auto* stab = app.add_subcommand("stability", "spectral stability verdict");
    ModelFlags stab_model;
    stab_model.attach(stab);
    double stab_alpha = 1.0, stab_alpha_max = 0.0;
    int stab_grid = 0;
    double stab_J = -1.0;
    stab->add_option("--alpha", stab_alpha, "constant current");
    stab->add_option("--alpha-max", stab_alpha_max, "sweep upper bound");
    stab->add_option("--grid", stab_grid, "sweep point count");
    stab->add_option("--J", stab_J, "solve alpha from this coupling first");

    // ---- hopf-curve ----
    auto* curve = app.add_subcommand("hopf-curve", "imaginary-root curve data");
    double curve_omega = 1.0, curve_ymax = 15.5 * std::numbers::pi;
    int curve_samples = 2000;
    double curve_fixed_m = 0.0;
    curve->add_option("--omega", curve_omega, "omega parameter");
    curve->add_option("--ymax", curve_ymax, "largest y");
    curve->add_option("--samples", curve_samples, "sample count");
    curve->add_option("--fixed-m", curve_fixed_m, "replot at fixed m in the (beta, J) plane");

    // ---- bifurcation-point ----
    auto* bif = app.add_subcommand("bifurcation-point", "construct and check a Hopf point");
    double bif_omega0 = 1.0, bif_eps0 = 0.05;
    bif->add_option("--omega0", bif_omega0, "omega at the point");
    bif->add_option("--eps0", bif_eps0, "detuning parameter");

    // ---- branch ----
    auto* branch = app.add_subcommand("branch", "trace the periodic branch");
    double br_omega0 = 1.0, br_eps0 = 0.05, br_vmax = 0.02, br_vstep = 0.002;
    int br_nodes = 1024;
    branch->add_option("--omega0", br_omega0, "omega at the point");
    branch->add_option("--eps0", br_eps0, "detuning parameter");
    branch->add_option("--vmax", br_vmax, "largest amplitude");
    branch->add_option("--vstep", br_vstep, "amplitude step");
    branch->add_option("--nodes", br_nodes, "phase nodes");

    // ---- volterra-check ----
    auto* vol = app.add_subcommand("volterra-check", "renewal solve and mass identity");
    ModelFlags vol_model;
    vol_model.attach(vol);
    double vol_alpha = 1.0, vol_horizon = 20.0, vol_dt = 1e-3;
    vol->add_option("--alpha", vol_alpha, "constant current");
    vol->add_option("--horizon", vol_horizon, "solve horizon");
    vol->add_option("--dt", vol_dt, "grid step");

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        Json file_cfg = load_config(config_path);

        if (sim->parsed()) {
            if (file_cfg.contains("model")) sim_model.from_json(file_cfg["model"], sim);
            auto pick = [&](const char* flag, const char* key, auto& slot) {
                if (file_cfg.contains(key) && sim->get_option(flag)->count() == 0)
                    slot = file_cfg[key].get<std::decay_t<decltype(slot)>>();
            };
            pick("--N", "N", sim_cfg.N);
            pick("--J", "J", sim_cfg.J);
            pick("--tend", "t_end", sim_cfg.t_end);
            pick("--dtbin", "dt_bin", sim_cfg.dt_bin);
            pick("--seed", "seed", sim_cfg.seed);
            pick("--init", "init", sim_init);

            if (sim_init == "uniform01") {
                sim_cfg.init = mfh::InitLaw::Uniform01;
            } else if (sim_init.rfind("point:", 0) == 0) {
                sim_cfg.init = mfh::InitLaw::PointMass;
                sim_cfg.init_value = std::stod(sim_init.substr(6));
            } else if (sim_init.rfind("invariant:", 0) == 0) {
                sim_cfg.init = mfh::InitLaw::InvariantAt;
                sim_cfg.init_value = std::stod(sim_init.substr(10));
            } else if (sim_init == "zero-rate") {
                // flow-only run: zero rate with the configured drift
                sim_cfg.init = mfh::InitLaw::Uniform01;
            } else {
                throw mfh::ConfigError("unknown init law: " + sim_init);
            }
            if (sim_init == "zero-rate") {
                mfh::ModelSpec base = sim_model.build();
                mfh::ModelSpec zero = base;
                zero.kind = mfh::RateKind::Custom;
                zero.custom_rate = [](double) { return 0.0; };
                zero.custom_rate_deriv = [](double) { return 0.0; };
                mfh::SimOutput out = mfh::simulate(zero, sim_cfg);
                auto dir = mfh::resolve_out_dir(out_dir);
                mfh::CsvWriter rate(dir / "rate.csv", {"t", "rate"});
                for (std::size_t i = 0; i < out.rate_series.size(); ++i)
                    rate.row({out.bin_time[i], out.rate_series[i]});
                std::cout << "spikes=" << out.total_spikes << "\n";
                return 0;
            }
            return run_simulate(sim_model, sim_cfg, sim_init, out_dir);
        }

        if (inv->parsed()) {
            mfh::ModelSpec model = inv_model.build();
            mfh::InvariantMeasure m = mfh::invariant_measure(model, inv_alpha);
            auto dir = mfh::resolve_out_dir(out_dir);
            {
                mfh::CsvWriter csv(dir / "invariant.csv", {"x", "density"});
                for (std::size_t i = 0; i < m.x.size(); ++i) csv.row({m.x[i], m.density[i]});
            }
            Json rep;
            rep["alpha"] = m.alpha;
            rep["gamma"] = m.gamma;
            rep["gamma_transform"] = m.gamma_transform;
            rep["J"] = m.J_of_alpha;
            rep["sigma"] = m.support_finite ? Json(m.support_end) : Json("inf");
            mfh::write_text_file(dir / "invariant.json", rep.dump(2) + "\n");
            Json cfgj;
            cfgj["model"] = inv_model.to_json();
            cfgj["alpha"] = inv_alpha;
            mfh::write_manifest(dir, "invariant", cfgj, {"invariant.csv", "invariant.json"});
            std::cout << rep.dump(2) << "\n";
            return 0;
        }

        if (stab->parsed()) {
            mfh::ModelSpec model = stab_model.build();
            auto dir = mfh::resolve_out_dir(out_dir);
            auto report_json = [](const mfh::SpectralReport& rep) {
                Json j;
                j["alpha"] = rep.alpha;
                j["J"] = rep.J_at_alpha;
                j["lambda_star"] = rep.lambda_star;
                j["verdict"] = rep.verdict == mfh::Stability::Stable     ? "Stable"
                               : rep.verdict == mfh::Stability::Unstable ? "Unstable"
                                                                         : "Marginal";
                Json roots = Json::array();
                for (auto z : rep.roots) roots.push_back({{"re", z.real()}, {"im", z.imag()}});
                j["roots"] = roots;
                return j;
            };
            Json cfgj;
            cfgj["model"] = stab_model.to_json();
            if (stab_grid > 1 && stab_alpha_max > stab_alpha) {
                mfh::CsvWriter csv(dir / "stability_sweep.csv",
                                   {"alpha", "J", "max_re", "lambda_star"});
                for (int i = 0; i < stab_grid; ++i) {
                    double a = stab_alpha +
                               (stab_alpha_max - stab_alpha) * i / (stab_grid - 1);
                    mfh::SpectralReport rep = mfh::stability_verdict(model, a);
                    double max_re = -1e300;
                    for (auto z : rep.roots) max_re = std::max(max_re, z.real());
                    if (rep.roots.empty()) max_re = -rep.lambda_star;
                    csv.row({a, rep.J_at_alpha, max_re, rep.lambda_star});
                }
                cfgj["alpha"] = stab_alpha;
                cfgj["alpha_max"] = stab_alpha_max;
                cfgj["grid"] = stab_grid;
                mfh::write_manifest(dir, "stability", cfgj, {"stability_sweep.csv"});
                return 0;
            }
            double a = stab_alpha;
            if (stab_J >= 0.0) {
                auto roots = mfh::solve_alpha_for_J(model, stab_J);
                a = roots.front();
            }
            mfh::SpectralReport rep = mfh::stability_verdict(model, a);
            Json j = report_json(rep);
            mfh::write_text_file(dir / "stability.json", j.dump(2) + "\n");
            cfgj["alpha"] = a;
            mfh::write_manifest(dir, "stability", cfgj, {"stability.json"});
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (curve->parsed()) {
            auto dir = mfh::resolve_out_dir(out_dir);
            Json cfgj;
            std::vector<std::string> outputs;
            if (curve_fixed_m > 1.0) {
                auto pts = mfh::imaginary_root_curve_fixed_m(curve_fixed_m, 0.1,
                                                             curve_ymax, curve_samples);
                mfh::CsvWriter csv(dir / "hopf_curve_fixed_m.csv",
                                   {"y", "beta", "alpha", "J"});
                for (const auto& p : pts) csv.row({p.y, p.beta, p.alpha, p.J});
                cfgj["fixed_m"] = curve_fixed_m;
                outputs.push_back("hopf_curve_fixed_m.csv");
            } else {
                auto pts = mfh::imaginary_root_curve_samples(curve_omega, 1e-3,
                                                             curve_ymax, curve_samples);
                mfh::CsvWriter csv(dir / "hopf_curve.csv", {"y", "beta0", "delta0"});
                for (const auto& p : pts) csv.row({p.y, p.beta0, p.delta0});
                cfgj["omega"] = curve_omega;
                outputs.push_back("hopf_curve.csv");
            }
            cfgj["ymax"] = curve_ymax;
            cfgj["samples"] = curve_samples;
            mfh::write_manifest(dir, "hopf-curve", cfgj, outputs);
            return 0;
        }

        if (bif->parsed()) {
            mfh::BifurcationPoint p = mfh::construct_bifurcation_point(bif_omega0, bif_eps0);
            Json j;
            j["omega0"] = p.omega0;
            j["epsilon0"] = p.epsilon0;
            j["y0"] = p.y0;
            j["beta0"] = p.beta0;
            j["d0"] = p.d0;
            j["alpha0"] = p.alpha0;
            j["m0"] = p.m0;
            j["tau0"] = p.tau0;
            j["dU_dz"] = {{"re", p.dU_dz.real()}, {"im", p.dU_dz.imag()}};
            j["Z0_prime"] = {{"re", p.Z0_prime.real()}, {"im", p.Z0_prime.imag()}};
            j["checks"] = {{"simple_root", p.check_simple_root},
                           {"nonresonance", p.check_nonresonance},
                           {"transversality", p.check_transversality}};
            j["nonresonance_min_gap"] = p.nonresonance_min_gap;
            auto dir = mfh::resolve_out_dir(out_dir);
            mfh::write_text_file(dir / "bifurcation_point.json", j.dump(2) + "\n");
            Json cfgj;
            cfgj["omega0"] = bif_omega0;
            cfgj["eps0"] = bif_eps0;
            mfh::write_manifest(dir, "bifurcation-point", cfgj, {"bifurcation_point.json"});
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (branch->parsed()) {
            mfh::BifurcationPoint p = mfh::construct_bifurcation_point(br_omega0, br_eps0);
            mfh::BranchOptions opts;
            opts.nodes = br_nodes;
            auto pts = mfh::trace_branch(p, br_vmax, br_vstep, opts);
            auto dir = mfh::resolve_out_dir(out_dir);
            Json summary = Json::array();
            {
                mfh::CsvWriter csv(dir / "branch.csv", {"v", "alpha", "tau", "residual"});
                for (const auto& b : pts) {
                    csv.row({b.v, b.alpha, b.tau, b.residual});
                    summary.push_back({{"v", b.v},
                                       {"alpha", b.alpha},
                                       {"tau", b.tau},
                                       {"residual", b.residual}});
                }
            }
            // per-point current and rate profiles for the largest amplitude
            if (!pts.empty()) {
                const auto& b = pts.back();
                mfh::CsvWriter csv(dir / "branch_profile.csv", {"t", "a_v", "rho"});
                auto n = b.rho.size();
                for (std::size_t i = 0; i < n; ++i) {
                    double t = mfh::kTwoPi * static_cast<double>(i) / static_cast<double>(n);
                    double h = 0.0;
                    for (std::size_t k = 0; k < b.h_cos.size(); ++k) {
                        double kk = static_cast<double>(k + 1);
                        h += b.h_cos[k] * std::cos(kk * t) + b.h_sin[k] * std::sin(kk * t);
                    }
                    csv.row({t, b.alpha + h, b.rho[i]});
                }
            }
            mfh::write_text_file(dir / "branch.json", summary.dump(2) + "\n");
            Json cfgj;
            cfgj["omega0"] = br_omega0;
            cfgj["eps0"] = br_eps0;
            cfgj["vmax"] = br_vmax;
            cfgj["vstep"] = br_vstep;
            cfgj["nodes"] = br_nodes;
            mfh::write_manifest(dir, "branch", cfgj,
                                {"branch.csv", "branch.json", "branch_profile.csv"});
            std::cout << summary.dump(2) << "\n";
            return 0;
        }

        if (vol->parsed()) {
            mfh::ModelSpec model = vol_model.build();
            mfh::RenewalKernel kern = mfh::RenewalKernel::from_constant_current(model, vol_alpha);
            double gamma = model.is_toy()
                               ? 1.0 / (mfh::hitting_time(mfh::ToyParams(model.beta, model.toy_m(), vol_alpha), 0.0) + model.beta)
                               : mfh::stationary_gamma(model, vol_alpha);
            mfh::RateSolution sol = mfh::solve_rate(kern, vol_horizon, vol_dt, 1e-4, gamma);
            auto dir = mfh::resolve_out_dir(out_dir);
            {
                mfh::CsvWriter csv(dir / "volterra.csv", {"t", "r", "xi"});
                for (std::size_t i = 0; i < sol.r.size(); ++i)
                    csv.row({sol.t[i], sol.r[i], sol.xi.empty() ? 0.0 : sol.xi[i]});
            }
            Json j;
            j["residual_mass"] = sol.residual_mass;
            j["gamma"] = gamma;
            j["r_end"] = sol.r.back();
            mfh::write_text_file(dir / "volterra.json", j.dump(2) + "\n");
            Json cfgj;
            cfgj["model"] = vol_model.to_json();
            cfgj["alpha"] = vol_alpha;
            cfgj["horizon"] = vol_horizon;
            cfgj["dt"] = vol_dt;
            mfh::write_manifest(dir, "volterra-check", cfgj, {"volterra.csv", "volterra.json"});
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const mfh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const mfh::Error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
