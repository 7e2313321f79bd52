#include "mfh/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "mfh/invariant.hpp"
#include "mfh/volterra.hpp"

namespace mfh {

// ---------------------------------------------------------------------------
// phase chain
// ---------------------------------------------------------------------------

PhaseChainSolution phase_invariant_measure(const PhaseOperators& ops,
                                           const std::vector<double>* warm_start,
                                           double tv_tol, double c_const_tol) {
    const int n = ops.n;
    const double delta = kTwoPi / n;
    if (!(ops.doeblin_delta > 0.0))
        throw DoeblinFailure("phase kernel lower bound is not positive: " +
                             std::to_string(ops.doeblin_delta));

    PhaseChainSolution sol;
    std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / kTwoPi);
    if (warm_start && static_cast<int>(warm_start->size()) == n) pi = *warm_start;
    std::vector<double> next;
    const int max_iter = 500000;
    int it = 0;
    double tv = 1e300;
    for (; it < max_iter; ++it) {
        ops.apply_K(pi, next);
        double mass = 0.0;
        for (double v : next) mass += v;
        mass *= delta;
        if (!(mass > 0.0)) throw DoeblinFailure("power iteration lost positivity");
        for (double& v : next) v /= mass;
        tv = 0.0;
        for (int i = 0; i < n; ++i) tv += std::abs(next[i] - pi[i]);
        tv *= 0.5 * delta;
        pi.swap(next);
        if (tv < tv_tol) break;
    }
    sol.power_iterations = it + 1;
    sol.tv_increment = tv;
    sol.pi = pi;
    sol.doeblin_delta = ops.doeblin_delta;

    std::vector<double> Hpi;
    ops.apply_H(pi, Hpi);
    double c_lo = 1e300, c_hi = -1e300, c_sum = 0.0;
    for (double v : Hpi) {
        double ci = ops.tau * v;
        c_lo = std::min(c_lo, ci);
        c_hi = std::max(c_hi, ci);
        c_sum += ci;
    }
    sol.c = c_sum / n;
    sol.c_variation = c_hi - c_lo;
    if (sol.c_variation > c_const_tol * std::max(1.0, std::abs(sol.c)))
        throw NumericError("phase chain: c(t) failed the constancy check, variation " +
                           std::to_string(sol.c_variation));
    sol.rho.resize(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) sol.rho[i] = pi[i] / sol.c;
    return sol;
}

// ---------------------------------------------------------------------------
// asymptotic rate
// ---------------------------------------------------------------------------

AsymptoticRate asymptotic_rate(const ModelSpec& model, const PeriodicCurrent& current,
                               const AsymptoticRateOptions& opts) {
    KernelGrid grid = KernelGrid::build(model, current, opts.nodes, opts.exec);
    PhaseOperators ops = assemble_phase_operators(grid, opts.exec);
    AsymptoticRate out;
    out.chain = phase_invariant_measure(ops);

    if (opts.validate_against_volterra) {
        // transient run started validate_periods in the past, cold start,
        // marched on a finer grid than the chain
        const int n = opts.nodes;
        const int refine = 4;
        const double dt = kTwoPi / n / refine;
        TwoTimeKernel kern;
        kern.K = [&](double t, double s) { return grid.K(t, s); };
        kern.jump_s = [&](double t) {
            if (!grid.step_rate()) return std::nan("");
            // s with t - s = ustar(s)
            double s = t - grid.crossing_lag_node(0);
            for (int k = 0; k < 12; ++k)
                s = t - grid.crossing_lag(s - kTwoPi * std::floor(s / kTwoPi));
            return s;
        };
        double s0 = -kTwoPi * opts.validate_periods;
        if (grid.step_rate()) {
            double first = s0 + grid.crossing_lag(s0 - kTwoPi * std::floor(s0 / kTwoPi));
            kern.value_breaks = {first};
        }
        std::vector<double> r =
            solve_rate_two_time(kern, s0, kTwoPi, dt, grid.lag_horizon());
        // compare the last period with rho at the chain nodes
        double gap = 0.0;
        auto total = static_cast<std::size_t>(std::llround(-s0 / dt));
        for (int i = 0; i < n; ++i) {
            double rv = r[total + static_cast<std::size_t>(i) * refine];
            gap = std::max(gap, std::abs(rv - out.chain.rho[static_cast<std::size_t>(i)]));
        }
        out.volterra_gap = gap;
        if (gap > opts.validate_tol)
            throw NumericError("asymptotic_rate: transient cross-check gap " +
                               std::to_string(gap));
    }
    return out;
}

// ---------------------------------------------------------------------------
// periodic densities
// ---------------------------------------------------------------------------

double inverse_flow(const ModelSpec& model, const PeriodicCurrent& current, double t,
                    double x, double window) {
    if (x < 0.0) throw DomainViolation("inverse_flow: x must be >= 0");
    if (x == 0.0) return t;
    double lo = t - window, hi = t;
    double flo = flow(model, current, t, lo, 0.0);
    if (flo <= x)
        throw InverseFlowFailure("x is not reached within the window (x >= sigma_a(t)?)");
    // phi_{t,s}(0) decreases in s: bisect
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = flow(model, current, t, mid, 0.0);
        if (v > x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

PeriodicDensity periodic_density(const ModelSpec& model, const PeriodicCurrent& current,
                                 const std::vector<double>& rho, int n_phases,
                                 int nodes_per_period) {
    const auto n_rho = static_cast<int>(rho.size());
    if (n_rho < 8) throw ConfigError("periodic_density: rho grid too small");
    const double tau = current.tau();
    DecayCertificate cert = certify_decay(model, current);
    // lag window covering both the kernel decay and the flow's relaxation to
    // the support edge; the density behaves like (sigma - x)^{p_edge - 1}
    // there, so the unswept tail mass shrinks like e^{-w p_edge relax_rate}
    double relax_rate = std::max(std::abs(model.drift_deriv(cert.lambda0)), 1e-2);
    double p_edge = std::max(cert.f_lambda0 / relax_rate, 0.5);
    double w_relax = (25.0 / p_edge + std::log(2.0 + cert.lambda0)) / relax_rate;
    double window = (cert.s0 + 38.0 / cert.f_lambda0 + w_relax) / tau;
    int periods = static_cast<int>(std::ceil(window / kTwoPi));

    auto rho_at = [&](double phase) {
        phase -= kTwoPi * std::floor(phase / kTwoPi);
        double pos = phase / kTwoPi * n_rho;
        int j = static_cast<int>(pos) % n_rho;
        double w = pos - std::floor(pos);
        return rho[j] * (1.0 - w) + rho[(j + 1) % n_rho] * w;
    };
    auto a_at = [&](double phase) {
        return current.mean() + (current.is_constant() ? 0.0 : current.profile(phase));
    };

    PeriodicDensity out;
    out.phases.resize(n_phases);
    out.x.resize(n_phases);
    out.density.resize(n_phases);
    out.sigma_t.resize(n_phases);
    out.mass.resize(n_phases);
    out.f_mass.resize(n_phases);

    const int n_s = periods * nodes_per_period;
    const double ds = kTwoPi * periods / n_s;
    const int substeps = 4;
    const double h = ds / substeps;
    const double b0 = model.drift(0.0);

    for (int ip = 0; ip < n_phases; ++ip) {
        double t = kTwoPi * ip / n_phases;
        out.phases[ip] = t;

        // integrate one trajectory from start s forward to t, returning the
        // flow value and the density factor
        auto run_traj = [&](double s, double* x_out, double* dens_out) {
            double phi = 0.0, A = 0.0, B = 0.0;
            bool crossed = model.kind != RateKind::ToyStepRate;
            double crossing = s;
            double u = s;
            double span = t - s;
            auto nfull = static_cast<long long>(std::floor(span / h + 1e-12));
            double h_last = span - static_cast<double>(nfull) * h;
            for (long long step = 0; step <= nfull; ++step) {
                double hh = (step == nfull) ? h_last : h;
                if (hh < 1e-14) continue;
                auto rhs = [&](double tt, double y) { return tau * (model.drift(y) + a_at(tt)); };
                double k1 = rhs(u, phi);
                double k2 = rhs(u + 0.5 * hh, phi + 0.5 * hh * k1);
                double k3 = rhs(u + 0.5 * hh, phi + 0.5 * hh * k2);
                double k4 = rhs(u + hh, phi + hh * k3);
                double mid = phi + 0.5 * hh * k2;
                double phi1 = phi + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
                if (model.kind == RateKind::ToyStepRate) {
                    if (!crossed && phi1 >= 1.0) {
                        double d1 = rhs(u + hh, phi1);
                        double off =
                            (phi >= 1.0) ? 0.0 : hermite_crossing(hh, phi, k1, phi1, d1, 1.0);
                        crossed = true;
                        crossing = u + off;
                    }
                } else {
                    A += tau * hh / 6.0 *
                         (model.rate(phi) + 4.0 * model.rate(mid) + model.rate(phi1));
                }
                B += tau * hh / 6.0 *
                     (model.drift_deriv(phi) + 4.0 * model.drift_deriv(mid) +
                      model.drift_deriv(phi1));
                phi = phi1;
                u += hh;
            }
            if (model.kind == RateKind::ToyStepRate && crossed)
                A = tau / model.beta * (t - crossing);
            *x_out = phi;
            *dens_out = rho_at(s) / (b0 + a_at(s)) * std::exp(-(A + B));
        };

        std::vector<double>& xs = out.x[ip];
        std::vector<double>& ds_out = out.density[ip];
        xs.clear();
        ds_out.clear();
        xs.reserve(n_s + 2);
        ds_out.reserve(n_s + 2);
        for (int m = n_s; m >= 0; --m) {
            // starts aligned to the integration lattice so the RK4 steps land
            // exactly on t
            double s = t - ds * m;
            double x, dens;
            run_traj(s, &x, &dens);
            xs.push_back(x);
            ds_out.push_back(dens);
        }
        std::reverse(xs.begin(), xs.end());
        std::reverse(ds_out.begin(), ds_out.end());

        // the step rate kinks the density at the threshold: insert the exact
        // crossing sample so every quadrature cell is smooth
        if (model.has_rate_jump()) {
            const double xj = model.rate_jump_at();
            for (std::size_t m = 0; m + 1 < xs.size(); ++m) {
                if (!(xs[m] < xj && xs[m + 1] > xj)) continue;
                // sample index m came from the start s = t - ds m
                double s_lo = t - ds * static_cast<double>(m + 1);
                double s_hi = s_lo + ds;
                double xa, da;
                for (int it2 = 0; it2 < 40; ++it2) {
                    double smid = 0.5 * (s_lo + s_hi);
                    run_traj(smid, &xa, &da);
                    if (xa > xj)
                        s_lo = smid;
                    else
                        s_hi = smid;
                }
                run_traj(0.5 * (s_lo + s_hi), &xa, &da);
                xs.insert(xs.begin() + static_cast<std::ptrdiff_t>(m) + 1, xa);
                ds_out.insert(ds_out.begin() + static_cast<std::ptrdiff_t>(m) + 1, da);
                break;
            }
        }

        // parametric samples with x ascending
        out.sigma_t[ip] = xs.back();
        double mass = 0.0, fmass = 0.0;
        const double xj = model.has_rate_jump() ? model.rate_jump_at() : 0.0;
        for (std::size_t m = 0; m + 1 < xs.size(); ++m) {
            double x0 = xs[m], x1 = xs[m + 1];
            double d0 = ds_out[m], d1 = ds_out[m + 1];
            double dx = x1 - x0;
            mass += 0.5 * dx * (d0 + d1);
            double f0 = model.rate(x0), f1 = model.rate(x1);
            if (model.has_rate_jump()) {
                // one-sided rate limits when a cell endpoint sits on the jump
                if (std::abs(x1 - xj) < 1e-9 && x0 < xj)
                    f1 = model.rate(std::nextafter(xj, 0.0));
                if (std::abs(x0 - xj) < 1e-9 && x1 > xj) f0 = model.rate(xj);
            }
            fmass += 0.5 * dx * (f0 * d0 + f1 * d1);
        }
        out.mass[ip] = mass;
        out.f_mass[ip] = fmass;
    }
    return out;
}

// ---------------------------------------------------------------------------
// linearized G
// ---------------------------------------------------------------------------

std::vector<double> linearized_G_apply(const ModelSpec& model, double alpha, double tau,
                                       const std::vector<double>& h) {
    const std::size_t N = h.size();
    TransformContext ctx(model, alpha);
    const std::size_t modes = N / 3;
    FourierCoeffs coeffs = fourier_analyze(h, modes);
    if (std::abs(coeffs.mean) > 1e-9 * (1.0 + std::abs(h[0])))
        throw DomainViolation("linearized_G_apply: input must have zero mean");
    std::vector<double> out(N, 0.0);
    for (std::size_t m = 1; m <= modes; ++m) {
        double a = coeffs.cosc[m - 1], b = coeffs.sinc[m - 1];
        if (a == 0.0 && b == 0.0) continue;
        Complex S = ctx.stability_function(Complex(0.0, static_cast<double>(m) / tau));
        Complex amp(a, -b);
        Complex res = amp * S;
        for (std::size_t i = 0; i < N; ++i) {
            double mt = kTwoPi * static_cast<double>(m * i % N) / static_cast<double>(N);
            out[i] += res.real() * std::cos(mt) - res.imag() * std::sin(mt);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// branch machinery
// ---------------------------------------------------------------------------

namespace {

// Direct solve of (I - K) pi = 0 with the mass normalization replacing one
// row; machine-exact invariant density for the Newton loop, where the plain
// power iteration would need thousands of sweeps per evaluation.
PhaseChainSolution chain_by_direct_solve(const PhaseOperators& ops) {
    const int n = ops.n;
    const double delta = kTwoPi / n;
    std::vector<double> A(static_cast<std::size_t>(n) * n);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A[static_cast<std::size_t>(i) * n + j] =
                (i == j ? 1.0 : 0.0) - ops.K[static_cast<std::size_t>(i) * n + j];
    for (int j = 0; j < n; ++j) A[0 * static_cast<std::size_t>(n) + j] = delta;
    rhs[0] = 1.0;
    lu_solve(A, rhs, static_cast<std::size_t>(n));

    PhaseChainSolution sol;
    sol.pi = std::move(rhs);
    sol.doeblin_delta = ops.doeblin_delta;
    std::vector<double> Hpi;
    ops.apply_H(sol.pi, Hpi);
    double c_lo = 1e300, c_hi = -1e300, c_sum = 0.0;
    for (double v : Hpi) {
        double ci = ops.tau * v;
        c_lo = std::min(c_lo, ci);
        c_hi = std::max(c_hi, ci);
        c_sum += ci;
    }
    sol.c = c_sum / n;
    sol.c_variation = c_hi - c_lo;
    sol.rho.resize(sol.pi.size());
    for (std::size_t i = 0; i < sol.pi.size(); ++i) sol.rho[i] = sol.pi[i] / sol.c;
    return sol;
}

}  // namespace

GEvaluation evaluate_G(const ModelSpec& model, double alpha, double tau,
                       const std::vector<double>& h_cos, const std::vector<double>& h_sin,
                       int nodes, Exec exec, const std::vector<double>* warm_pi) {
    (void)warm_pi;
    PeriodicCurrent current =
        PeriodicCurrent::from_harmonics(alpha, tau, h_cos, h_sin);
    KernelGrid grid = KernelGrid::build(model, current, nodes, exec);
    PhaseOperators ops = assemble_phase_operators(grid, exec, /*with_doeblin=*/false);
    PhaseChainSolution chain = chain_by_direct_solve(ops);

    double J = J_of_alpha(model, alpha);
    GEvaluation ev;
    ev.rho = chain.rho;
    ev.pi = chain.pi;
    ev.c = chain.c;
    ev.G.resize(chain.rho.size());
    const auto n = static_cast<int>(chain.rho.size());
    for (int i = 0; i < n; ++i) {
        double t = kTwoPi * i / n;
        double h = current.is_constant() ? 0.0 : current.profile(t);
        ev.G[static_cast<std::size_t>(i)] =
            alpha + h - J * chain.rho[static_cast<std::size_t>(i)];
    }
    return ev;
}

BranchPoint solve_selfconsistent_branch(const BifurcationPoint& point, double v,
                                        const BranchOptions& opts, const BranchPoint* warm) {
    if (std::abs(v) > opts.v_cap)
        throw ConfigError("solve_selfconsistent_branch: |v| exceeds the amplitude cap");
    ModelSpec model = ModelSpec::toy(point.beta0, point.m0);
    const int M = opts.n_modes;

    BranchPoint bp;
    bp.v = v;
    bp.alpha = warm ? warm->alpha : point.alpha0;
    bp.tau = warm ? warm->tau : point.tau0;
    bp.h_cos.assign(static_cast<std::size_t>(M), 0.0);
    bp.h_sin.assign(static_cast<std::size_t>(M), 0.0);
    if (warm) {
        bp.h_cos = warm->h_cos;
        bp.h_sin = warm->h_sin;
        bp.h_cos.resize(static_cast<std::size_t>(M), 0.0);
        bp.h_sin.resize(static_cast<std::size_t>(M), 0.0);
    }
    bp.h_cos[0] = v;
    bp.h_sin[0] = 0.0;

    if (v == 0.0) {
        GEvaluation ev = evaluate_G(model, bp.alpha, bp.tau, bp.h_cos, bp.h_sin,
                                    opts.nodes, opts.exec);
        double sup = 0.0;
        for (double g : ev.G) sup = std::max(sup, std::abs(g));
        bp.residual = sup;
        bp.rho = ev.rho;
        return bp;
    }

    const std::size_t dim = 2 * static_cast<std::size_t>(M);  // alpha, tau, modes 2..M
    std::vector<double> R(dim, 0.0);
    std::vector<double> pi_warm;

    auto project = [&](const std::vector<double>& G, std::vector<double>& out) {
        FourierCoeffs c = fourier_analyze(G, static_cast<std::size_t>(M));
        for (int m = 1; m <= M; ++m) {
            out[2 * static_cast<std::size_t>(m) - 2] = c.cosc[static_cast<std::size_t>(m) - 1];
            out[2 * static_cast<std::size_t>(m) - 1] = c.sinc[static_cast<std::size_t>(m) - 1];
        }
    };

    auto eval_R = [&](std::vector<double>& out, GEvaluation* ev_out) {
        GEvaluation ev = evaluate_G(model, bp.alpha, bp.tau, bp.h_cos, bp.h_sin, opts.nodes,
                                    opts.exec, pi_warm.empty() ? nullptr : &pi_warm);
        pi_warm = ev.pi;
        project(ev.G, out);
        if (ev_out) *ev_out = std::move(ev);
    };

    GEvaluation ev;
    eval_R(R, &ev);
    double rnorm = 0.0;
    for (double x : R) rnorm = std::max(rnorm, std::abs(x));

    int it = 0;
    for (; it < opts.max_newton && rnorm > opts.residual_tol; ++it) {
        // Jacobian: analytic symbol blocks for the h modes, FD for alpha, tau
        std::vector<double> Jac(dim * dim, 0.0);
        TransformContext ctx(model, bp.alpha);
        for (int m = 1; m <= M; ++m) {
            Complex S = ctx.stability_function(Complex(0.0, m / bp.tau));
            auto row_a = 2 * static_cast<std::size_t>(m) - 2;
            auto row_b = 2 * static_cast<std::size_t>(m) - 1;
            if (m >= 2) {
                auto col_c = 2 * static_cast<std::size_t>(m) - 2;
                auto col_s = 2 * static_cast<std::size_t>(m) - 1;
                Jac[row_a * dim + col_c] = S.real();
                Jac[row_a * dim + col_s] = S.imag();
                Jac[row_b * dim + col_c] = -S.imag();
                Jac[row_b * dim + col_s] = S.real();
            }
        }
        // FD columns for alpha (col 0) and tau (col 1)
        const double da = 1e-6 * (1.0 + std::abs(bp.alpha));
        const double dtau = 1e-6 * bp.tau;
        std::vector<double> Rp(dim), Rm(dim);
        double save = bp.alpha;
        bp.alpha = save + da;
        eval_R(Rp, nullptr);
        bp.alpha = save - da;
        eval_R(Rm, nullptr);
        bp.alpha = save;
        for (std::size_t r = 0; r < dim; ++r) Jac[r * dim + 0] = (Rp[r] - Rm[r]) / (2 * da);
        save = bp.tau;
        bp.tau = save + dtau;
        eval_R(Rp, nullptr);
        bp.tau = save - dtau;
        eval_R(Rm, nullptr);
        bp.tau = save;
        for (std::size_t r = 0; r < dim; ++r) Jac[r * dim + 1] = (Rp[r] - Rm[r]) / (2 * dtau);

        std::vector<double> step = R;
        lu_solve(Jac, step, dim);

        // damped update
        double damp = 1.0;
        std::vector<double> R_new(dim);
        double best = rnorm;
        for (int half = 0; half < 8; ++half) {
            BranchPoint trial = bp;
            trial.alpha -= damp * step[0];
            trial.tau -= damp * step[1];
            for (int m = 2; m <= M; ++m) {
                trial.h_cos[static_cast<std::size_t>(m) - 1] -=
                    damp * step[2 * static_cast<std::size_t>(m) - 2];
                trial.h_sin[static_cast<std::size_t>(m) - 1] -=
                    damp * step[2 * static_cast<std::size_t>(m) - 1];
            }
            BranchPoint saved = bp;
            bp = trial;
            eval_R(R_new, &ev);
            double nn = 0.0;
            for (double x : R_new) nn = std::max(nn, std::abs(x));
            if (nn < best) {
                R = R_new;
                rnorm = nn;
                break;
            }
            bp = saved;
            damp *= 0.5;
            if (half == 7) throw NewtonDiverged("branch Newton: damping exhausted");
        }
    }
    if (rnorm > opts.residual_tol)
        throw NewtonDiverged("branch Newton: no convergence in " +
                             std::to_string(opts.max_newton) + " iterations");

    bp.newton_iterations = it;
    double sup = 0.0;
    for (double g : ev.G) sup = std::max(sup, std::abs(g));
    bp.residual = sup;
    bp.tail_mode64 = std::abs(fourier_mode(ev.G, 64));
    bp.rho = ev.rho;
    return bp;
}

std::vector<BranchPoint> trace_branch(const BifurcationPoint& point, double v_max,
                                      double v_step, const BranchOptions& opts) {
    std::vector<BranchPoint> branch;
    const BranchPoint* warm = nullptr;
    for (double v = v_step; v <= v_max + 1e-12; v += v_step) {
        branch.push_back(solve_selfconsistent_branch(point, v, opts, warm));
        warm = &branch.back();
    }
    return branch;
}

}  // namespace mfh
