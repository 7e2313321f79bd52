#pragma once

#include <optional>
#include <vector>

#include "mfh/hopf.hpp"
#include "mfh/kernels.hpp"
#include "mfh/spectral.hpp"

namespace mfh {

// ---------------------------------------------------------------------------
// phase Markov chain
// ---------------------------------------------------------------------------

struct PhaseChainSolution {
    std::vector<double> pi;   // invariant spike-phase density on [0, 2 pi)
    double c = 0.0;           // expected revolutions per spike
    double c_variation = 0.0; // max_t deviation of tau H^{2pi}(pi) from c
    std::vector<double> rho;  // asymptotic rate pi / c
    double doeblin_delta = 0.0;
    int power_iterations = 0;
    double tv_increment = 0.0;
};

// Power iteration of the periodized first-jump operator until the total
// variation increment drops below tv_tol. The kernel must be strictly
// positive (Doeblin); convergence is geometric at rate (1 - delta 2 pi).
PhaseChainSolution phase_invariant_measure(const PhaseOperators& ops,
                                           const std::vector<double>* warm_start = nullptr,
                                           double tv_tol = 1e-12,
                                           double c_const_tol = 1e-8);

// ---------------------------------------------------------------------------
// asymptotic periodic rate
// ---------------------------------------------------------------------------

struct AsymptoticRate {
    PhaseChainSolution chain;
    double volterra_gap = -1.0;  // sup gap vs the long transient run (if validated)
};

struct AsymptoticRateOptions {
    int nodes = 2048;
    Exec exec = Exec::Parallel;
    bool validate_against_volterra = false;
    double validate_tol = 1e-4;
    int validate_periods = 8;
};

AsymptoticRate asymptotic_rate(const ModelSpec& model, const PeriodicCurrent& current,
                               const AsymptoticRateOptions& opts = {});

// ---------------------------------------------------------------------------
// periodic densities
// ---------------------------------------------------------------------------

// beta^a_t(x): the start time s <= t with phi_{t,s}(0) = x, by bisection on
// the strictly decreasing s -> phi map (natural time).
double inverse_flow(const ModelSpec& model, const PeriodicCurrent& current, double t,
                    double x, double window);

struct PeriodicDensity {
    std::vector<double> phases;  // in [0, 2 pi)
    // per phase: parametric samples (x, density), x ascending
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> density;
    std::vector<double> sigma_t;  // support end per phase
    std::vector<double> mass;     // int density dx
    std::vector<double> f_mass;   // int f density dx
};

// Density of the unique periodic solution driven by (current, tau), sampled
// through the inverse flow; rho must come from the matching phase chain.
PeriodicDensity periodic_density(const ModelSpec& model, const PeriodicCurrent& current,
                                 const std::vector<double>& rho, int n_phases = 16,
                                 int nodes_per_period = 1024);

// ---------------------------------------------------------------------------
// linearization of the self-consistency map
// ---------------------------------------------------------------------------

// Applies h -> h - J(alpha) Theta_{alpha,tau} * h mode-wise on the 2 pi grid.
std::vector<double> linearized_G_apply(const ModelSpec& model, double alpha, double tau,
                                       const std::vector<double>& h);

// ---------------------------------------------------------------------------
// self-consistent periodic branch
// ---------------------------------------------------------------------------

struct BranchPoint {
    double v = 0.0;
    double alpha = 0.0;
    double tau = 0.0;
    double residual = 0.0;        // sup norm of G on the grid
    double tail_mode64 = 0.0;     // |mode 64 coefficient| of G
    std::vector<double> h_cos, h_sin;  // modes 1..n_modes
    std::vector<double> rho;      // asymptotic rate at the solution
    int newton_iterations = 0;
};

struct BranchOptions {
    int nodes = 1024;
    int n_modes = 32;
    int max_newton = 30;
    double residual_tol = 1e-9;   // projected-residual stop
    double v_cap = 0.05;
    Exec exec = Exec::Parallel;
};

// Newton continuation of G(h, alpha, tau) = 0 in the truncated Fourier basis,
// with the first-harmonic normalization (cos coefficient = v, sin = 0) fixing
// the phase. Jacobian: mode-wise symbol blocks for h, finite-difference
// columns for (alpha, tau).
BranchPoint solve_selfconsistent_branch(const BifurcationPoint& point, double v,
                                        const BranchOptions& opts = {},
                                        const BranchPoint* warm = nullptr);

std::vector<BranchPoint> trace_branch(const BifurcationPoint& point, double v_max,
                                      double v_step, const BranchOptions& opts = {});

// One evaluation of G (and the chain) at explicit (h, alpha, tau); used by
// tests and the finite-difference Jacobian columns.
struct GEvaluation {
    std::vector<double> G;    // on the phase grid
    std::vector<double> rho;
    std::vector<double> pi;
    double c = 0.0;
};

GEvaluation evaluate_G(const ModelSpec& model, double alpha, double tau,
                       const std::vector<double>& h_cos, const std::vector<double>& h_sin,
                       int nodes, Exec exec, const std::vector<double>* warm_pi = nullptr);

}  // namespace mfh
