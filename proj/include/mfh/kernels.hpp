#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mfh/current.hpp"
#include "mfh/flow.hpp"
#include "mfh/model.hpp"

namespace mfh {

enum class Exec { Serial, Parallel };

// ---------------------------------------------------------------------------
// pointwise kernels
// ---------------------------------------------------------------------------

// H^x_a(t,s) = exp(-int_s^t f(phi_{u,s}(x)) du), with the integration split at
// the step-rate threshold crossing so the step model is handled exactly.
double survival(const ModelSpec& model, const PeriodicCurrent& current, double t,
                double s, double x, const FlowOptions& opts = {});

// K^x_a(t,s) = f(phi_{t,s}(x)) H^x_a(t,s).
double first_jump_density(const ModelSpec& model, const PeriodicCurrent& current,
                          double t, double s, double x, const FlowOptions& opts = {});

// ---------------------------------------------------------------------------
// kernel decay certificate
// ---------------------------------------------------------------------------

// Lower flow bound: phi_{t,s}(0) >= lambda0 whenever t-s >= s0, for every
// current in the eta-ball around the mean. Gives the exponential envelope
// H(t,s) <= e^{-f(lambda0)(t-s-s0)} used to truncate periodizations and
// transform tails.
struct DecayCertificate {
    double lambda0 = 0.0;
    double f_lambda0 = 0.0;
    double s0 = 0.0;  // natural time units
};

DecayCertificate certify_decay(const ModelSpec& model, const PeriodicCurrent& current);

// ---------------------------------------------------------------------------
// discretized two-time kernels for one periodic problem
// ---------------------------------------------------------------------------

// Lag-sampled H and K for the time-rescaled problem on the 2*pi circle
// (drift and rate both scaled by tau). One trajectory per start phase; the
// step-rate model stores the threshold-crossing lag (plus its s-derivative)
// from which both kernels are exact, smooth models store the flow and the
// cumulative rate integral at lag nodes.
class KernelGrid {
  public:
    KernelGrid() = default;

    static KernelGrid build(const ModelSpec& model, const PeriodicCurrent& current,
                            int nodes_per_period, Exec exec = Exec::Parallel,
                            int substeps = 4);

    const ModelSpec& model() const { return model_; }
    const PeriodicCurrent& current() const { return current_; }
    double tau() const { return current_.tau(); }
    double period() const { return kTwoPi; }  // phase time
    int nodes() const { return n_; }
    double dt() const { return kTwoPi / n_; }
    int tail_periods() const { return periods_; }
    double decay_rate() const { return cert_.lambda0; }
    const DecayCertificate& certificate() const { return cert_; }
    double tail_bound() const { return tail_bound_; }
    bool step_rate() const { return toy_; }

    double node(int i) const { return dt() * i; }

    // kernel values at (t, s) in phase time, t >= s, t - s <= lag horizon
    double H(double t, double s) const;
    double K(double t, double s) const;

    // periodized kernels K^{2pi}(t,s) = sum_k K(t, s - 2*pi*k), likewise H
    double H_periodized(double t, double s) const;
    double K_periodized(double t, double s) const;

    // exact lag integral of K(., s_j): int_0^[horizon] K(s_j+u, s_j) du
    double column_mass(int j) const;

    // threshold-crossing lag of the trajectory started at phase s (step rate
    // only); Hermite interpolation of the per-node samples
    double crossing_lag(double s) const;
    double crossing_lag_node(int j) const { return ustar_[static_cast<std::size_t>(j)]; }
    double crossing_slope_node(int j) const { return dustar_[static_cast<std::size_t>(j)]; }

    double lag_horizon() const { return kTwoPi * periods_; }

    void to_csv(std::ostream& os, int stride = 1) const;

  private:
    double interp_A(int j, double lag) const;
    double interp_phi(int j, double lag) const;

    ModelSpec model_;
    PeriodicCurrent current_;
    int n_ = 0;
    int substeps_ = 4;
    int periods_ = 1;
    bool toy_ = false;
    double q_ = 0.0;  // tau / beta (step model)
    DecayCertificate cert_;
    double tail_bound_ = 0.0;

    // step model: crossing lags and their s-derivatives at start nodes
    std::vector<double> ustar_, dustar_;
    // smooth model: per start node, lag-sampled flow and cumulative rate
    // integral, row length periods_*n_+1
    std::vector<double> phi_, A_;
};

// ---------------------------------------------------------------------------
// phase-chain operators
// ---------------------------------------------------------------------------

// Dense quadrature operators for the periodized kernels acting on grid
// densities: (K rho)(t_i) = sum_j K[i*n+j] rho_j approximates
// int_0^{2pi} K^{2pi}(t_i, s) rho(s) ds. The step-rate path integrates each
// cell exactly against Catmull-Rom interpolation of rho with the jump locus
// resolved in closed form; smooth kernels use the periodic trapezoid rule
// with two-sided values at the lag-0 jump of H.
struct PhaseOperators {
    int n = 0;
    double tau = 1.0;
    std::vector<double> K, H;  // row-major n x n
    double doeblin_delta = 0.0;
    double col_stoch_err = 0.0;
    double tail_bound = 0.0;

    void apply_K(const std::vector<double>& in, std::vector<double>& out) const;
    void apply_H(const std::vector<double>& in, std::vector<double>& out) const;
};

PhaseOperators assemble_phase_operators(const KernelGrid& grid, Exec exec = Exec::Parallel,
                                        bool full_doeblin_scan = true);

// Single row of the K-operator at an arbitrary output time t (same quadrature
// as the assembled matrix); used to evaluate chain quantities off-grid.
std::vector<double> phase_operator_row(const KernelGrid& grid, double t, bool survival_kernel);

}  // namespace mfh
