#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "mfh/kernels.hpp"
#include "mfh/model.hpp"

namespace mfh {

// Convolution-kernel description for the renewal equation r = Kf + K * r.
// `jumps` lists lag abscissas where K is discontinuous and `kinks` where H has
// a derivative jump; the marching quadrature splits cells there.
struct RenewalKernel {
    std::function<double(double)> K;        // convolution kernel, lag >= 0
    std::function<double(double)> H;        // survival, lag >= 0
    std::function<double(double)> K_force;  // forcing kernel K^nu
    std::function<double(double)> H_force;  // forcing survival H^nu
    std::vector<double> jumps;              // K discontinuities (shared with forcing)
    std::vector<double> kinks;              // H derivative jumps
    double horizon = 0.0;                   // table/validity horizon

    static RenewalKernel from_constant_current(const ModelSpec& model, double alpha);
};

struct RateSolution {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> xi;     // r - gamma for constant-current runs
    std::vector<double> jumps;  // discontinuity abscissas inherited from the forcing
    double residual_mass = 0.0; // sup_t |H^nu + H * r - 1|
    double gamma_ref = 0.0;
};

// Trapezoidal product-integration marching solution of
//   r(t) = K^nu(t) + int_0^t K(t-u) r(u) du
// on [0, horizon]. The mass identity residual is evaluated on the same grid;
// GridTooCoarse is thrown when it exceeds 10x tolerance.
RateSolution solve_rate(const RenewalKernel& kernel, double horizon, double dt,
                        double tolerance = 1e-4, double gamma_ref = 0.0);

struct DecayFit {
    double lambda = 0.0;
    double log_C = 0.0;
    double window_start = 0.0;
};

// Fits lambda from the decay of |xi| = |r - gamma| over the tail window
// [t_half, horizon], using the local maxima of |xi| so oscillatory tails
// regress on their envelope.
DecayFit stationary_rate_gap(const RateSolution& solution, double gamma);

// Two-time kernel with an optional jump locus u -> s where K(t, .) jumps.
struct TwoTimeKernel {
    std::function<double(double, double)> K;  // (t, s)
    // for fixed t, the s at which K(t, .) is discontinuous (< t), or NaN
    std::function<double(double)> jump_s;
    std::vector<double> value_breaks;  // s abscissas where the solution jumps
};

// Two-time marching solution r(t_i) of the non-convolution Volterra equation
// started at s0. Used to cross-check the asymptotic periodic rate against a
// long transient run.
std::vector<double> solve_rate_two_time(const TwoTimeKernel& kernel, double s0,
                                        double t_end, double dt,
                                        double kernel_window);

// Inverse of (I - K^{2pi}) on zero-mean grid functions: (I + r^{2pi}) with
// r^{2pi}(h) = tau*gamma*Gamma(h) + xi^{2pi}(h). Gamma is the zero-mean
// primitive (computed spectrally) and xi^{2pi} the periodized convolution
// with xi_{alpha,tau}.
std::vector<double> resolvent_apply(const std::vector<double>& h, double tau,
                                    double gamma, const RateSolution& constant_run);

}  // namespace mfh
