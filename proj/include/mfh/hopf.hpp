#pragma once

#include <vector>

#include "mfh/model.hpp"
#include "mfh/numerics.hpp"

namespace mfh {

// Bifurcation function of the step-rate / linear-drift model in the
// (beta, delta, omega) parametrization:
//   U(beta, delta, omega, z) = delta z/(z+1) (1 - e^{-omega(z+1)})
//                              + e^{-omega z} - (1 + beta z).
// Its nonzero roots in the transform domain are the roots of the stability
// function; z = 0 is an artifact of clearing denominators.
Complex U_eval(double beta, double delta, double omega, Complex z);

Complex U_dz(double beta, double delta, double omega, Complex z);
Complex U_ddelta(double beta, double delta, double omega, Complex z);
Complex U_domega(double beta, double delta, double omega, Complex z);
Complex U_dbeta(double beta, double delta, double omega, Complex z);

// The unique (beta, delta) putting a purely imaginary root at z = i y.
struct CurvePoint {
    double y = 0.0;
    double beta0 = 0.0;
    double delta0 = 0.0;
};

CurvePoint imaginary_root_curve(double omega, double y);

// Dense curve samples skipping denominator-zero neighborhoods.
std::vector<CurvePoint> imaginary_root_curve_samples(double omega, double y_lo,
                                                     double y_hi, int count);

// Multiple points of the parametric curve; anything off the beta = 0 axis is
// reported as an error.
struct MultiplePoint {
    double beta = 0.0, delta = 0.0;
    double y_a = 0.0, y_b = 0.0;
};

std::vector<MultiplePoint> curve_self_intersection_check(double omega, double y_lo,
                                                         double y_hi, double y_step);

// Curve replotted at fixed m: for each y, the alpha solving
// delta0_omega(alpha)(y) = delta(alpha), with beta = beta0 and J = J(alpha).
struct FixedMCurvePoint {
    double y = 0.0, beta = 0.0, alpha = 0.0, J = 0.0;
};

std::vector<FixedMCurvePoint> imaginary_root_curve_fixed_m(double m, double y_lo,
                                                           double y_hi, int count);

// ---------------------------------------------------------------------------
// bifurcation point
// ---------------------------------------------------------------------------

struct BifurcationPoint {
    double omega0 = 0.0, epsilon0 = 0.0;
    double y0 = 0.0;          // marginal root is +- i y0
    double beta0 = 0.0, d0 = 0.0;
    double alpha0 = 0.0, m0 = 0.0;
    double tau0 = 0.0;        // reduced period, 1 / y0
    Complex dU_dz;            // at (beta0, d0, omega0, i y0)
    Complex Z0_prime;         // d/dalpha of the tracked root at alpha0
    bool check_simple_root = false;   // dU/dz != 0
    bool check_nonresonance = false;  // modes |n| in [2, n_max]
    bool check_transversality = false;  // Re Z0' > 0
    double nonresonance_min_gap = 0.0;
    double residual_U = 0.0;  // |U| at the constructed point
};

struct BifurcationOptions {
    int nonresonance_max_mode = 64;
    double nonresonance_tol = 1e-6;
    bool validate = true;  // throw on failed checks
};

// Point on the imaginary-root curve at y0 = (2 pi / omega0)(1 - eps0/omega0),
// mapped back to model parameters, with the spectral checks evaluated from
// the exact partial derivatives of U.
BifurcationPoint construct_bifurcation_point(double omega0, double epsilon0,
                                             const BifurcationOptions& opts = {});

// Toy model and current parameters at the point.
ToyParams bifurcation_toy_params(const BifurcationPoint& p);

}  // namespace mfh
