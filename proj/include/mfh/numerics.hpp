#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "mfh/errors.hpp"

namespace mfh {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// scalar root finding
// ---------------------------------------------------------------------------

// Bisection refined with a secant step; [a,b] must bracket a sign change.
double bisect(const std::function<double(double)>& f, double a, double b,
              double fa, double fb, double xtol = 1e-14, int max_iter = 200);

inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double xtol = 1e-14) {
    return bisect(f, a, b, f(a), f(b), xtol);
}

// Root of the cubic Hermite interpolant through (0,y0,d0),(h,y1,d1) equal to
// `level`, assuming a single crossing inside the step. Returns the offset in
// [0,h].
double hermite_crossing(double h, double y0, double d0, double y1, double d1,
                        double level);

// Cubic Hermite value at offset t in [0,h].
inline double hermite_value(double h, double y0, double d0, double y1, double d1,
                            double t) {
    double u = t / h;
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 +
           (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
}

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

// Adaptive Simpson on [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

// Moments M_m = int_{w0}^{w1} e^{sigma w} w^m dw for m = 0..m_max (m_max <= 3),
// stable for small |sigma (w1-w0)| via series fallback.
void exp_moments(double sigma, double w0, double w1, int m_max, double* out);

// int_{u0}^{u1} e^{-z u} (a + b u) du, stable for small |z (u1-u0)|.
Complex filon_linear(Complex z, double u0, double u1, double a, double b);

// int_0^{horizon} e^{-z u} f(u) du for f sampled on a uniform grid, exact per
// cell against linear interpolation, with cells split at the listed jump
// abscissas (one-sided limits taken from the adjacent cells).
Complex laplace_of_sampled(const std::vector<double>& f, double dt, Complex z,
                           const std::vector<double>& jumps = {});

// ---------------------------------------------------------------------------
// dense linear algebra (small systems)
// ---------------------------------------------------------------------------

// Solves A x = b in place by partial-pivot LU; A is n x n row-major.
// Throws DegenerateJacobian when a pivot collapses.
void lu_solve(std::vector<double>& A, std::vector<double>& b, std::size_t n);

// ---------------------------------------------------------------------------
// Fourier helpers on a uniform 2*pi grid (N nodes, t_i = 2*pi*i/N)
// ---------------------------------------------------------------------------

struct FourierCoeffs {
    double mean = 0.0;
    std::vector<double> cosc, sinc;  // modes 1..M
};

FourierCoeffs fourier_analyze(const std::vector<double>& values, std::size_t modes);

double fourier_eval(const FourierCoeffs& c, double t);

// Complex mode n coefficient (1/N) sum values_i exp(-i n t_i).
Complex fourier_mode(const std::vector<double>& values, int n);

// ---------------------------------------------------------------------------
// misc
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

inline double sqr(double x) { return x * x; }

}  // namespace mfh
