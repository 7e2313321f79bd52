#pragma once

#include <iosfwd>
#include <vector>

#include "mfh/flow.hpp"
#include "mfh/model.hpp"

namespace mfh {

// Stationary law of the constant-current single-neuron dynamics:
// density gamma/(b+alpha) exp(-int_0^x f/(b+alpha)) on [0, sigma_alpha).
struct InvariantMeasure {
    double alpha = 0.0;
    bool support_finite = true;
    double support_end = 0.0;  // sigma_alpha or the truncation point
    std::vector<double> x;
    std::vector<double> density;
    double gamma = 0.0;          // stationary jump rate, from the x-space integral
    double gamma_transform = 0.0;  // 1 / int_0^inf H_alpha(t) dt
    double J_of_alpha = 0.0;     // alpha / gamma
};

InvariantMeasure invariant_measure(const ModelSpec& model, double alpha,
                                   int samples = 2048);

// gamma(alpha) alone (x-space quadrature route).
double stationary_gamma(const ModelSpec& model, double alpha);

// J(alpha) = alpha / gamma(alpha); closed form alpha*(omega+beta) for the toy.
double J_of_alpha(const ModelSpec& model, double alpha);

// All roots of alpha = J * gamma(alpha) on an adaptively grown scan interval.
std::vector<double> solve_alpha_for_J(const ModelSpec& model, double J,
                                      int scan_points = 2048);

struct JPrimeCheck {
    double finite_difference = 0.0;
    double identity = 0.0;  // (1 - J(alpha) Theta_hat(0)) / gamma(alpha)
    double relative_gap = 0.0;
};

JPrimeCheck J_prime_check(const ModelSpec& model, double alpha, double fd_step = 1e-4);

void invariant_to_csv(const InvariantMeasure& m, std::ostream& os);

}  // namespace mfh
