#include "mfh/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mfh/kernels.hpp"
#include "mfh/volterra.hpp"
#include "mfh/numerics.hpp"
#include "mfh/spectral.hpp"

namespace mfh {

namespace {

// 1 / Hhat_alpha(0): closed form for the toy, tabulated-survival quadrature
// otherwise.
double gamma_from_transform(const ModelSpec& model, double alpha) {
    if (model.is_toy()) {
        ToyParams toy(model.beta, model.toy_m(), alpha);
        return 1.0 / (hitting_time(toy, 0.0) + model.beta);
    }
    RenewalKernel k = RenewalKernel::from_constant_current(model, alpha);
    double integral = adaptive_simpson(k.H, 0.0, k.horizon, 1e-12);
    return 1.0 / integral;
}

}  // namespace

double stationary_gamma(const ModelSpec& model, double alpha) {
    SigmaAlpha sig = sigma_alpha(model, alpha);
    if (model.drift(0.0) + alpha <= 0.0)
        throw DomainViolation("invariant measure needs b(0) + alpha > 0");

    if (model.is_toy()) {
        // piecewise closed-form density, integrated numerically in x
        double sigma = model.toy_m() + alpha;
        double p = 1.0 / model.beta;
        double mass = adaptive_simpson([&](double x) { return 1.0 / (sigma - x); }, 0.0,
                                       1.0, 1e-13);
        double denom_pow = std::pow(sigma - 1.0, p);
        double eps = std::pow(1e-13 * p * denom_pow, 1.0 / p);
        eps = std::min(eps, 0.5 * (sigma - 1.0));
        mass += adaptive_simpson(
            [&](double x) { return std::pow(sigma - x, p - 1.0) / denom_pow; }, 1.0,
            sigma - eps, 1e-13);
        mass += std::pow(eps, p) / (p * denom_pow);  // analytic edge remainder
        return 1.0 / mass;
    }

    // cumulative inner integral I(x) = int_0^x f/(b+alpha) on a fine grid,
    // then the unnormalized mass by trapezoid in x
    double x_end;
    if (sig.finite) {
        x_end = sig.value;
        double p = model.rate(sig.value) / std::max(1e-12, -sig.drift_slope);
        if (p <= 1.01)
            throw DegenerateEquilibrium(
                "invariant measure: density edge exponent too small for grid quadrature");
    } else {
        x_end = 1.0;
        while (x_end < 1e6) {
            double I_probe = adaptive_simpson(
                [&](double y) { return model.rate(y) / (model.drift(y) + alpha); }, 0.0,
                x_end, 1e-12);
            if (std::exp(-I_probe) / (model.drift(x_end) + alpha) < 1e-18) break;
            x_end *= 2.0;
        }
    }

    const int n = 1 << 18;
    const double h = x_end / n;
    auto slope = [&](double x) {
        double denom = model.drift(x) + alpha;
        return denom > 1e-300 ? model.rate(x) / denom : 0.0;
    };
    double I = 0.0;
    double mass = 0.0;
    double prev_dens = 1.0 / (model.drift(0.0) + alpha);
    for (int i = 0; i < n; ++i) {
        double x0 = h * i, x1 = x0 + h;
        if (model.has_rate_jump() && x0 < model.rate_jump_at() && x1 > model.rate_jump_at()) {
            double xj = model.rate_jump_at();
            I += adaptive_simpson(slope, x0, xj, 1e-15) + adaptive_simpson(slope, xj, x1, 1e-15);
        } else {
            I += h / 6.0 * (slope(x0) + 4.0 * slope(0.5 * (x0 + x1)) + slope(x1));
        }
        double denom = model.drift(x1) + alpha;
        double dens = denom > 0.0 ? std::exp(-I) / denom : 0.0;
        mass += 0.5 * h * (prev_dens + dens);
        prev_dens = dens;
    }
    return 1.0 / mass;
}

InvariantMeasure invariant_measure(const ModelSpec& model, double alpha, int samples) {
    SigmaAlpha sig = sigma_alpha(model, alpha);
    InvariantMeasure m;
    m.alpha = alpha;
    m.support_finite = sig.finite;

    m.gamma = stationary_gamma(model, alpha);
    m.gamma_transform = gamma_from_transform(model, alpha);
    m.J_of_alpha = m.gamma > 0.0 ? alpha / m.gamma : 0.0;

    double x_end = sig.finite ? sig.value : 0.0;
    if (!sig.finite) {
        x_end = 1.0;
        while (x_end < 1e6) {
            double I_probe = adaptive_simpson(
                [&](double y) { return model.rate(y) / (model.drift(y) + alpha); }, 0.0,
                x_end, 1e-12);
            if (std::exp(-I_probe) / (model.drift(x_end) + alpha) < 1e-16) break;
            x_end *= 2.0;
        }
    }
    m.support_end = x_end;

    m.x.resize(samples);
    m.density.resize(samples);
    double I = 0.0;
    double prev_x = 0.0;
    for (int i = 0; i < samples; ++i) {
        double x = x_end * (i + 0.5) / samples;
        auto slope = [&](double y) {
            double denom = model.drift(y) + alpha;
            return denom > 1e-300 ? model.rate(y) / denom : 0.0;
        };
        if (model.has_rate_jump() && prev_x < model.rate_jump_at() && x > model.rate_jump_at()) {
            I += adaptive_simpson(slope, prev_x, model.rate_jump_at(), 1e-14);
            I += adaptive_simpson(slope, model.rate_jump_at(), x, 1e-14);
        } else {
            I += adaptive_simpson(slope, prev_x, x, 1e-14);
        }
        prev_x = x;
        double denom = model.drift(x) + alpha;
        m.x[i] = x;
        m.density[i] = denom > 0.0 ? m.gamma * std::exp(-I) / denom : 0.0;
    }
    return m;
}

double J_of_alpha(const ModelSpec& model, double alpha) {
    if (alpha == 0.0) return 0.0;
    if (model.is_toy()) {
        ToyParams toy(model.beta, model.toy_m(), alpha);
        return alpha * (toy.omega() + model.beta);
    }
    return alpha / stationary_gamma(model, alpha);
}

std::vector<double> solve_alpha_for_J(const ModelSpec& model, double J, int scan_points) {
    if (J < 0.0) throw DomainViolation("solve_alpha_for_J: J must be >= 0");
    if (J == 0.0) return {0.0};

    auto g = [&](double a) { return a - J * gamma_from_transform(model, a); };
    // grow the scan interval until J(alpha_max) > J
    double a_max = 1.0;
    for (int k = 0; k < 60; ++k) {
        if (J_of_alpha(model, a_max) > J) break;
        a_max *= 2.0;
        if (a_max > 1e9) throw NoRootInScan("solve_alpha_for_J: J(alpha) never exceeds J");
    }
    std::vector<double> roots;
    double a_prev = a_max / scan_points;
    double g_prev = g(a_prev);
    for (int i = 2; i <= scan_points; ++i) {
        double a = a_max * static_cast<double>(i) / scan_points;
        double gi = g(a);
        if (gi == 0.0 || (gi > 0) != (g_prev > 0)) {
            double root = bisect(g, a_prev, a, g_prev, gi, 1e-12);
            if (roots.empty() || std::abs(root - roots.back()) > 1e-7 * a_max)
                roots.push_back(root);
        }
        a_prev = a;
        g_prev = gi;
    }
    if (roots.empty()) throw NoRootInScan("solve_alpha_for_J: no sign change in scan");
    return roots;
}

JPrimeCheck J_prime_check(const ModelSpec& model, double alpha, double fd_step) {
    JPrimeCheck out;
    out.finite_difference =
        (J_of_alpha(model, alpha + fd_step) - J_of_alpha(model, alpha - fd_step)) /
        (2.0 * fd_step);
    double gamma = model.is_toy() ? 1.0 / (hitting_time(ToyParams(model.beta, model.toy_m(), alpha), 0.0) + model.beta)
                                  : stationary_gamma(model, alpha);
    Complex theta0 = theta_hat(model, alpha, Complex(0.0, 0.0));
    out.identity = (1.0 - (alpha / gamma) * theta0.real()) / gamma;
    out.relative_gap = std::abs(out.finite_difference - out.identity) /
                       std::max(1e-300, std::abs(out.identity));
    return out;
}

void invariant_to_csv(const InvariantMeasure& m, std::ostream& os) {
    os << "x,density\n";
    for (std::size_t i = 0; i < m.x.size(); ++i) os << m.x[i] << ',' << m.density[i] << '\n';
}

}  // namespace mfh
