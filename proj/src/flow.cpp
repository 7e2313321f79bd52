#include "mfh/flow.hpp"

#include <algorithm>
#include <cmath>

#include "mfh/numerics.hpp"

namespace mfh {

namespace {

double affine_constant_flow(double c0, double c1, double alpha, double dt, double x) {
    if (c1 == 0.0) return x + (c0 + alpha) * dt;
    // dphi/dt = c1 (phi - xeq), xeq = -(c0+alpha)/c1
    double xeq = -(c0 + alpha) / c1;
    return xeq + (x - xeq) * std::exp(c1 * dt);
}

}  // namespace

double flow(const ModelSpec& model, const PeriodicCurrent& current, double t,
            double s, double x, const FlowOptions& opts) {
    if (t < s) throw DomainViolation("flow: requires t >= s");
    if (x < 0.0) throw DomainViolation("flow: requires x >= 0");
    if (current.min_value() <= -model.drift(0.0))
        throw DomainViolation("flow: current violates inf a > -b(0)");
    if (t == s) return x;

    if (!opts.force_numeric && model.drift_affine && current.is_constant())
        return affine_constant_flow(model.drift_c0, model.drift_c1, current.mean(), t - s, x);

    const double span = t - s;
    long long n = static_cast<long long>(std::ceil(span / opts.max_step));
    n = std::max<long long>(n, 1);
    if (n > opts.step_budget) throw FlowDivergence("flow: step budget exceeded");
    const double h = span / static_cast<double>(n);
    double phi = x;
    double u = s;
    for (long long i = 0; i < n; ++i) {
        auto rhs = [&](double tt, double yy) { return model.drift(yy) + current.value(tt); };
        double k1 = rhs(u, phi);
        double k2 = rhs(u + 0.5 * h, phi + 0.5 * h * k1);
        double k3 = rhs(u + 0.5 * h, phi + 0.5 * h * k2);
        double k4 = rhs(u + h, phi + h * k3);
        phi += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        u += h;
        if (!std::isfinite(phi) || std::abs(phi) > 1e12)
            throw FlowDivergence("flow: trajectory diverged");
    }
    return phi;
}

double hitting_time(const ToyParams& toy, double x) {
    if (x < 0.0 || x > 1.0) throw DomainViolation("hitting_time: requires x in [0,1]");
    // b(y)+alpha = sigma - y
    return std::log((toy.sigma() - x) / (toy.sigma() - 1.0));
}

double hitting_time(const ModelSpec& model, double alpha, double x) {
    if (x < 0.0 || x > 1.0) throw DomainViolation("hitting_time: requires x in [0,1]");
    if (x == 1.0) return 0.0;
    auto integrand = [&](double y) {
        double denom = model.drift(y) + alpha;
        if (denom <= 0.0) throw DomainViolation("hitting_time: b + alpha vanishes on [x,1]");
        return 1.0 / denom;
    };
    return adaptive_simpson(integrand, x, 1.0, 1e-13);
}

SigmaAlpha sigma_alpha(const ModelSpec& model, double alpha) {
    if (alpha < 0.0) throw DomainViolation("sigma_alpha: requires alpha >= 0");
    SigmaAlpha out;
    auto g = [&](double x) { return model.drift(x) + alpha; };
    const double x_max = 10.0 * (1.0 + std::abs(model.drift(0.0)) + alpha);
    const int n_scan = 4096;

    double prev_x = 0.0;
    double prev_g = g(0.0);
    double inf_gap = prev_g;
    std::optional<double> root;
    for (int i = 1; i <= n_scan; ++i) {
        double xi = x_max * static_cast<double>(i) / n_scan;
        double gi = g(xi);
        inf_gap = std::min(inf_gap, gi);
        if (!root && (gi == 0.0 || (gi > 0) != (prev_g > 0))) {
            root = bisect(g, prev_x, xi, prev_g, gi, 1e-15 * x_max);
            break;
        }
        prev_x = xi;
        prev_g = gi;
    }

    if (root) {
        out.finite = true;
        out.value = *root;
        out.drift_slope = model.drift_deriv(*root);
        out.nondegenerate = out.drift_slope < 0.0;
        if (std::abs(out.drift_slope) < 1e-10)
            throw DegenerateEquilibrium("sigma_alpha: b'(sigma_alpha) = 0 within tolerance");
        return out;
    }
    if (inf_gap <= 0.0)
        throw DegenerateEquilibrium("sigma_alpha: no sign change but inf(b+alpha) <= 0 on scan");
    out.finite = false;
    out.inf_gap = inf_gap;
    out.nondegenerate = true;
    return out;
}

}  // namespace mfh
