#include "doctest.h"
#include "mfh/volterra.hpp"

#include <cmath>

using namespace mfh;

TEST_CASE("zero kernel gives zero rate") {
    RenewalKernel k;
    k.K = [](double) { return 0.0; };
    k.H = [](double) { return 1.0; };
    k.K_force = k.K;
    k.H_force = k.H;
    RateSolution sol = solve_rate(k, 5.0, 1e-3);
    for (double r : sol.r) CHECK(r == 0.0);
    CHECK(sol.residual_mass < 1e-12);
}

TEST_CASE("exponential renewal kernel has constant rate") {
    RenewalKernel k;
    k.K = [](double u) { return std::exp(-u); };
    k.H = [](double u) { return std::exp(-u); };
    k.K_force = k.K;
    k.H_force = k.H;
    RateSolution sol = solve_rate(k, 10.0, 1e-3);
    // r = K + K * r has the constant solution 1 = 1/mean
    for (std::size_t i = 0; i < sol.r.size(); i += 500)
        CHECK(sol.r[i] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Erlang renewal kernel: rate, limit and decay exponent") {
    // K(t) = t e^{-t}: r(t) = (1 - e^{-2t})/2, xi decays at the nontrivial
    // zero z = -2 of 1 - K_hat
    RenewalKernel k;
    k.K = [](double u) { return u * std::exp(-u); };
    k.H = [](double u) { return (1.0 + u) * std::exp(-u); };
    k.K_force = k.K;
    k.H_force = k.H;
    RateSolution sol = solve_rate(k, 14.0, 1e-3, 1e-4, 0.5);
    for (std::size_t i = 0; i < sol.r.size(); i += 701) {
        double t = sol.t[i];
        CHECK(sol.r[i] == doctest::Approx(0.5 * (1.0 - std::exp(-2.0 * t))).epsilon(1e-5));
    }
    CHECK(sol.r.back() == doctest::Approx(0.5).epsilon(1e-6));
    DecayFit fit = stationary_rate_gap(sol, 0.5);
    CHECK(fit.lambda == doctest::Approx(2.0).epsilon(5e-2));
}

TEST_CASE("toy kernel run hits the stationary rate") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    RenewalKernel k = RenewalKernel::from_constant_current(toy, 1.0);
    double gamma = 1.0 / (std::log(5.0 / 3.0) + 0.1);
    RateSolution sol = solve_rate(k, 20.0, 1e-3, 1e-4, gamma);
    CHECK(sol.residual_mass <= 1e-4);
    CHECK(std::abs(sol.r.back() - gamma) <= 1e-4);
    DecayFit fit = stationary_rate_gap(sol, gamma);
    CHECK(fit.lambda > 0.0);
    // xi is integrable: its running integral stabilizes once the tail decays
    double acc = 0.0, acc_18 = 0.0;
    for (std::size_t i = 0; i < sol.xi.size(); ++i) {
        acc += sol.xi[i] * sol.dt;
        if (sol.t[i] <= 18.0) acc_18 = acc;
    }
    CHECK(std::abs(acc - acc_18) < 1e-6);
    CHECK(std::isfinite(acc));
}

TEST_CASE("halving dt improves the mass identity by the expected order") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    RenewalKernel k = RenewalKernel::from_constant_current(toy, 1.0);
    RateSolution coarse = solve_rate(k, 20.0, 1e-3);
    RateSolution fine = solve_rate(k, 20.0, 5e-4);
    CHECK(coarse.residual_mass / fine.residual_mass >= 3.5);
}

TEST_CASE("smooth-model kernel mass identity") {
    ModelSpec poly = ModelSpec::poly(10.0, 2.0, -2.0);
    RenewalKernel k = RenewalKernel::from_constant_current(poly, 0.3);
    RateSolution sol = solve_rate(k, 10.0, 1e-3);
    CHECK(sol.residual_mass < 1e-4);
}

TEST_CASE("two-time solver reduces to the convolution solve for constant current") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    RenewalKernel conv = RenewalKernel::from_constant_current(toy, 1.0);
    double tstar = std::log(5.0 / 3.0);
    TwoTimeKernel k2;
    k2.K = [&](double t, double s) { return conv.K(t - s); };
    k2.jump_s = [&](double t) { return t - tstar; };
    k2.value_breaks = {tstar};
    std::vector<double> r2 = solve_rate_two_time(k2, 0.0, 12.0, 1e-3, conv.horizon);
    RateSolution sol = solve_rate(conv, 12.0, 1e-3);
    double worst = 0.0;
    for (std::size_t i = 0; i < r2.size(); i += 37)
        worst = std::max(worst, std::abs(r2[i] - sol.r[i]));
    CHECK(worst < 2e-4);
}
