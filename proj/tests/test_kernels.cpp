#include "doctest.h"
#include "mfh/kernels.hpp"

#include <cmath>
#include <sstream>

using namespace mfh;

namespace {
const ModelSpec kToy = ModelSpec::toy(0.1, 1.5);
const PeriodicCurrent kAlpha1 = PeriodicCurrent::constant(1.0);
}  // namespace

TEST_CASE("survival closed forms") {
    double tstar = std::log(5.0 / 3.0);
    // flat before the crossing
    CHECK(survival(kToy, kAlpha1, 0.5 * tstar, 0.0, 0.0) == 1.0);
    // exponential decay past it
    CHECK(survival(kToy, kAlpha1, tstar + 1.0, 0.0, 0.0) ==
          doctest::Approx(std::exp(-10.0)).epsilon(1e-12));
    // starting above the threshold
    CHECK(survival(kToy, kAlpha1, 0.73, 0.0, 2.0) ==
          doctest::Approx(std::exp(-7.3)).epsilon(1e-12));
}

TEST_CASE("survival numeric path agrees with the closed form") {
    double tstar = std::log(5.0 / 3.0);
    FlowOptions numeric_opts;
    numeric_opts.force_numeric = true;
    for (double t : {0.3, tstar + 0.05, tstar + 0.4, 2.0}) {
        double closed = survival(kToy, kAlpha1, t, 0.0, 0.0);
        double numeric = survival(kToy, kAlpha1, t, 0.0, 0.0, numeric_opts);
        CHECK(std::abs(closed - numeric) < 1e-8);
    }
}

TEST_CASE("first jump density and the central-difference identity") {
    double tstar = std::log(5.0 / 3.0);
    CHECK(first_jump_density(kToy, kAlpha1, 0.5 * tstar, 0.0, 0.0) == 0.0);
    double t = tstar + 0.2;
    CHECK(first_jump_density(kToy, kAlpha1, t, 0.0, 0.0) ==
          doctest::Approx(10.0 * std::exp(-2.0)).epsilon(1e-12));
    // K = -dH/dt away from the discontinuity
    double h = 1e-4;
    double fd = -(survival(kToy, kAlpha1, t + h, 0.0, 0.0) -
                  survival(kToy, kAlpha1, t - h, 0.0, 0.0)) /
                (2.0 * h);
    CHECK(std::abs(first_jump_density(kToy, kAlpha1, t, 0.0, 0.0) - fd) < 1e-6);
    // and for the smooth model
    ModelSpec poly = ModelSpec::poly(10.0, 2.0, -2.0);
    PeriodicCurrent a0 = PeriodicCurrent::constant(0.3);
    double tp = 0.8;
    double fdp = -(survival(poly, a0, tp + h, 0.0, 0.1) -
                   survival(poly, a0, tp - h, 0.0, 0.1)) /
                 (2.0 * h);
    CHECK(std::abs(first_jump_density(poly, a0, tp, 0.0, 0.1) - fdp) < 1e-6);
}

TEST_CASE("kernel shift equivariance") {
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, 0.2, 1.0);
    double theta = 0.7;
    PeriodicCurrent shifted = a.shifted(theta);
    for (double s : {0.0, 0.5}) {
        for (double lag : {0.4, 1.1}) {
            double lhs = survival(kToy, shifted, s + lag, s, 0.0);
            double rhs = survival(kToy, a, s + lag + theta, s + theta, 0.0);
            CHECK(std::abs(lhs - rhs) < 1e-10);
            double lk = first_jump_density(kToy, shifted, s + lag, s, 0.0);
            double rk = first_jump_density(kToy, a, s + lag + theta, s + theta, 0.0);
            CHECK(std::abs(lk - rk) < 1e-9);
        }
    }
}

TEST_CASE("decay certificate") {
    DecayCertificate c = certify_decay(kToy, kAlpha1);
    CHECK(c.lambda0 == doctest::Approx(1.0));
    CHECK(c.f_lambda0 == doctest::Approx(10.0));
    CHECK(c.s0 > 0.0);
    // kernel envelope H(t) <= e^{-f(lambda0)(t - s0)}
    for (double t : {1.0, 1.5, 2.5}) {
        double H = survival(kToy, kAlpha1, t, 0.0, 0.0);
        CHECK(H <= std::exp(-c.f_lambda0 * (t - c.s0)) + 1e-12);
    }
    DecayCertificate cp = certify_decay(ModelSpec::poly(10.0, 2.0, -2.0),
                                        PeriodicCurrent::constant(0.3));
    CHECK(cp.f_lambda0 > 0.0);
}

TEST_CASE("KernelGrid: constant current gives lag-only kernels") {
    KernelGrid g = KernelGrid::build(kToy, kAlpha1, 128, Exec::Serial);
    for (int j : {3, 40, 100}) {
        double s = g.node(j);
        double lag = 0.9;
        CHECK(g.K_periodized(s + lag, s) ==
              doctest::Approx(g.K_periodized(lag, 0.0)).epsilon(1e-12));
        CHECK(g.H_periodized(s + lag, s) ==
              doctest::Approx(g.H_periodized(lag, 0.0)).epsilon(1e-12));
    }
}

TEST_CASE("KernelGrid: column stochasticity and positivity") {
    // T = 2 pi at tau = 1
    KernelGrid g = KernelGrid::build(kToy, kAlpha1, 256, Exec::Serial);
    for (int j = 0; j < g.nodes(); j += 37)
        CHECK(std::abs(g.column_mass(j) - 1.0) < 1e-8);
    PhaseOperators ops = assemble_phase_operators(g, Exec::Serial);
    CHECK(ops.col_stoch_err < 1e-8);
    CHECK(ops.doeblin_delta > 0.0);
}

TEST_CASE("KernelGrid periodization matches a direct tail sum") {
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, 0.05, 1.0);
    KernelGrid g = KernelGrid::build(kToy, a, 64, Exec::Serial);
    double t = g.node(10), s = g.node(40);
    double direct = 0.0;
    for (int k = 0; k <= g.tail_periods(); ++k) {
        double lag = t - s + kTwoPi * k;
        if (lag < 0) continue;
        direct += first_jump_density(kToy, a.with_tau(1.0), s + lag, s, 0.0);
    }
    CHECK(std::abs(g.K_periodized(t, s) - direct) < 1e-7);
}

TEST_CASE("serial and parallel grid builds agree bitwise") {
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, 0.05, 1.0);
    KernelGrid s = KernelGrid::build(kToy, a, 96, Exec::Serial);
    KernelGrid p = KernelGrid::build(kToy, a, 96, Exec::Parallel);
    for (int j = 0; j < 96; ++j) {
        CHECK(s.crossing_lag_node(j) == p.crossing_lag_node(j));
        CHECK(s.crossing_slope_node(j) == p.crossing_slope_node(j));
    }
    PhaseOperators os = assemble_phase_operators(s, Exec::Serial);
    PhaseOperators op = assemble_phase_operators(p, Exec::Parallel);
    CHECK(os.K == op.K);
    CHECK(os.H == op.H);
}

TEST_CASE("kernel grid CSV export") {
    KernelGrid g = KernelGrid::build(kToy, kAlpha1, 32, Exec::Serial);
    std::ostringstream os;
    g.to_csv(os, 8);
    CHECK(os.str().rfind("t,s,H,K", 0) == 0);
    CHECK(os.str().size() > 100);
}
