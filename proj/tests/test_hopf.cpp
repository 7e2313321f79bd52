#include "doctest.h"
#include "mfh/hopf.hpp"

#include <cmath>

using namespace mfh;

TEST_CASE("U vanishes at z = 0 for all parameters") {
    for (double beta : {0.01, 0.3})
        for (double delta : {0.1, 0.8})
            for (double omega : {0.5, 2.0})
                CHECK(std::abs(U_eval(beta, delta, omega, Complex(0.0, 0.0))) < 1e-15);
}

TEST_CASE("curve point solves U(i y) = 0") {
    CurvePoint c = imaginary_root_curve(1.0, 3.0);
    CHECK(std::abs(U_eval(c.beta0, c.delta0, 1.0, Complex(0.0, 3.0))) < 1e-13);
}

TEST_CASE("U agrees with an independent reassembly from the transform side") {
    // pre-multiplied form: U = z(1+beta z)(J psi_hat - H_hat) rewritten in
    // (delta, omega); rebuild it termwise at a generic point
    double beta = 0.05, delta = 0.3, omega = 1.0;
    Complex z(1.0, 2.0);
    Complex term1 = delta / (1.0 + beta * z) * (1.0 - std::exp(-omega * (z + 1.0))) / (z + 1.0);
    Complex term2 = (1.0 - std::exp(-omega * z)) / z;
    Complex term3 = beta * std::exp(-omega * z) / (1.0 + beta * z);
    Complex rebuilt = z * (1.0 + beta * z) * (term1 - term2 - term3);
    CHECK(std::abs(U_eval(beta, delta, omega, z) - rebuilt) < 1e-13);
}

TEST_CASE("U partial derivatives match finite differences") {
    double beta = 0.07, delta = 0.4, omega = 1.3;
    Complex z(0.3, 2.2);
    double h = 1e-6;
    CHECK(std::abs(U_dz(beta, delta, omega, z) -
                   (U_eval(beta, delta, omega, z + h) - U_eval(beta, delta, omega, z - h)) /
                       (2 * h)) < 1e-8);
    CHECK(std::abs(U_dbeta(beta, delta, omega, z) -
                   (U_eval(beta + h, delta, omega, z) - U_eval(beta - h, delta, omega, z)) /
                       (2 * h)) < 1e-8);
    CHECK(std::abs(U_ddelta(beta, delta, omega, z) -
                   (U_eval(beta, delta + h, omega, z) - U_eval(beta, delta - h, omega, z)) /
                       (2 * h)) < 1e-8);
    CHECK(std::abs(U_domega(beta, delta, omega, z) -
                   (U_eval(beta, delta, omega + h, z) - U_eval(beta, delta, omega - h, z)) /
                       (2 * h)) < 1e-8);
}

TEST_CASE("curve system residual along the parametrization") {
    for (double y = 0.1; y <= 15.5 * std::numbers::pi; y += 0.37) {
        CurvePoint c;
        try {
            c = imaginary_root_curve(1.0, y);
        } catch (const DenominatorVanishes&) {
            continue;
        }
        double omega = 1.0;
        double cy = std::cos(omega * y), sy = std::sin(omega * y);
        double lhs1 = cy + sy * y * (1.0 - c.delta0 * std::exp(-omega));
        double rhs1 = 1.0 - c.beta0 * y * y;
        double lhs2 = -sy + cy * y * (1.0 - c.delta0 * std::exp(-omega));
        double rhs2 = y * (1.0 + c.beta0 - c.delta0);
        double scale = 1.0 + std::abs(c.beta0) * y * y + std::abs(c.delta0) * y;
        CHECK(std::abs(lhs1 - rhs1) <= 1e-12 * scale);
        CHECK(std::abs(lhs2 - rhs2) <= 1e-12 * scale);
        // implicit identity linking beta, delta, y
        double lhs3 = (1.0 - c.delta0 * std::exp(-omega)) * (1.0 - c.delta0 * std::exp(-omega));
        double rhs3 = -2.0 * c.beta0 + c.beta0 * c.beta0 * y * y +
                      (1.0 + c.beta0 - c.delta0) * (1.0 + c.beta0 - c.delta0);
        CHECK(std::abs(lhs3 - rhs3) <= 1e-11 * (1.0 + rhs3 * rhs3));
    }
}

TEST_CASE("multiples of 2 pi / omega land on the origin branch") {
    double omega = 1.0;
    for (int k = 1; k <= 3; ++k) {
        double y = kTwoPi * k / omega;
        CurvePoint c = imaginary_root_curve(omega, y);
        CHECK(std::abs(c.beta0) < 1e-10);
        CHECK(std::abs(c.delta0) < 1e-10);
    }
}

TEST_CASE("the curve has exactly the two on-axis multiple points") {
    auto pts = curve_self_intersection_check(1.0, 0.05, 15.5 * std::numbers::pi, 1.0 / 64.0);
    double expected = 2.0 / (1.0 + std::exp(-1.0));
    CHECK(expected == doctest::Approx(1.4621172).epsilon(1e-7));
    bool origin = false, upper = false;
    for (const auto& mp : pts) {
        CHECK(std::abs(mp.beta) < 1e-8);
        if (std::abs(mp.delta) < 1e-8) origin = true;
        if (std::abs(mp.delta - expected) < 1e-8) upper = true;
    }
    CHECK(origin);
    CHECK(upper);
}

TEST_CASE("bifurcation point construction at omega0 = 1, eps0 = 0.05") {
    BifurcationPoint p = construct_bifurcation_point(1.0, 0.05);
    CHECK(p.y0 == doctest::Approx(kTwoPi * 0.95).epsilon(1e-12));
    CHECK(p.residual_U < 1e-12);
    CHECK(p.check_simple_root);
    CHECK(p.check_nonresonance);
    CHECK(p.check_transversality);
    CHECK(p.tau0 == doctest::Approx(1.0 / p.y0).epsilon(1e-14));
    // leading-order expansions
    CHECK(p.beta0 == doctest::Approx(0.05).epsilon(0.15));
    double curv = std::exp(1.0) / (2.0 * (std::exp(1.0) - 1.0)) * (1.0 + kTwoPi * kTwoPi / 4.0 * 4.0 / 1.0);
    // e/(2(e-1)) (1 + 4 pi^2)
    curv = std::exp(1.0) / (2.0 * (std::exp(1.0) - 1.0)) * (1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
    CHECK(curv == doctest::Approx(32.018).epsilon(1e-3));
    CHECK(p.d0 / (0.05 * 0.05) == doctest::Approx(curv).epsilon(0.25));
}

TEST_CASE("slope and curvature limits as eps0 -> 0") {
    double prev_ratio = 0.0;
    for (double eps : {0.04, 0.02, 0.01, 0.005}) {
        BifurcationPoint p = construct_bifurcation_point(1.0, eps);
        double ratio = p.beta0 / eps;
        if (prev_ratio != 0.0) CHECK(std::abs(ratio - 1.0) < std::abs(prev_ratio - 1.0) + 1e-12);
        prev_ratio = ratio;
    }
    BifurcationPoint p = construct_bifurcation_point(1.0, 0.005);
    CHECK(p.beta0 / 0.005 == doctest::Approx(1.0).epsilon(0.02));
    double curv = std::exp(1.0) / (2.0 * (std::exp(1.0) - 1.0)) *
                  (1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
    CHECK(p.d0 / (0.005 * 0.005) == doctest::Approx(curv).epsilon(0.02));
}

TEST_CASE("dU/dz expansion near the constructed point") {
    for (double eps : {0.02, 0.01}) {
        BifurcationPoint p = construct_bifurcation_point(1.0, eps);
        Complex expansion = -1.0 - Complex(1.0, kTwoPi) * eps;
        CHECK(std::abs(p.dU_dz - expansion) < 60.0 * eps * eps);
    }
}

TEST_CASE("Z0' transversality and its leading real part") {
    BifurcationPoint p = construct_bifurcation_point(1.0, 0.02);
    CHECK(p.Z0_prime.real() > 0.0);
    double lead = (1.0 - std::exp(-1.0)) / 1.0 * (kTwoPi * kTwoPi) /
                  (kTwoPi * kTwoPi + 1.0) * (p.m0 - 1.0) /
                  ((p.m0 - 1.0 - p.alpha0) * (p.m0 - 1.0 - p.alpha0));
    CHECK(std::abs(p.Z0_prime.real() - lead) < 0.1 * lead);
}

TEST_CASE("fixed-m curve replot stays on the imaginary-root locus") {
    auto pts = imaginary_root_curve_fixed_m(1.5, 2.0, 20.0, 40);
    CHECK(pts.size() > 5);
    for (const auto& q : pts) {
        double omega = std::log((1.5 + q.alpha) / (0.5 + q.alpha));
        double delta = q.alpha / (0.5 + q.alpha);
        CHECK(std::abs(U_eval(q.beta, delta, omega, Complex(0.0, q.y))) < 1e-10);
        CHECK(q.J == doctest::Approx(q.alpha * (omega + q.beta)).epsilon(1e-12));
    }
}
