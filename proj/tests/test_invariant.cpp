#include "doctest.h"
#include "mfh/invariant.hpp"

#include <cmath>

using namespace mfh;

TEST_CASE("toy gamma matches the hitting-time identity") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    double gamma = stationary_gamma(toy, 1.0);
    CHECK(gamma == doctest::Approx(1.0 / (std::log(5.0 / 3.0) + 0.1)).epsilon(1e-10));
}

TEST_CASE("normalization and support of the invariant measure") {
    for (double beta : {0.1, 0.5}) {
        for (double m : {1.2, 3.0}) {
            for (double alpha : {0.2, 1.0}) {
                ModelSpec toy = ModelSpec::toy(beta, m);
                InvariantMeasure meas = invariant_measure(toy, alpha);
                // sampled mass by midpoint rule
                double mass = 0.0;
                double h = meas.support_end / static_cast<double>(meas.x.size());
                for (double d : meas.density) mass += d * h;
                CHECK(mass == doctest::Approx(1.0).epsilon(2e-4));
                CHECK(meas.support_end == doctest::Approx(m + alpha).epsilon(1e-9));
                for (double d : meas.density) CHECK(d >= 0.0);
                // the two independent gamma routes
                CHECK(std::abs(meas.gamma - meas.gamma_transform) <=
                      1e-8 * std::abs(meas.gamma));
            }
        }
    }
}

TEST_CASE("density vanishes beyond sigma (step model piecewise form)") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    InvariantMeasure m = invariant_measure(toy, 1.0);
    // density approaches 0 at the support edge and the grid stops there
    CHECK(m.x.back() < 2.5);
    CHECK(m.density.back() < 1e-6);
    // closed piecewise form: gamma/(sigma - x) below the threshold
    for (std::size_t i = 0; i < m.x.size(); i += 101) {
        if (m.x[i] >= 1.0) break;
        CHECK(m.density[i] == doctest::Approx(m.gamma / (2.5 - m.x[i])).epsilon(1e-8));
    }
}

TEST_CASE("J(alpha) closed form, zero, and monotonicity") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    double omega = std::log(5.0 / 3.0);
    CHECK(J_of_alpha(toy, 1.0) == doctest::Approx(1.0 * (omega + 0.1)).epsilon(1e-12));
    CHECK(J_of_alpha(toy, 1.0) == doctest::Approx(0.6108256).epsilon(1e-6));
    CHECK(J_of_alpha(toy, 0.0) == 0.0);
    double prev = 0.0;
    for (int i = 1; i <= 50; ++i) {
        double a = 0.1 * i;
        double J = J_of_alpha(toy, a);
        CHECK(J > prev);
        prev = J;
    }
    // J * gamma = alpha by construction
    InvariantMeasure m = invariant_measure(toy, 0.7);
    CHECK(m.J_of_alpha * m.gamma == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("solve_alpha_for_J inverts the toy closed form") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    double J = J_of_alpha(toy, 1.0);
    auto roots = solve_alpha_for_J(toy, J);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-8));
    auto zero = solve_alpha_for_J(toy, 0.0);
    CHECK(zero == std::vector<double>{0.0});
}

TEST_CASE("solve_alpha_for_J finds a root for the polynomial model at J = 0.8") {
    ModelSpec poly = ModelSpec::poly(10.0, 2.0, -2.0);
    auto roots = solve_alpha_for_J(poly, 0.8);
    CHECK(roots.size() >= 1);
    for (double a : roots) {
        double gamma = stationary_gamma(poly, a);
        CHECK(a == doctest::Approx(0.8 * gamma).epsilon(1e-5));
    }
}

TEST_CASE("J' identities") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    JPrimeCheck chk = J_prime_check(toy, 1.0);
    double omega = std::log(5.0 / 3.0);
    double delta = 1.0 / 1.5;
    double closed = 0.1 + omega - delta * (1.0 - std::exp(-omega));
    CHECK(closed == doctest::Approx(0.3441590).epsilon(1e-6));
    CHECK(chk.identity == doctest::Approx(closed).epsilon(1e-9));
    CHECK(std::abs(chk.finite_difference - chk.identity) <=
          1e-5 * std::abs(chk.identity));
    CHECK(chk.relative_gap <= 1e-5);
}
