#include "doctest.h"
#include "mfh/flow.hpp"

#include <cmath>

using namespace mfh;

TEST_CASE("flow initial condition") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, 0.2, 1.0);
    CHECK(flow(toy, a, 2.0, 2.0, 0.7) == 0.7);
}

TEST_CASE("toy closed-form flow values") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    // sigma (1 - e^{-u}) from 0 under constant current
    double v = flow(toy, PeriodicCurrent::constant(1.0), 1.0, 0.0, 0.0);
    CHECK(v == doctest::Approx(2.5 * (1.0 - std::exp(-1.0))).epsilon(1e-12));
    CHECK(v == doctest::Approx(1.5803014).epsilon(1e-7));
    // relaxation limit at alpha = 0
    double w = flow(toy, PeriodicCurrent::constant(0.0), 40.0, 0.0, 0.0);
    CHECK(w == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("numeric flow agrees with the closed form") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    FlowOptions numeric;
    numeric.force_numeric = true;
    for (double span : {0.3, 1.0, 2.7}) {
        double exact = flow(toy, PeriodicCurrent::constant(1.0), span, 0.0, 0.4);
        double rk4 = flow(toy, PeriodicCurrent::constant(1.0), span, 0.0, 0.4, numeric);
        CHECK(std::abs(exact - rk4) < 1e-11);
    }
}

TEST_CASE("flow semigroup property under a periodic current") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, 0.3, 0.7);
    double s = 0.2, u = 1.1, t = 2.6, x = 0.4;
    double one_hop = flow(toy, a, t, s, x);
    double two_hop = flow(toy, a, t, u, flow(toy, a, u, s, x));
    CHECK(std::abs(one_hop - two_hop) < 1e-10);
}

TEST_CASE("flow is monotone in x and in the start time") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, 0.3, 0.7);
    double t = 3.0;
    double prev = flow(toy, a, t, 0.0, 0.0);
    for (double x : {0.1, 0.5, 1.2}) CHECK(flow(toy, a, t, 0.0, x) > prev);
    // s -> phi_{t,s}(0) strictly decreasing
    double last = 1e300;
    for (double s : {0.0, 0.7, 1.5, 2.4, 2.9}) {
        double v = flow(toy, a, t, s, 0.0);
        CHECK(v < last);
        last = v;
    }
}

TEST_CASE("flow stays below the enlarged rest point") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    double eta = 0.3;
    PeriodicCurrent a = PeriodicCurrent::cosine(1.0, eta, 1.0);
    double bound = 1.5 + 1.0 + eta;  // sigma_{alpha + eta}
    for (double s : {0.0, 1.0, 3.0})
        CHECK(flow(toy, a, s + 15.0, s, 0.0) <= bound + 1e-9);
}

TEST_CASE("hitting time closed form and quadrature") {
    ToyParams toy(0.1, 1.5, 0.0);
    CHECK(hitting_time(toy, 1.0) == 0.0);
    CHECK(hitting_time(toy, 0.0) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    ToyParams toy1(0.1, 1.5, 1.0);
    CHECK(hitting_time(toy1, 0.0) == doctest::Approx(std::log(5.0 / 3.0)).epsilon(1e-14));
    CHECK(hitting_time(toy1, 0.0) == doctest::Approx(toy1.omega()).epsilon(1e-14));
    // numeric quadrature route
    CHECK(hitting_time(toy.model(), 0.0, 0.0) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-11));
    // strictly decreasing in x
    double prev = hitting_time(toy, 0.0);
    for (double x : {0.2, 0.5, 0.9}) {
        double v = hitting_time(toy, x);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("sigma_alpha cases") {
    SigmaAlpha s = sigma_alpha(ModelSpec::toy(0.1, 1.5), 1.0);
    CHECK(s.finite);
    CHECK(s.value == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(s.drift_slope == doctest::Approx(-1.0));
    CHECK(s.nondegenerate);

    SigmaAlpha f1 = sigma_alpha(ModelSpec::poly(10.0, 2.0, -2.0), 0.0);
    CHECK(f1.finite);
    CHECK(f1.value == doctest::Approx(1.0).epsilon(1e-10));

    SigmaAlpha inf = sigma_alpha(ModelSpec::poly(2.0, 1.0, 0.0), 0.5);
    CHECK_FALSE(inf.finite);
    CHECK(inf.inf_gap == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("toy parameter round trip") {
    for (double beta : {0.05, 0.1}) {
        for (double m : {1.2, 1.5, 3.0}) {
            for (double alpha : {0.2, 1.0, 3.0}) {
                ToyParams p(beta, m, alpha);
                ToyParams q = ToyParams::from_omega_delta(beta, p.omega(), p.delta());
                CHECK(std::abs(q.alpha - alpha) < 1e-14 * std::max(1.0, alpha));
                CHECK(std::abs(q.m - m) < 1e-14 * m);
            }
        }
    }
}

TEST_CASE("step-rate derivative is flagged at the threshold") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    CHECK(toy.rate_deriv_defined_at(0.5));
    CHECK(toy.rate_deriv(0.5) == 0.0);
    CHECK_FALSE(toy.rate_deriv_defined_at(1.0));
    CHECK_THROWS_AS(toy.rate_deriv(1.0), DomainViolation);
}

TEST_CASE("flow rejects a current violating the drift floor") {
    ModelSpec toy = ModelSpec::toy(0.1, 1.5);
    PeriodicCurrent bad = PeriodicCurrent::constant(-2.0);
    CHECK_THROWS_AS(flow(toy, bad, 1.0, 0.0, 0.0), DomainViolation);
}
