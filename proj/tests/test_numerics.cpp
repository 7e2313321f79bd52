#include "doctest.h"
#include "mfh/numerics.hpp"

#include <cmath>

using namespace mfh;

TEST_CASE("exp_moments matches quadrature") {
    double out[4];
    for (double sigma : {-30.0, -2.0, -1e-6, 0.0, 1e-6, 3.0}) {
        exp_moments(sigma, 0.2, 0.45, 3, out);
        for (int m = 0; m <= 3; ++m) {
            double ref = adaptive_simpson(
                [&](double w) { return std::exp(sigma * w) * std::pow(w, m); }, 0.2, 0.45,
                1e-14);
            CHECK(std::abs(out[m] - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("filon_linear matches quadrature") {
    for (Complex z : {Complex(0.0, 0.0), Complex(1e-7, 1e-7), Complex(0.5, 40.0),
                      Complex(-0.2, 3.0)}) {
        double a = 1.3, b = -0.7;
        double re = adaptive_simpson(
            [&](double u) { return std::exp(-z.real() * u) * std::cos(-z.imag() * u) * (a + b * u); },
            0.1, 0.35, 1e-14);
        double im = adaptive_simpson(
            [&](double u) { return std::exp(-z.real() * u) * std::sin(-z.imag() * u) * (a + b * u); },
            0.1, 0.35, 1e-14);
        Complex ref(re, im);
        Complex got = filon_linear(z, 0.1, 0.35, a, b);
        CHECK(std::abs(got - ref) < 1e-11);
    }
}

TEST_CASE("laplace_of_sampled reproduces an exponential transform") {
    double dt = 1e-3;
    std::vector<double> f;
    for (int i = 0; i <= 20000; ++i) f.push_back(std::exp(-2.0 * dt * i));
    Complex z(0.7, 5.0);
    Complex got = laplace_of_sampled(f, dt, z);
    Complex ref = (1.0 - std::exp(-(z + 2.0) * 20.0)) / (z + 2.0);
    CHECK(std::abs(got - ref) < 1e-7);
}

TEST_CASE("lu_solve on a known system") {
    std::vector<double> A = {2, 1, -1, -3, -1, 2, -2, 1, 2};
    std::vector<double> b = {8, -11, -3};
    lu_solve(A, b, 3);
    CHECK(b[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("fourier round trip on a band-limited grid function") {
    const int N = 256;
    std::vector<double> v(N);
    for (int i = 0; i < N; ++i) {
        double t = kTwoPi * i / N;
        v[i] = 0.3 + 1.7 * std::cos(t) - 0.4 * std::sin(3 * t) + 0.05 * std::cos(7 * t);
    }
    FourierCoeffs c = fourier_analyze(v, 8);
    CHECK(c.mean == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(c.cosc[0] == doctest::Approx(1.7).epsilon(1e-13));
    CHECK(c.sinc[2] == doctest::Approx(-0.4).epsilon(1e-13));
    for (int i = 0; i < N; ++i) {
        double t = kTwoPi * i / N;
        CHECK(std::abs(fourier_eval(c, t) - v[i]) < 1e-12);
    }
}

TEST_CASE("hermite_crossing finds the level crossing of a cubic") {
    auto y = [](double t) { return t * t * t - t + 0.2; };
    auto d = [](double t) { return 3 * t * t - 1; };
    double h = 0.6;
    double off = hermite_crossing(h, y(0.8), d(0.8), y(1.4), d(1.4), 0.5);
    CHECK(std::abs(y(0.8 + off) - 0.5) < 1e-12);
}
