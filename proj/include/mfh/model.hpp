#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "mfh/errors.hpp"

namespace mfh {

enum class RateKind { SmoothPolynomialRate, ToyStepRate, Custom };

// A single-neuron model: drift b (affine built-ins), jump rate f and their
// derivatives. The step rate has height 1/beta above the unit threshold and
// its derivative is undefined there; callers must split integrals at the
// threshold crossing instead of asking for a delta approximation.
struct ModelSpec {
    RateKind kind = RateKind::Custom;

    // rate parameters
    double beta = 0.1;    // ToyStepRate: f = (1/beta) * 1{x >= 1}
    double poly_p = 2.0;  // SmoothPolynomialRate: f = x^p

    // affine drift b(x) = drift_c0 + drift_c1 * x
    bool drift_affine = true;
    double drift_c0 = 0.0;
    double drift_c1 = 0.0;

    std::function<double(double)> custom_drift;
    std::function<double(double)> custom_drift_deriv;
    std::function<double(double)> custom_rate;
    std::function<double(double)> custom_rate_deriv;

    static ModelSpec toy(double beta, double m) {
        if (!(beta > 0.0)) throw ConfigError("toy model requires beta > 0");
        if (!(m > 1.0)) throw ConfigError("toy model requires m > 1");
        ModelSpec s;
        s.kind = RateKind::ToyStepRate;
        s.beta = beta;
        s.drift_affine = true;
        s.drift_c0 = m;
        s.drift_c1 = -1.0;
        return s;
    }

    // f = x^p with an affine drift c0 + c1 x.
    static ModelSpec poly(double p, double c0, double c1) {
        if (!(p >= 1.0)) throw ConfigError("polynomial rate requires p >= 1");
        if (c0 < 0.0) throw ConfigError("drift must satisfy b(0) >= 0");
        ModelSpec s;
        s.kind = RateKind::SmoothPolynomialRate;
        s.poly_p = p;
        s.drift_affine = true;
        s.drift_c0 = c0;
        s.drift_c1 = c1;
        return s;
    }

    static ModelSpec custom(std::function<double(double)> b,
                            std::function<double(double)> bp,
                            std::function<double(double)> f,
                            std::function<double(double)> fp) {
        ModelSpec s;
        s.kind = RateKind::Custom;
        s.drift_affine = false;
        s.custom_drift = std::move(b);
        s.custom_drift_deriv = std::move(bp);
        s.custom_rate = std::move(f);
        s.custom_rate_deriv = std::move(fp);
        if (s.custom_drift && s.custom_drift(0.0) < 0.0)
            throw ConfigError("drift must satisfy b(0) >= 0");
        return s;
    }

    double drift(double x) const {
        if (drift_affine) return drift_c0 + drift_c1 * x;
        return custom_drift(x);
    }
    double drift_deriv(double x) const {
        if (drift_affine) return drift_c1;
        return custom_drift_deriv(x);
    }
    double rate(double x) const {
        switch (kind) {
            case RateKind::ToyStepRate:
                return x >= 1.0 ? 1.0 / beta : 0.0;
            case RateKind::SmoothPolynomialRate:
                return x <= 0.0 ? 0.0 : std::pow(x, poly_p);
            case RateKind::Custom:
                return custom_rate(x);
        }
        return 0.0;
    }
    bool rate_deriv_defined_at(double x) const {
        if (kind == RateKind::ToyStepRate) return x != 1.0;
        return true;
    }
    double rate_deriv(double x) const {
        switch (kind) {
            case RateKind::ToyStepRate:
                if (x == 1.0)
                    throw DomainViolation("step rate derivative undefined at the threshold");
                return 0.0;
            case RateKind::SmoothPolynomialRate:
                return x <= 0.0 ? 0.0 : poly_p * std::pow(x, poly_p - 1.0);
            case RateKind::Custom:
                return custom_rate_deriv(x);
        }
        return 0.0;
    }
    // Rate discontinuity abscissas (empty for smooth rates).
    bool has_rate_jump() const { return kind == RateKind::ToyStepRate; }
    double rate_jump_at() const { return 1.0; }

    bool is_toy() const { return kind == RateKind::ToyStepRate && drift_affine && drift_c1 == -1.0; }
    double toy_m() const { return drift_c0; }
};

// Toy-model parameter block and the (alpha, m) <-> (omega, delta) change of
// variables. sigma = m + alpha is the rest point of the constant-current flow,
// omega the time the flow started at 0 needs to reach the unit threshold.
struct ToyParams {
    double beta = 0.1;
    double m = 1.5;
    double alpha = 1.0;

    ToyParams() = default;
    ToyParams(double beta_, double m_, double alpha_) : beta(beta_), m(m_), alpha(alpha_) {
        if (!(beta > 0.0) || !(m > 1.0) || alpha < 0.0)
            throw ConfigError("ToyParams requires beta > 0, m > 1, alpha >= 0");
    }

    double sigma() const { return m + alpha; }
    double omega() const { return std::log(sigma() / (sigma() - 1.0)); }
    double delta() const { return alpha / (m + alpha - 1.0); }

    static ToyParams from_omega_delta(double beta, double omega, double delta) {
        if (!(omega > 0.0) || delta < 0.0 || delta >= 1.0)
            throw ConfigError("inverse map requires omega > 0, delta in [0,1)");
        double em1 = std::expm1(omega);
        return ToyParams(beta, 1.0 + (1.0 - delta) / em1, delta / em1);
    }

    ModelSpec model() const { return ModelSpec::toy(beta, m); }
};

}  // namespace mfh
