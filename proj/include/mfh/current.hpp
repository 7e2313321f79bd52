#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfh/errors.hpp"
#include "mfh/numerics.hpp"

namespace mfh {

// A continuous T-periodic external current with T = 2*pi*tau. The zero-mean
// part h lives on a fixed 2*pi circle as a truncated Fourier series
//   h(phase) = sum_n a_n cos(n phase) + b_n sin(n phase),
// so value(t) = mean + h(t / tau) in natural time. Constant currents are the
// degenerate case with no modes; their tau is a placeholder.
class PeriodicCurrent {
  public:
    PeriodicCurrent() = default;

    static PeriodicCurrent constant(double alpha) {
        PeriodicCurrent c;
        c.mean_ = alpha;
        c.tau_ = 1.0;
        return c;
    }

    static PeriodicCurrent from_harmonics(double alpha, double tau,
                                          std::vector<double> cos_coeffs,
                                          std::vector<double> sin_coeffs) {
        if (!(tau > 0.0)) throw ConfigError("PeriodicCurrent requires tau > 0");
        if (cos_coeffs.size() != sin_coeffs.size())
            throw ConfigError("cos/sin coefficient lists must have equal length");
        PeriodicCurrent c;
        c.mean_ = alpha;
        c.tau_ = tau;
        c.cos_ = std::move(cos_coeffs);
        c.sin_ = std::move(sin_coeffs);
        c.trim();
        return c;
    }

    static PeriodicCurrent cosine(double alpha, double amplitude, double tau,
                                  int harmonic = 1) {
        std::vector<double> a(static_cast<std::size_t>(harmonic), 0.0);
        std::vector<double> b(static_cast<std::size_t>(harmonic), 0.0);
        a.back() = amplitude;
        return from_harmonics(alpha, tau, std::move(a), std::move(b));
    }

    double mean() const { return mean_; }
    double tau() const { return tau_; }
    double period() const { return kTwoPi * tau_; }
    bool is_constant() const { return cos_.empty(); }
    std::size_t n_modes() const { return cos_.size(); }
    const std::vector<double>& cos_coeffs() const { return cos_; }
    const std::vector<double>& sin_coeffs() const { return sin_; }

    // Zero-mean profile on the 2*pi circle.
    double profile(double phase) const {
        double h = 0.0;
        for (std::size_t n = 0; n < cos_.size(); ++n) {
            double k = static_cast<double>(n + 1);
            h += cos_[n] * std::cos(k * phase) + sin_[n] * std::sin(k * phase);
        }
        return h;
    }

    // Natural-time evaluation.
    double value(double t) const { return mean_ + (cos_.empty() ? 0.0 : profile(t / tau_)); }

    // Current with profile shifted by theta (phase units): S_theta a.
    PeriodicCurrent shifted(double theta) const {
        PeriodicCurrent c = *this;
        for (std::size_t n = 0; n < cos_.size(); ++n) {
            double k = static_cast<double>(n + 1);
            double ck = std::cos(k * theta), sk = std::sin(k * theta);
            c.cos_[n] = cos_[n] * ck + sin_[n] * sk;
            c.sin_[n] = -cos_[n] * sk + sin_[n] * ck;
        }
        return c;
    }

    PeriodicCurrent with_tau(double tau) const {
        PeriodicCurrent c = *this;
        if (!(tau > 0.0)) throw ConfigError("PeriodicCurrent requires tau > 0");
        c.tau_ = tau;
        return c;
    }

    PeriodicCurrent with_mean(double alpha) const {
        PeriodicCurrent c = *this;
        c.mean_ = alpha;
        return c;
    }

    // Grid lower bound of the current over one period (exact for constants).
    double min_value(int scan = 4096) const {
        if (is_constant()) return mean_;
        double lo = value(0.0);
        for (int i = 1; i < scan; ++i) lo = std::min(lo, mean_ + profile(kTwoPi * i / scan));
        return lo;
    }

    double max_abs_profile(int scan = 4096) const {
        if (is_constant()) return 0.0;
        double hi = 0.0;
        for (int i = 0; i < scan; ++i) hi = std::max(hi, std::abs(profile(kTwoPi * i / scan)));
        return hi;
    }

  private:
    void trim() {
        while (!cos_.empty() && cos_.back() == 0.0 && sin_.back() == 0.0) {
            cos_.pop_back();
            sin_.pop_back();
        }
    }

    double mean_ = 0.0;
    double tau_ = 1.0;
    std::vector<double> cos_, sin_;
};

}  // namespace mfh
