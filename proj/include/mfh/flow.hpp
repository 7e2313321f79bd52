#pragma once

#include <optional>

#include "mfh/current.hpp"
#include "mfh/model.hpp"

namespace mfh {

struct FlowOptions {
    double max_step = 1e-3;        // RK4 step bound (natural time units)
    long long step_budget = 200'000'000;
    bool force_numeric = false;    // bypass closed forms (used for cross checks)
};

// phi^a_{t,s}(x): solves dphi/du = b(phi) + a(u) from (s, x) to t.
// Affine drift with constant current uses the closed form; everything else a
// fixed-step RK4 with step <= max_step.
double flow(const ModelSpec& model, const PeriodicCurrent& current, double t,
            double s, double x, const FlowOptions& opts = {});

// Time for the constant-current toy flow to reach the unit threshold from
// x in [0,1]: integral of 1/(b+alpha) over [x,1].
double hitting_time(const ToyParams& toy, double x);

// General hitting time of level 1 for (model, alpha), by quadrature of
// 1/(b+alpha); requires b+alpha > 0 on [x,1].
double hitting_time(const ModelSpec& model, double alpha, double x);

struct SigmaAlpha {
    bool finite = true;
    double value = 0.0;        // sigma_alpha when finite
    double drift_slope = 0.0;  // b'(sigma_alpha) when finite
    double inf_gap = 0.0;      // inf (b+alpha) when infinite
    bool nondegenerate = true;
};

// First zero of b + alpha on [0, infinity), or the infinite flag together with
// the positive lower bound of b + alpha. Bracketing scan + bisection on
// [0, 10(1+|b(0)|+alpha)].
SigmaAlpha sigma_alpha(const ModelSpec& model, double alpha);

}  // namespace mfh
