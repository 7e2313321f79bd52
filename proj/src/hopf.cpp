#include "mfh/hopf.hpp"

#include <algorithm>
#include <cmath>

#include "mfh/spectral.hpp"

namespace mfh {

namespace {

// z/(z+1) (1 - e^{-omega(z+1)}), series-expanded near z = -1
Complex ring_term(double omega, Complex z) {
    Complex w = z + 1.0;
    if (std::abs(w) < 1e-4) {
        // (1 - e^{-omega w})/w = omega (1 - omega w/2 + (omega w)^2/6 - ...)
        Complex ow = omega * w;
        Complex series = omega * (1.0 - ow / 2.0 + ow * ow / 6.0 - ow * ow * ow / 24.0);
        return z * series;
    }
    return z / w * (1.0 - std::exp(-omega * w));
}

}  // namespace

Complex U_eval(double beta, double delta, double omega, Complex z) {
    return delta * ring_term(omega, z) + std::exp(-omega * z) - (1.0 + beta * z);
}

Complex U_dz(double beta, double delta, double omega, Complex z) {
    Complex w = z + 1.0;
    Complex d_ring;
    if (std::abs(w) < 1e-4) {
        // d/dz [z (1-e^{-omega w})/w] with w = z+1, series in w
        Complex ow = omega * w;
        Complex g = omega * (1.0 - ow / 2.0 + ow * ow / 6.0 - ow * ow * ow / 24.0);
        Complex gp = omega * omega * (-0.5 + ow / 3.0 - ow * ow / 8.0);
        d_ring = g + (w - 1.0) * gp;  // z = w - 1
    } else {
        Complex em = std::exp(-omega * w);
        d_ring = (1.0 - em) / (w * w) + (w - 1.0) / w * omega * em;
    }
    return delta * d_ring - omega * std::exp(-omega * z) - beta;
}

Complex U_ddelta(double beta, double delta, double omega, Complex z) {
    (void)beta;
    (void)delta;
    return ring_term(omega, z);
}

Complex U_domega(double beta, double delta, double omega, Complex z) {
    (void)beta;
    return delta * z * std::exp(-omega * (z + 1.0)) - z * std::exp(-omega * z);
}

Complex U_dbeta(double beta, double delta, double omega, Complex z) {
    (void)beta;
    (void)delta;
    (void)omega;
    return -z;
}

CurvePoint imaginary_root_curve(double omega, double y) {
    if (!(y > 0.0)) throw DomainViolation("imaginary_root_curve: requires y > 0");
    double ew = std::exp(omega);
    double cy = std::cos(omega * y), sy = std::sin(omega * y);
    double den = y * y * ew - y * y * cy - y * sy;
    double scale = y * y * ew;
    if (std::abs(den) < 1e-9 * std::max(1.0, scale))
        throw DenominatorVanishes("imaginary_root_curve: common denominator ~ 0 at y=" +
                                  std::to_string(y));
    CurvePoint p;
    p.y = y;
    p.beta0 = ((1.0 + ew) * (1.0 - cy) - (ew - 1.0) * y * sy) / den;
    p.delta0 = ew * (1.0 + y * y) * (1.0 - cy) / den;
    return p;
}

std::vector<CurvePoint> imaginary_root_curve_samples(double omega, double y_lo,
                                                     double y_hi, int count) {
    std::vector<CurvePoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double y = y_lo + (y_hi - y_lo) * i / (count - 1);
        try {
            out.push_back(imaginary_root_curve(omega, y));
        } catch (const DenominatorVanishes&) {
            // pole of the parametrization; skip
        }
    }
    return out;
}

namespace {

// segment-segment intersection in the (beta, delta) plane
bool segments_intersect(const CurvePoint& a0, const CurvePoint& a1,
                        const CurvePoint& b0, const CurvePoint& b1, double* bx,
                        double* dx) {
    double p0x = a0.beta0, p0y = a0.delta0;
    double d0x = a1.beta0 - a0.beta0, d0y = a1.delta0 - a0.delta0;
    double p1x = b0.beta0, p1y = b0.delta0;
    double d1x = b1.beta0 - b0.beta0, d1y = b1.delta0 - b0.delta0;
    double det = d0x * d1y - d0y * d1x;
    if (std::abs(det) < 1e-300) return false;
    double rx = p1x - p0x, ry = p1y - p0y;
    double s = (rx * d1y - ry * d1x) / det;
    double u = (rx * d0y - ry * d0x) / (-det);
    if (s < 0.0 || s > 1.0 || u < 0.0 || u > 1.0) return false;
    *bx = p0x + s * d0x;
    *dx = p0y + s * d0y;
    return true;
}

}  // namespace

namespace {

// beta0 at y, infinity across parametrization poles
double beta_of_y(double omega, double y) {
    try {
        return imaginary_root_curve(omega, y).beta0;
    } catch (const DenominatorVanishes&) {
        return std::nan("");
    }
}

// refine the axis crossing beta0(y) = 0 near [ya, yb] (searched in a widened
// window, since the raw segment intersection is only grid accurate)
bool refine_axis_crossing(double omega, double ya, double yb, double* y_out) {
    double pad = 4.0 * (yb - ya);
    double lo = ya - pad, hi = yb + pad;
    const int scan = 64;
    double prev_y = lo;
    double prev_f = beta_of_y(omega, prev_y);
    for (int k = 1; k <= scan; ++k) {
        double y = lo + (hi - lo) * k / scan;
        double f = beta_of_y(omega, y);
        if (std::isfinite(prev_f) && std::isfinite(f) && (f > 0) != (prev_f > 0)) {
            *y_out = bisect([&](double yy) { return beta_of_y(omega, yy); }, prev_y, y,
                            prev_f, f, 1e-14);
            return true;
        }
        prev_y = y;
        prev_f = f;
    }
    return false;
}

}  // namespace

std::vector<MultiplePoint> curve_self_intersection_check(double omega, double y_lo,
                                                         double y_hi, double y_step) {
    if (y_step > omega / 64.0) y_step = omega / 64.0;
    std::vector<CurvePoint> pts;
    for (double y = y_lo; y <= y_hi; y += y_step) {
        try {
            CurvePoint p = imaginary_root_curve(omega, y);
            if (std::abs(p.beta0) < 5.0 && std::abs(p.delta0) < 5.0) pts.push_back(p);
        } catch (const DenominatorVanishes&) {
        }
    }
    std::vector<MultiplePoint> found;
    const double expected_delta = 2.0 / (1.0 + std::exp(-omega));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        // skip segments across parametrization gaps
        if (std::abs(pts[i + 1].y - pts[i].y) > 1.5 * y_step) continue;
        for (std::size_t j = i + 2; j + 1 < pts.size(); ++j) {
            if (std::abs(pts[j + 1].y - pts[j].y) > 1.5 * y_step) continue;
            double bx, dx;
            if (!segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1], &bx, &dx))
                continue;
            // candidate multiple point: both passes must cross the beta = 0
            // axis, and their delta values must coincide there
            double ya, yb;
            bool on_axis = refine_axis_crossing(omega, pts[i].y, pts[i + 1].y, &ya) &&
                           refine_axis_crossing(omega, pts[j].y, pts[j + 1].y, &yb);
            double da = 0.0, db = 0.0;
            if (on_axis) {
                da = imaginary_root_curve(omega, ya).delta0;
                db = imaginary_root_curve(omega, yb).delta0;
                on_axis = std::abs(da - db) < 1e-8 &&
                          (std::abs(da) < 1e-8 || std::abs(da - expected_delta) < 1e-8);
            }
            if (!on_axis)
                throw SpuriousIntersection(
                    "off-axis curve intersection at beta=" + std::to_string(bx) +
                    " delta=" + std::to_string(dx));
            MultiplePoint mp;
            mp.beta = 0.0;
            mp.delta = 0.5 * (da + db);
            mp.y_a = ya;
            mp.y_b = yb;
            bool dup = false;
            for (const auto& q : found)
                if (std::abs(q.delta - mp.delta) < 1e-6) dup = true;
            if (!dup) found.push_back(mp);
        }
    }
    return found;
}

std::vector<FixedMCurvePoint> imaginary_root_curve_fixed_m(double m, double y_lo,
                                                           double y_hi, int count) {
    if (!(m > 1.0)) throw ConfigError("fixed-m curve requires m > 1");
    std::vector<FixedMCurvePoint> out;
    auto mismatch = [&](double alpha, double y) {
        double omega = std::log((m + alpha) / (m + alpha - 1.0));
        CurvePoint p = imaginary_root_curve(omega, y);
        return p.delta0 - alpha / (m + alpha - 1.0);
    };
    for (int i = 0; i < count; ++i) {
        double y = y_lo + (y_hi - y_lo) * i / (count - 1);
        // scan alpha for sign changes of the delta mismatch
        const int scan = 400;
        const double a_max = 20.0;
        double prev_a = 1e-4;
        double prev_v;
        try {
            prev_v = mismatch(prev_a, y);
        } catch (const DenominatorVanishes&) {
            continue;
        }
        for (int k = 1; k <= scan; ++k) {
            double a = a_max * static_cast<double>(k) / scan;
            double v;
            try {
                v = mismatch(a, y);
            } catch (const DenominatorVanishes&) {
                prev_a = a;
                continue;
            }
            if ((v > 0) != (prev_v > 0)) {
                double root = bisect([&](double aa) { return mismatch(aa, y); }, prev_a, a,
                                     prev_v, v, 1e-12);
                double omega = std::log((m + root) / (m + root - 1.0));
                CurvePoint p = imaginary_root_curve(omega, y);
                if (p.beta0 > 0.0 && p.beta0 < 5.0) {
                    FixedMCurvePoint fp;
                    fp.y = y;
                    fp.beta = p.beta0;
                    fp.alpha = root;
                    fp.J = root * (omega + p.beta0);
                    out.push_back(fp);
                }
            }
            prev_a = a;
            prev_v = v;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// bifurcation point
// ---------------------------------------------------------------------------

BifurcationPoint construct_bifurcation_point(double omega0, double epsilon0,
                                             const BifurcationOptions& opts) {
    if (!(omega0 > 0.0) || !(epsilon0 > 0.0))
        throw ConfigError("construct_bifurcation_point: requires omega0, epsilon0 > 0");
    BifurcationPoint p;
    p.omega0 = omega0;
    p.epsilon0 = epsilon0;
    p.y0 = (kTwoPi / omega0) * (1.0 - epsilon0 / omega0);
    CurvePoint c = imaginary_root_curve(omega0, p.y0);
    p.beta0 = c.beta0;
    p.d0 = c.delta0;
    if (!(p.beta0 > 0.0) || !(p.d0 > 0.0) || p.d0 >= 1.0)
        throw ConfigError("construct_bifurcation_point: curve point outside the model range");
    double em1 = std::expm1(omega0);
    p.alpha0 = p.d0 / em1;
    p.m0 = 1.0 + (1.0 - p.d0) / em1;
    p.tau0 = 1.0 / p.y0;

    Complex iy(0.0, p.y0);
    p.residual_U = std::abs(U_eval(p.beta0, p.d0, omega0, iy));
    p.dU_dz = U_dz(p.beta0, p.d0, omega0, iy);
    p.check_simple_root = std::abs(p.dU_dz) > 1e-6 && p.residual_U < 1e-10;

    // implicit differentiation through (delta(alpha), omega(alpha)) at m0 fixed
    double denom = p.m0 + p.alpha0 - 1.0;
    double ddelta_dalpha = (p.m0 - 1.0) / (denom * denom);
    double domega_dalpha = 1.0 / (p.m0 + p.alpha0) - 1.0 / denom;
    Complex dz_ddelta = -U_ddelta(p.beta0, p.d0, omega0, iy) / p.dU_dz;
    Complex dz_domega = -U_domega(p.beta0, p.d0, omega0, iy) / p.dU_dz;
    p.Z0_prime = dz_ddelta * ddelta_dalpha + dz_domega * domega_dalpha;
    p.check_transversality = p.Z0_prime.real() > 0.0;

    // nonresonance: the stability function must stay away from 0 at the other
    // harmonics i n y0
    ToyParams toy(p.beta0, p.m0, p.alpha0);
    TransformContext ctx(toy.model(), p.alpha0);
    double min_gap = 1e300;
    for (int n = 2; n <= opts.nonresonance_max_mode; ++n) {
        Complex zn(0.0, p.y0 * static_cast<double>(n));
        double gap = std::abs(ctx.stability_function(zn));
        min_gap = std::min(min_gap, gap);
    }
    // n = 0 corresponds to J'(alpha) != 0
    double jp = p.beta0 + omega0 - p.d0 * (1.0 - std::exp(-omega0));
    min_gap = std::min(min_gap, std::abs(ctx.stability_function(Complex(0.0, 0.0))));
    p.nonresonance_min_gap = min_gap;
    p.check_nonresonance = min_gap > opts.nonresonance_tol && std::abs(jp) > 1e-12;

    if (opts.validate) {
        if (!p.check_simple_root)
            throw TransversalityFailed("dU/dz vanishes or U residual too large");
        if (!p.check_transversality)
            throw TransversalityFailed("Re Z0'(alpha0) <= 0");
        if (!p.check_nonresonance)
            throw ResonanceDetected("harmonic too close to the critical circle");
    }
    return p;
}

ToyParams bifurcation_toy_params(const BifurcationPoint& p) {
    return ToyParams(p.beta0, p.m0, p.alpha0);
}

}  // namespace mfh
