#include "mfh/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mfh/flow.hpp"
#include "mfh/invariant.hpp"
#include "mfh/kernels.hpp"
#include "mfh/volterra.hpp"

namespace mfh {

namespace {

// (1 - e^{-z T}) / z with the removable point expanded in series
Complex one_minus_exp_over(Complex z, double T) {
    if (std::abs(z * T) < 1e-4) {
        Complex zt = z * T;
        return T * (1.0 - zt / 2.0 + zt * zt / 6.0 - zt * zt * zt / 24.0);
    }
    return (1.0 - std::exp(-z * T)) / z;
}

// (e^{w T} - 1) / w, removable at w = 0
Complex expm1_over(Complex w, double T) {
    if (std::abs(w * T) < 1e-4) {
        Complex wt = w * T;
        return T * (1.0 + wt / 2.0 + wt * wt / 6.0 + wt * wt * wt / 24.0);
    }
    return (std::exp(w * T) - 1.0) / w;
}

}  // namespace

struct TransformContext::Tables {
    double dt = 0.0;
    std::vector<double> H, K;      // fine grid on [0, horizon]
    double horizon = 0.0;
    double f_tail = 0.0;           // rate at the flow value reached at horizon
    // Psi on a coarser grid
    double dpsi = 0.0;
    std::vector<double> Psi;
};

TransformContext::TransformContext(const ModelSpec& model, double alpha)
    : model_(model), alpha_(alpha) {
    toy_ = model.is_toy();
    if (toy_) {
        ToyParams toy(model.beta, model.toy_m(), alpha);
        beta_ = model.beta;
        tstar_ = hitting_time(toy, 0.0);
        sigma_ = toy.sigma();
        gamma_ = 1.0 / (tstar_ + beta_);
        J_ = alpha * (toy.omega() + beta_);
        f_sigma_ = 1.0 / beta_;
        return;
    }

    RenewalKernel kern = RenewalKernel::from_constant_current(model, alpha);
    gamma_ = stationary_gamma(model, alpha);
    J_ = alpha / gamma_;
    SigmaAlpha sig = sigma_alpha(model, alpha);
    f_sigma_ = sig.finite ? model.rate(sig.value)
                          : model.rate(certify_decay(model, PeriodicCurrent::constant(alpha)).lambda0);

    auto tables = std::make_shared<Tables>();
    tables->dt = 5e-4;
    tables->horizon = kern.horizon;
    auto n = static_cast<std::size_t>(std::ceil(tables->horizon / tables->dt));
    tables->H.resize(n + 1);
    tables->K.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double t = tables->dt * static_cast<double>(i);
        tables->H[i] = kern.H(t);
        tables->K[i] = kern.K(t);
    }
    tables->f_tail = f_sigma_;

    // Psi(t) = gamma int_0^inf H(t+u) (f(phi_{t+u}) - f(phi_u)) / (b(phi_u)+alpha) du
    PeriodicCurrent cur = PeriodicCurrent::constant(alpha);
    const int stride = 8;
    tables->dpsi = tables->dt * stride;
    auto npsi = static_cast<std::size_t>(n / stride);
    tables->Psi.assign(npsi + 1, 0.0);
    // flow samples on the fine grid
    std::vector<double> phi(n + 1), fphi(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double t = tables->dt * static_cast<double>(i);
        phi[i] = flow(model, cur, t, 0.0, 0.0);
        fphi[i] = model.rate(phi[i]);
    }
    const int su = 4;  // u-substride
    const double du = tables->dt * su;
    for (std::size_t ip = 0; ip <= npsi; ++ip) {
        std::size_t it = ip * stride;
        double acc = 0.0;
        double prev = 0.0;
        bool first = true;
        for (std::size_t ju = 0; ju + it <= n; ju += su) {
            double denom = model.drift(phi[ju]) + alpha;
            double val = tables->H[it + ju] * (fphi[it + ju] - fphi[ju]) / denom;
            if (!first) acc += 0.5 * du * (prev + val);
            prev = val;
            first = false;
        }
        tables->Psi[ip] = gamma_ * acc;
    }
    tables_ = std::move(tables);
}

Complex TransformContext::laplace_H(Complex z) const {
    if (z.real() <= -f_sigma_ + 1e-12)
        throw DomainViolation("laplace_H: Re z outside the transform domain");
    if (toy_) {
        return one_minus_exp_over(z, tstar_) +
               beta_ * std::exp(-z * tstar_) / (1.0 + beta_ * z);
    }
    Complex head = laplace_of_sampled(tables_->H, tables_->dt, z);
    double T = tables_->dt * static_cast<double>(tables_->H.size() - 1);
    Complex tail = tables_->H.back() * std::exp(-z * T) / (z + tables_->f_tail);
    return head + tail;
}

Complex TransformContext::k_hat(Complex z) const {
    if (z.real() <= -f_sigma_ + 1e-12)
        throw DomainViolation("k_hat: Re z outside the transform domain");
    if (toy_) return std::exp(-z * tstar_) / (1.0 + beta_ * z);
    Complex head = laplace_of_sampled(tables_->K, tables_->dt, z);
    double T = tables_->dt * static_cast<double>(tables_->K.size() - 1);
    Complex tail = tables_->K.back() * std::exp(-z * T) / (z + tables_->f_tail);
    return head + tail;
}

Complex TransformContext::psi_hat(Complex z) const {
    if (toy_) {
        // J(alpha) Psi_hat(z) = alpha e^{-z t*} (e^{(z+1)t*} - 1) /
        //                       ((1+beta z)(m+alpha)(z+1))
        Complex num = alpha_ * std::exp(-z * tstar_) * expm1_over(z + 1.0, tstar_);
        Complex IPsiJ = num / ((1.0 + beta_ * z) * sigma_);
        return IPsiJ / J_;
    }
    return laplace_of_sampled(tables_->Psi, tables_->dpsi, z);
}

Complex TransformContext::theta_hat(Complex z) const {
    if (std::abs(z) < 1e-3) {
        // removable form Theta = Psi_hat / H_hat near z = 0
        return psi_hat(z) / laplace_H(z);
    }
    Complex Khat = k_hat(z);
    Complex denom = 1.0 - Khat;
    if (std::abs(denom) < 1e-10)
        throw PoleProximity("theta_hat: 1 - K_hat vanishes at the requested point");
    return z * psi_hat(z) * (1.0 + Khat / denom);
}

Complex TransformContext::stability_function(Complex z) const {
    return 1.0 - J_ * theta_hat(z);
}

Complex laplace_H(const ModelSpec& model, double alpha, Complex z) {
    return TransformContext(model, alpha).laplace_H(z);
}
Complex psi_hat(const ModelSpec& model, double alpha, Complex z) {
    return TransformContext(model, alpha).psi_hat(z);
}
Complex theta_hat(const ModelSpec& model, double alpha, Complex z) {
    return TransformContext(model, alpha).theta_hat(z);
}

// ---------------------------------------------------------------------------
// winding machinery
// ---------------------------------------------------------------------------

namespace {

// Sum of argument increments of F along the segment [a, b], refining until
// each increment is below pi/2.
double arg_change(const std::function<Complex(Complex)>& F, Complex a, Complex b,
                  Complex fa, Complex fb, int depth) {
    double d = std::arg(fb / fa);
    if (std::abs(d) < 1.0 || depth <= 0) return d;
    Complex m = 0.5 * (a + b);
    Complex fm = F(m);
    if (std::abs(fm) == 0.0) throw WindingInconsistent("root on subdivision boundary");
    return arg_change(F, a, m, fa, fm, depth - 1) + arg_change(F, m, b, fm, fb, depth - 1);
}

double boundary_winding(const std::function<Complex(Complex)>& F, const Rect& r,
                        double samples_per_unit) {
    const double w = r.re_hi - r.re_lo, h = r.im_hi - r.im_lo;
    const int base_w = std::max(8, static_cast<int>(std::ceil(w * samples_per_unit)));
    const int base_h = std::max(8, static_cast<int>(std::ceil(h * samples_per_unit)));
    std::vector<Complex> pts;
    for (int i = 0; i < base_w; ++i)
        pts.emplace_back(r.re_lo + w * i / base_w, r.im_lo);
    for (int i = 0; i < base_h; ++i)
        pts.emplace_back(r.re_hi, r.im_lo + h * i / base_h);
    for (int i = 0; i < base_w; ++i)
        pts.emplace_back(r.re_hi - w * i / base_w, r.im_hi);
    for (int i = 0; i < base_h; ++i)
        pts.emplace_back(r.re_lo, r.im_hi - h * i / base_h);
    pts.push_back(pts.front());

    std::vector<Complex> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        vals[i] = F(pts[i]);
        if (std::abs(vals[i]) == 0.0)
            throw WindingInconsistent("exact zero on rectangle boundary");
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += arg_change(F, pts[i], pts[i + 1], vals[i], vals[i + 1], 40);
    return total / kTwoPi;
}

Complex newton_polish(const std::function<Complex(Complex)>& F, Complex z0,
                      const Rect& box, double tol) {
    Complex z = z0;
    const double diag = std::hypot(box.re_hi - box.re_lo, box.im_hi - box.im_lo);
    auto contained = [&](Complex w) {
        return w.real() > box.re_lo - 0.5 * diag && w.real() < box.re_hi + 0.5 * diag &&
               w.imag() > box.im_lo - 0.5 * diag && w.imag() < box.im_hi + 0.5 * diag;
    };
    double fz = std::abs(F(z));
    for (int it = 0; it < 80; ++it) {
        double h = 1e-7 * (1.0 + std::abs(z));
        Complex df = (F(z + h) - F(z - h)) / (2.0 * h);
        if (std::abs(df) == 0.0) break;
        Complex step = F(z) / df;
        if (std::abs(step) > diag) step *= diag / std::abs(step);
        bool accepted = false;
        for (int half = 0; half < 20; ++half) {
            Complex trial = z - step;
            if (contained(trial)) {
                double ft;
                try {
                    ft = std::abs(F(trial));
                } catch (const NumericError&) {
                    ft = 1e300;
                }
                if (ft < fz || std::abs(step) < tol) {
                    z = trial;
                    fz = ft;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (std::abs(step) < tol) return z;
    }
    return z;
}

void subdivide(const std::function<Complex(Complex)>& F, const Rect& r, int depth,
               std::vector<Complex>& roots, const WindingOptions& opts) {
    double w = boundary_winding(F, r, opts.samples_per_unit);
    long n = std::lround(w);
    if (std::abs(w - static_cast<double>(n)) > 0.2)
        throw WindingInconsistent("non-integer boundary winding");
    if (n == 0) return;
    double width = r.re_hi - r.re_lo, height = r.im_hi - r.im_lo;
    if (n == 1 || (width < opts.min_box && height < opts.min_box)) {
        Complex center(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi));
        Complex z = newton_polish(F, center, r, opts.polish_tol);
        bool inside = z.real() > r.re_lo - 1e-6 && z.real() < r.re_hi + 1e-6 &&
                      z.imag() > r.im_lo - 1e-6 && z.imag() < r.im_hi + 1e-6;
        if (!inside && depth < opts.max_depth && (width > opts.min_box || height > opts.min_box)) {
            // polish escaped: split once more
        } else {
            for (long k = 0; k < n; ++k) roots.push_back(z);
            return;
        }
    }
    if (depth >= opts.max_depth)
        throw WindingInconsistent("subdivision depth exhausted");
    // pick a split line that stays away from zeros of F
    auto line_clear = [&](bool vertical, double pos) {
        double lo = vertical ? r.im_lo : r.re_lo;
        double hi = vertical ? r.im_hi : r.re_hi;
        std::array<double, 33> vals{};
        for (int k = 0; k <= 32; ++k) {
            double c = lo + (hi - lo) * k / 32.0;
            Complex z = vertical ? Complex(pos, c) : Complex(c, pos);
            vals[static_cast<std::size_t>(k)] = std::abs(F(z));
        }
        auto sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        double median = sorted[16];
        return sorted[0] > 1e-4 * (median + 1e-300);
    };
    static const double fractions[] = {0.5, 0.5703125, 0.4296875, 0.6328125, 0.3671875};
    bool vertical = width >= height;
    double lo = vertical ? r.re_lo : r.im_lo;
    double hi = vertical ? r.re_hi : r.im_hi;
    // try split lines until the children count consistently; a line through a
    // root shows up as an exact boundary zero or a count mismatch below
    std::string last_error = "subdivision failed";
    for (double f : fractions) {
        double mid = lo + f * (hi - lo);
        if (!line_clear(vertical, mid)) continue;
        Rect a = r, b = r;
        if (vertical) {
            a.re_hi = mid;
            b.re_lo = mid;
        } else {
            a.im_hi = mid;
            b.im_lo = mid;
        }
        std::size_t checkpoint = roots.size();
        try {
            subdivide(F, a, depth + 1, roots, opts);
            subdivide(F, b, depth + 1, roots, opts);
            return;
        } catch (const WindingInconsistent& e) {
            roots.resize(checkpoint);
            last_error = e.what();
        }
    }
    throw WindingInconsistent(last_error);
}

}  // namespace

std::vector<Complex> find_roots_winding(const std::function<Complex(Complex)>& F,
                                        const Rect& rect, const WindingOptions& opts) {
    std::vector<Complex> raw;
    double top = boundary_winding(F, rect, opts.samples_per_unit);
    long expected = std::lround(top);
    if (std::abs(top - static_cast<double>(expected)) > 0.2)
        throw WindingInconsistent("non-integer boundary winding at top level");
    if (expected == 0) return {};
    subdivide(F, rect, 0, raw, opts);

    // dedupe clusters
    std::vector<Complex> roots;
    for (Complex z : raw) {
        bool dup = false;
        for (Complex r : roots)
            if (std::abs(z - r) < 1e-7) dup = true;
        if (!dup) roots.push_back(z);
    }
    if (static_cast<long>(raw.size()) != expected)
        throw WindingInconsistent("winding count disagrees with polished roots");
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

// ---------------------------------------------------------------------------
// verdict
// ---------------------------------------------------------------------------

double lambda_star_estimate(const ModelSpec& model, double alpha) {
    TransformContext ctx(model, alpha);
    double bound = model.is_toy() ? 1.0 / model.beta
                                  : -ctx.domain_re_min();
    std::function<Complex(Complex)> F;
    if (model.is_toy()) {
        // zeros of H_hat equal the nonzero zeros of 1 + beta z - e^{-omega z};
        // dividing by z removes the spurious root at the origin
        double beta = model.beta;
        double omega = ToyParams(model.beta, model.toy_m(), alpha).omega();
        F = [beta, omega](Complex z) { return beta + one_minus_exp_over(z, omega); };
    } else {
        F = [&](Complex z) { return ctx.laplace_H(z); };
    }
    // progressive deepening: the rightmost zeros decide lambda_star, so stop
    // at the first band that contains any. Past depth 8 the value has no
    // effect on the verdict rectangle; report the band edge as a lower bound.
    double cap = std::min(0.999 * bound, 8.0);
    for (double L = 0.25; L < 2.0 * cap; L *= 2.0) {
        double depth = std::min(L, cap);
        Rect r;
        r.re_lo = -depth;
        r.re_hi = 1e-6;  // no zeros on the closed right half plane
        r.im_lo = -60.0;
        r.im_hi = 60.0;
        std::vector<Complex> zeros = find_roots_winding(F, r);
        if (!zeros.empty()) {
            double worst = -1e300;
            for (Complex z : zeros) worst = std::max(worst, z.real());
            return -worst;
        }
        if (depth >= cap) break;
    }
    return cap;
}

SpectralReport stability_verdict(const ModelSpec& model, double alpha,
                                 const VerdictOptions& opts) {
    TransformContext ctx(model, alpha);
    SpectralReport rep;
    rep.alpha = alpha;
    rep.J_at_alpha = ctx.J();
    rep.margin = opts.margin;
    rep.lambda_star = lambda_star_estimate(model, alpha);

    Rect r = opts.rect;
    if (!opts.rect_given) {
        double depth = 0.9 * std::min(-ctx.domain_re_min(), rep.lambda_star);
        r.re_lo = -depth;
        r.re_hi = 2.0;
        r.im_lo = -40.0;
        r.im_hi = 40.0;
    }
    rep.searched = r;

    auto F = [&](Complex z) { return ctx.stability_function(z); };
    rep.roots = find_roots_winding(F, r);

    // conjugate closure (real kernels)
    for (Complex z : rep.roots) {
        if (std::abs(z.imag()) < 1e-9) continue;
        bool paired = false;
        for (Complex w : rep.roots)
            if (std::abs(w - std::conj(z)) < 1e-6) paired = true;
        if (!paired)
            throw WindingInconsistent("root list not closed under conjugation");
    }

    double max_re = -1e300;
    Complex marginal(0.0, 0.0);
    for (Complex z : rep.roots) {
        if (z.real() > max_re) max_re = z.real();
        if (std::abs(z.real()) <= opts.margin && z.imag() >= 0.0) marginal = z;
    }
    if (rep.roots.empty() || max_re < -opts.margin) {
        rep.verdict = Stability::Stable;
    } else if (std::abs(max_re) <= opts.margin) {
        rep.verdict = Stability::Marginal;
        rep.marginal_root = marginal;
    } else {
        rep.verdict = Stability::Unstable;
    }
    return rep;
}

}  // namespace mfh
