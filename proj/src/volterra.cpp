#include "mfh/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mfh/numerics.hpp"

namespace mfh {

namespace {

// Fine-grid kernel table for smooth constant-current models.
struct SmoothKernelTable {
    double dt = 2.5e-4;
    std::vector<double> phi, A;
    double horizon = 0.0;
    ModelSpec model;
    double alpha = 0.0;

    double interp(const std::vector<double>& v, double t) const {
        double pos = t / dt;
        auto c = static_cast<std::ptrdiff_t>(std::floor(pos));
        auto last = static_cast<std::ptrdiff_t>(v.size()) - 2;
        c = std::clamp<std::ptrdiff_t>(c, 0, last);
        double u = pos - static_cast<double>(c);
        auto im1 = std::max<std::ptrdiff_t>(c - 1, 0);
        auto ip2 = std::min<std::ptrdiff_t>(c + 2, last + 1);
        double p0 = v[im1], p1 = v[c], p2 = v[c + 1], p3 = v[ip2];
        // Catmull-Rom
        double u2 = u * u, u3 = u2 * u;
        return 0.5 * ((2.0 * p1) + (-p0 + p2) * u + (2 * p0 - 5 * p1 + 4 * p2 - p3) * u2 +
                      (-p0 + 3 * p1 - 3 * p2 + p3) * u3);
    }

    double H(double t) const {
        if (t <= 0.0) return 1.0;
        if (t >= horizon) {
            double fl = model.rate(phi.back());
            return std::exp(-interp(A, horizon)) * std::exp(-fl * (t - horizon));
        }
        return std::exp(-interp(A, t));
    }
    double K(double t) const {
        if (t < 0.0) return 0.0;
        double tt = std::min(t, horizon);
        double out = model.rate(interp(phi, tt)) * std::exp(-interp(A, tt));
        if (t > horizon) out *= std::exp(-model.rate(phi.back()) * (t - horizon));
        return out;
    }
};

}  // namespace

RenewalKernel RenewalKernel::from_constant_current(const ModelSpec& model, double alpha) {
    RenewalKernel k;
    if (model.kind == RateKind::ToyStepRate && model.drift_affine) {
        double m = model.drift_c0;
        double sigma = m + alpha;
        if (sigma <= 1.0) throw TailNotConvergent("toy kernel: flow never reaches threshold");
        double beta = model.beta;
        double tstar = std::log(sigma / (sigma - 1.0));
        k.K = [tstar, beta](double u) {
            return u >= tstar ? std::exp(-(u - tstar) / beta) / beta : 0.0;
        };
        k.H = [tstar, beta](double u) {
            return u >= tstar ? std::exp(-(u - tstar) / beta) : 1.0;
        };
        k.K_force = k.K;
        k.H_force = k.H;
        k.jumps = {tstar};
        k.kinks = {tstar};
        k.horizon = tstar + 42.0 * beta;
        return k;
    }

    auto table = std::make_shared<SmoothKernelTable>();
    table->model = model;
    table->alpha = alpha;
    DecayCertificate cert = certify_decay(model, PeriodicCurrent::constant(alpha));
    table->horizon = cert.s0 + 42.0 / cert.f_lambda0;
    auto n = static_cast<std::size_t>(std::ceil(table->horizon / table->dt)) + 1;
    table->phi.resize(n);
    table->A.resize(n);
    double phi = 0.0, A = 0.0;
    table->phi[0] = 0.0;
    table->A[0] = 0.0;
    const double h = table->dt;
    for (std::size_t i = 1; i < n; ++i) {
        auto rhs = [&](double y) { return model.drift(y) + alpha; };
        double k1 = rhs(phi);
        double k2 = rhs(phi + 0.5 * h * k1);
        double k3 = rhs(phi + 0.5 * h * k2);
        double k4 = rhs(phi + h * k3);
        double mid = phi + 0.5 * h * k2;
        double phi1 = phi + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        A += h / 6.0 * (model.rate(phi) + 4.0 * model.rate(mid) + model.rate(phi1));
        phi = phi1;
        table->phi[i] = phi;
        table->A[i] = A;
    }
    k.K = [table](double u) { return table->K(u); };
    k.H = [table](double u) { return table->H(u); };
    k.K_force = k.K;
    k.H_force = k.H;
    k.horizon = table->horizon;
    return k;
}

namespace {

// Product-integration convolution: the kernel F is integrated exactly (cell
// moments through its discontinuities) against piecewise-linear g, so the
// quadrature error involves only g''. Cells straddling a break of g itself
// (`val_breaks`: jumps and strong kinks of the solution) are re-integrated
// with one-sided linear models of g.
struct ValueBreak {
    double pos = 0.0;
    bool continuous = false;  // kink (continuous value) vs jump
};

class BreakAwareConv {
  public:
    BreakAwareConv(const std::function<double(double)>& F, double dt, std::size_t n,
                   std::vector<double> lag_breaks, std::vector<ValueBreak> val_breaks)
        : F_(F), dt_(dt), lag_breaks_(lag_breaks), val_breaks_(std::move(val_breaks)) {
        // per lag cell l (v in [(l-1)dt, l dt]):
        //   A_l = int F(v) dv,  B_l = int F(v) (l dt - v)/dt dv
        A_.assign(n + 2, 0.0);
        B_.assign(n + 2, 0.0);
        for (std::size_t l = 1; l <= n + 1; ++l) {
            double v0 = dt * static_cast<double>(l - 1);
            double v1 = dt * static_cast<double>(l);
            double cuts[6];
            int nc = 0;
            cuts[nc++] = v0;
            for (double d : lag_breaks)
                if (d > v0 + 1e-14 * dt && d < v1 - 1e-14 * dt && nc < 5) cuts[nc++] = d;
            cuts[nc++] = v1;
            double A = 0.0, Bm = 0.0;
            for (int p = 0; p + 1 < nc; ++p) {
                // Gauss-4 on each smooth piece
                static const double gx[4] = {0.06943184420297371, 0.3300094782075719,
                                             0.6699905217924281, 0.9305681557970263};
                static const double gw[4] = {0.1739274225687269, 0.3260725774312731,
                                             0.3260725774312731, 0.1739274225687269};
                double len = cuts[p + 1] - cuts[p];
                for (int q = 0; q < 4; ++q) {
                    double v = cuts[p] + gx[q] * len;
                    double w = gw[q] * len * F_(v);
                    A += w;
                    Bm += w * (v1 - v) / dt;
                }
            }
            A_[l] = A;
            B_[l] = Bm;
        }
    }

    double weight_diag() const { return B_[1]; }

    // convolution for target index i (t = i dt); when solve_mode is set,
    // g[i] is the still-unknown endpoint and its coefficient is omitted
    // (the caller folds weight_diag into the implicit solve)
    double operator()(const std::vector<double>& g, std::size_t i,
                      bool solve_mode = false) const {
        if (i == 0) return 0.0;
        const double t = dt_ * static_cast<double>(i);
        double acc = g[0] * (A_[i] - B_[i]);
        for (std::size_t j = 1; j < i; ++j)
            acc += g[j] * (A_[i - j] - B_[i - j] + B_[i - j + 1]);
        if (!solve_mode) acc += g[i] * B_[1];

        // correct cells containing breaks of g
        for (const ValueBreak& d : val_breaks_) {
            if (d.pos > 0.0 && d.pos < t) acc += cell_fix(g, i, d, t, solve_mode);
        }
        return acc;
    }

  private:
    double cell_fix(const std::vector<double>& g, std::size_t i, const ValueBreak& vb,
                    double t, bool solve_mode) const {
        const double u_break = vb.pos;
        auto j = static_cast<std::size_t>(std::floor(u_break / dt_));
        if (j >= i) return 0.0;
        if (solve_mode && j + 1 >= i) return 0.0;
        double u0 = dt_ * static_cast<double>(j);
        double u1 = u0 + dt_;
        if (u_break <= u0 + 1e-12 * dt_ || u_break >= u1 - 1e-12 * dt_) return 0.0;

        std::size_t l = i - j;  // lag cell index
        double naive = g[j] * (A_[l] - B_[l]) + g[j + 1] * B_[l];

        double sl = (j >= 1) ? (g[j] - g[j - 1]) / dt_ : 0.0;
        double sr;
        double right_anchor_u = u1, right_anchor_g = g[j + 1];
        if (j + 2 <= i) {
            sr = (g[j + 2] - g[j + 1]) / dt_;
        } else if (vb.continuous) {
            // no forward node yet: anchor by continuity across the kink
            double g_at_break = g[j] + sl * (u_break - u0);
            sr = (g[j + 1] - g_at_break) / (u1 - u_break);
            right_anchor_u = u_break;
            right_anchor_g = g_at_break;
        } else {
            sr = 0.0;
        }

        // piecewise Gauss-4 with one-sided linear g; F is evaluated directly
        // here, so split at its lag breaks too when they land in this cell
        double cuts[8];
        int nc = 0;
        cuts[nc++] = u0;
        cuts[nc++] = u_break;
        for (double d : lag_breaks_) {
            double u = t - d;
            if (u > u0 + 1e-14 * dt_ && u < u1 - 1e-14 * dt_ &&
                std::abs(u - u_break) > 1e-14 * dt_ && nc < 7)
                cuts[nc++] = u;
        }
        cuts[nc++] = u1;
        for (int a = 1; a < nc; ++a)
            for (int b = a; b > 0 && cuts[b] < cuts[b - 1]; --b)
                std::swap(cuts[b], cuts[b - 1]);
        double exact = 0.0;
        for (int p = 0; p + 1 < nc; ++p) {
            double aa = cuts[p], bb = cuts[p + 1];
            bool left = 0.5 * (aa + bb) < u_break;
            double anchor_u = left ? u0 : right_anchor_u;
            double anchor_g = left ? g[j] : right_anchor_g;
            double slope = left ? sl : sr;
            static const double gx[4] = {0.06943184420297371, 0.3300094782075719,
                                         0.6699905217924281, 0.9305681557970263};
            static const double gw[4] = {0.1739274225687269, 0.3260725774312731,
                                         0.3260725774312731, 0.1739274225687269};
            double len = bb - aa;
            for (int q = 0; q < 4; ++q) {
                double u = aa + gx[q] * len;
                exact += gw[q] * len * F_(t - u) * (anchor_g + slope * (u - anchor_u));
            }
        }
        return exact - naive;
    }

    const std::function<double(double)>& F_;
    double dt_;
    std::vector<double> A_, B_;
    std::vector<double> lag_breaks_;
    std::vector<ValueBreak> val_breaks_;
};

}  // namespace

RateSolution solve_rate(const RenewalKernel& kernel, double horizon, double dt,
                        double tolerance, double gamma_ref) {
    if (!(dt > 0.0) || !(horizon > dt)) throw ConfigError("solve_rate: bad grid");
    auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    RateSolution sol;
    sol.dt = dt;
    sol.gamma_ref = gamma_ref;
    sol.jumps = kernel.jumps;
    sol.t.resize(n + 1);
    sol.r.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) sol.t[i] = dt * static_cast<double>(i);

    // r has first-generation jumps where the forcing jumps, and derivative
    // kinks at sums of kernel jump lags.
    std::vector<ValueBreak> val_breaks;
    for (double d : kernel.jumps)
        for (int mult = 1; mult <= 3; ++mult)
            if (d * mult < horizon) val_breaks.push_back({d * mult, mult > 1});

    BreakAwareConv convK(kernel.K, dt, n, kernel.jumps, val_breaks);
    const double diag = 1.0 - convK.weight_diag();
    if (std::abs(diag) < 1e-12) throw GridTooCoarse("solve_rate: implicit diagonal collapsed");

    sol.r[0] = kernel.K_force(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        // conv over known values: temporarily treat r_i = 0, then solve the
        // implicit diagonal term in closed form
        sol.r[i] = 0.0;
        double conv = convK(sol.r, i, true);
        sol.r[i] = (kernel.K_force(sol.t[i]) + conv) / diag;
    }

    // mass identity residual on the same grid
    BreakAwareConv convH(kernel.H, dt, n, kernel.kinks, val_breaks);
    double worst = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        double lhs = kernel.H_force(sol.t[i]) + convH(sol.r, i);
        worst = std::max(worst, std::abs(lhs - 1.0));
    }
    sol.residual_mass = worst;
    if (worst > 10.0 * tolerance)
        throw GridTooCoarse("solve_rate: mass identity residual " + std::to_string(worst));

    if (gamma_ref != 0.0) {
        sol.xi.resize(sol.r.size());
        for (std::size_t i = 0; i < sol.r.size(); ++i) sol.xi[i] = sol.r[i] - gamma_ref;
    }
    return sol;
}

DecayFit stationary_rate_gap(const RateSolution& solution, double gamma) {
    if (solution.r.empty()) throw NumericError("stationary_rate_gap: empty solution");
    // below the quadrature bias the samples carry no decay information
    const double floor_level =
        std::max(1e-13 * std::max(1.0, std::abs(gamma)), 10.0 * solution.residual_mass);
    // first node where |xi| < 0.01 gamma
    std::size_t start = solution.r.size();
    for (std::size_t i = 0; i < solution.r.size(); ++i) {
        if (std::abs(solution.r[i] - gamma) < 0.01 * std::abs(gamma)) {
            start = i;
            break;
        }
    }
    if (start == solution.r.size())
        throw TailBelowFloor("stationary_rate_gap: xi never enters the fit window");

    // envelope: local maxima of |xi| in the window; monotone tails regress on
    // every sample above the floor instead
    std::vector<double> ts, logs;
    for (std::size_t i = std::max<std::size_t>(start, 1); i + 1 < solution.r.size(); ++i) {
        double a = std::abs(solution.r[i - 1] - gamma);
        double b = std::abs(solution.r[i] - gamma);
        double c = std::abs(solution.r[i + 1] - gamma);
        if (b >= a && b >= c && b > floor_level) {
            ts.push_back(solution.t[i]);
            logs.push_back(std::log(b));
        }
    }
    if (ts.size() < 5) {
        ts.clear();
        logs.clear();
        for (std::size_t i = start; i < solution.r.size(); ++i) {
            double b = std::abs(solution.r[i] - gamma);
            if (b > floor_level) {
                ts.push_back(solution.t[i]);
                logs.push_back(std::log(b));
            }
        }
    }
    if (ts.size() < 3) throw TailBelowFloor("stationary_rate_gap: tail hit machine noise");
    LineFit fit = fit_line(ts, logs);
    DecayFit out;
    out.lambda = -fit.slope;
    out.log_C = fit.intercept;
    out.window_start = solution.t[start];
    return out;
}

std::vector<double> solve_rate_two_time(const TwoTimeKernel& kernel, double s0,
                                        double t_end, double dt,
                                        double kernel_window) {
    auto n = static_cast<std::size_t>(std::llround((t_end - s0) / dt));
    std::vector<double> r(n + 1, 0.0);
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = s0 + dt * static_cast<double>(i);

    static const double gx[2] = {0.5 * (1.0 - 0.5773502691896257),
                                 0.5 * (1.0 + 0.5773502691896257)};

    r[0] = kernel.K(s0, s0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double ti = t[i];
        std::size_t j_lo = 0;
        if (ti - kernel_window > s0)
            j_lo = static_cast<std::size_t>(std::floor((ti - kernel_window - s0) / dt));

        double jump_u = std::nan("");
        if (kernel.jump_s) jump_u = kernel.jump_s(ti);

        // per-cell product integration: kernel at Gauss nodes against a
        // linear model of r; cells holding the kernel jump locus or a
        // solution break integrate the pieces one-sided
        double acc = 0.0;
        double c_diag = 0.0;
        for (std::size_t j = j_lo; j < i; ++j) {
            double u0 = t[j], u1 = t[j + 1];
            double cuts[5];
            int nc = 0;
            cuts[nc++] = u0;
            double vcut = std::nan("");
            if (std::isfinite(jump_u) && jump_u > u0 + 1e-13 * dt &&
                jump_u < u1 - 1e-13 * dt)
                cuts[nc++] = jump_u;
            for (double d : kernel.value_breaks)
                if (d > u0 + 1e-13 * dt && d < u1 - 1e-13 * dt && nc < 4) {
                    cuts[nc++] = d;
                    vcut = d;
                }
            cuts[nc++] = u1;
            for (int a = 1; a < nc; ++a)
                for (int b = a; b > 0 && cuts[b] < cuts[b - 1]; --b)
                    std::swap(cuts[b], cuts[b - 1]);

            double sl = (j >= 1) ? (r[j] - r[j - 1]) / dt : 0.0;
            double sr = (j + 2 <= i) ? (r[j + 2] - r[j + 1]) / dt : 0.0;
            bool last_cell = (j + 1 == i);

            for (int p = 0; p + 1 < nc; ++p) {
                double aa = cuts[p], bb = cuts[p + 1];
                double len = bb - aa;
                double mid = 0.5 * (aa + bb);
                for (double gxx : gx) {
                    double u = aa + gxx * len;
                    double Kv = kernel.K(ti, u);
                    double w = 0.5 * len * Kv;
                    // linear model of r on this piece
                    if (std::isfinite(vcut) && mid < vcut) {
                        acc += w * (r[j] + sl * (u - u0));
                    } else if (std::isfinite(vcut)) {
                        if (last_cell)
                            c_diag += w * 1.0;  // constant fallback on the unknown
                        else
                            acc += w * (r[j + 1] + sr * (u - u1));
                    } else {
                        // plain linear interpolation between the cell nodes
                        double wl = (u1 - u) / dt, wr = (u - u0) / dt;
                        acc += w * wl * r[j];
                        if (last_cell)
                            c_diag += w * wr;
                        else
                            acc += w * wr * r[j + 1];
                    }
                }
            }
        }
        double diag = 1.0 - c_diag;
        r[i] = (kernel.K(ti, s0) + acc) / diag;
    }
    return r;
}

std::vector<double> resolvent_apply(const std::vector<double>& h, double tau,
                                    double gamma, const RateSolution& constant_run) {
    const std::size_t N = h.size();
    const std::size_t modes = N / 3;
    FourierCoeffs coeffs = fourier_analyze(h, modes);
    if (std::abs(coeffs.mean) > 1e-10)
        throw DomainViolation("resolvent_apply: input must have zero mean");

    // xi-hat at z = i n / tau via the transform of the sampled tail; the run
    // carries its own discontinuity abscissas
    const std::vector<double>& jump_lags = constant_run.jumps;
    std::vector<double> out(N, 0.0);
    std::vector<double> tgrid(N);
    for (std::size_t i = 0; i < N; ++i) tgrid[i] = kTwoPi * static_cast<double>(i) / N;

    for (std::size_t m = 1; m <= modes; ++m) {
        double a = coeffs.cosc[m - 1], b = coeffs.sinc[m - 1];
        if (a == 0.0 && b == 0.0) continue;
        Complex z(0.0, static_cast<double>(m) / tau);
        Complex xi_hat = laplace_of_sampled(constant_run.xi, constant_run.dt, z, jump_lags);
        // symbol of r^{2pi}: tau*gamma/(i m) + xi_hat(i m / tau)
        Complex sym = tau * gamma / Complex(0.0, static_cast<double>(m)) + xi_hat;
        // h mode: a cos + b sin = Re{(a - i b) e^{i m t}}
        Complex amp(a, -b);
        Complex res = amp * sym;
        for (std::size_t i = 0; i < N; ++i) {
            double mt = static_cast<double>(m) * tgrid[i];
            out[i] += res.real() * std::cos(mt) - res.imag() * std::sin(mt);
        }
    }
    for (std::size_t i = 0; i < N; ++i) out[i] += h[i];
    return out;
}

}  // namespace mfh
