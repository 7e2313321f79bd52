#include "mfh/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mfh/numerics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfh {

namespace {

// RK4 on the pair (phi, A) with phi' = scale*(b(phi) + a(t)), A' = scale*f(phi).
// For the step rate, A is reconstructed exactly from the threshold-crossing
// time so the discontinuity never enters a quadrature.
template <class CurrentFn>
struct PairIntegrator {
    const ModelSpec& model;
    CurrentFn a;
    double scale;
    bool step_rate;
    double step_height;

    double phi, A, t;
    bool crossed = false;
    double crossing = 0.0;

    PairIntegrator(const ModelSpec& m, CurrentFn cur, double sc, double t0, double x0)
        : model(m), a(cur), scale(sc),
          step_rate(m.kind == RateKind::ToyStepRate),
          step_height(step_rate ? sc / m.beta : 0.0),
          phi(x0), A(0.0), t(t0) {
        if (step_rate && x0 >= 1.0) {
            crossed = true;
            crossing = t0;
        }
    }

    double rhs(double tt, double y) const { return scale * (model.drift(y) + a(tt)); }

    void advance(double h) {
        double d0 = rhs(t, phi);
        double k2 = rhs(t + 0.5 * h, phi + 0.5 * h * d0);
        double k3 = rhs(t + 0.5 * h, phi + 0.5 * h * k2);
        double mid = phi + 0.5 * h * k2;
        double k4 = rhs(t + h, phi + h * k3);
        double phi1 = phi + h / 6.0 * (d0 + 2 * k2 + 2 * k3 + k4);
        if (step_rate) {
            if (!crossed && phi1 >= 1.0) {
                double d1 = rhs(t + h, phi1);
                double off = (phi >= 1.0) ? 0.0 : hermite_crossing(h, phi, d0, phi1, d1, 1.0);
                crossed = true;
                crossing = t + off;
            }
            if (crossed) A = step_height * (t + h - crossing);
        } else {
            A += scale * h / 6.0 *
                 (model.rate(phi) + 4.0 * model.rate(mid) + model.rate(phi1));
        }
        phi = phi1;
        t += h;
        if (!std::isfinite(phi) || std::abs(phi) > 1e12)
            throw FlowDivergence("kernel trajectory diverged");
    }
};

// Interval of w in [lo, hi] where P - c*w >= 0.
struct Interval {
    double lo, hi;
    bool empty() const { return !(hi > lo); }
};

inline Interval positive_part(double P, double c, double lo, double hi) {
    if (std::abs(c) < 1e-14) {
        if (P >= 0.0) return {lo, hi};
        return {0.0, -1.0};
    }
    double cut = P / c;
    if (c > 0.0) return {lo, std::min(hi, cut)};
    return {std::max(lo, cut), hi};
}

inline Interval negative_part(double P, double c, double lo, double hi) {
    if (std::abs(c) < 1e-14) {
        if (P < 0.0) return {lo, hi};
        return {0.0, -1.0};
    }
    double cut = P / c;
    if (c > 0.0) return {std::max(lo, cut), hi};
    return {lo, std::min(hi, cut)};
}

// Catmull-Rom basis in powers of u = w/delta, rows r = -1..2.
constexpr double kCR[4][4] = {
    {0.0, -0.5, 1.0, -0.5},
    {1.0, 0.0, -2.5, 1.5},
    {0.0, 0.5, 2.0, -1.5},
    {0.0, 0.0, -0.5, 0.5},
};

}  // namespace

// ---------------------------------------------------------------------------
// point kernels
// ---------------------------------------------------------------------------

namespace {

double cumulative_rate(const ModelSpec& model, const PeriodicCurrent& current,
                       double t, double s, double x, const FlowOptions& opts) {
    if (t < s) throw DomainViolation("survival: requires t >= s");
    if (x < 0.0) throw DomainViolation("survival: requires x >= 0");
    if (t == s) return 0.0;

    if (model.kind == RateKind::ToyStepRate && model.drift_affine &&
        current.is_constant() && !opts.force_numeric) {
        // exact: crossing time of the closed-form flow
        double alpha = current.mean();
        double c0 = model.drift_c0 + alpha, c1 = model.drift_c1;
        if (x >= 1.0) return (t - s) / model.beta;
        double tstar;
        if (c1 == 0.0) {
            if (c0 <= 0.0) return 0.0;
            tstar = (1.0 - x) / c0;
        } else {
            double xeq = -c0 / c1;
            if (c1 < 0.0 && xeq <= 1.0) return 0.0;  // never reaches the threshold
            tstar = std::log((xeq - x) / (xeq - 1.0)) / (-c1);
        }
        return (t - s) > tstar ? (t - s - tstar) / model.beta : 0.0;
    }

    auto a = [&](double u) { return current.value(u); };
    PairIntegrator integ(model, a, 1.0, s, x);
    double span = t - s;
    long long n = std::max<long long>(1, static_cast<long long>(std::ceil(span / opts.max_step)));
    if (n > opts.step_budget) throw FlowDivergence("survival: step budget exceeded");
    double h = span / static_cast<double>(n);
    for (long long i = 0; i < n; ++i) integ.advance(h);
    return integ.A;
}

}  // namespace

double survival(const ModelSpec& model, const PeriodicCurrent& current, double t,
                double s, double x, const FlowOptions& opts) {
    return std::exp(-cumulative_rate(model, current, t, s, x, opts));
}

double first_jump_density(const ModelSpec& model, const PeriodicCurrent& current,
                          double t, double s, double x, const FlowOptions& opts) {
    double H = survival(model, current, t, s, x, opts);
    double phi = flow(model, current, t, s, x, opts);
    return model.rate(phi) * H;
}

// ---------------------------------------------------------------------------
// decay certificate (natural time)
// ---------------------------------------------------------------------------

DecayCertificate certify_decay(const ModelSpec& model, const PeriodicCurrent& current) {
    DecayCertificate cert;
    if (model.kind == RateKind::ToyStepRate) {
        // Above the threshold the flow stays above it whenever
        // inf a > -b(1); then f(phi) = 1/beta for all lags past the slowest
        // crossing time.
        if (!model.drift_affine)
            throw TailNotConvergent("step rate requires an affine drift");
        double amin = current.min_value();
        double b1 = model.drift(1.0);
        if (amin + b1 <= 0.0)
            throw TailNotConvergent("step rate: current can push the flow back below threshold");
        if (model.drift(0.0) + amin <= 0.0)
            throw TailNotConvergent("current violates inf a > -b(0)");
        // worst-case crossing time: constant current at the lower envelope
        double c0 = model.drift_c0 + amin, c1 = model.drift_c1;
        if (c1 == 0.0) {
            cert.s0 = 1.0 / c0;
        } else {
            double xeq = -c0 / c1;
            if (c1 < 0.0 && xeq <= 1.0)
                throw TailNotConvergent("flow never reaches the threshold");
            cert.s0 = std::log(xeq / (xeq - 1.0)) / (-c1);
        }
        cert.lambda0 = 1.0;
        cert.f_lambda0 = 1.0 / model.beta;
        return cert;
    }
    // smooth rates: scan start phases, double the lag until f(min phi) > 0
    const int n_starts = current.is_constant() ? 1 : 32;
    double period = current.is_constant() ? 1.0 : current.period();
    for (double s0 = period; s0 <= 64.0 * period; s0 *= 2.0) {
        double lambda0 = 1e300;
        for (int i = 0; i < n_starts; ++i) {
            double s = period * i / n_starts;
            lambda0 = std::min(lambda0, flow(model, current, s + s0, s, 0.0));
        }
        if (model.rate(lambda0) > 0.0) {
            cert.lambda0 = lambda0;
            cert.f_lambda0 = model.rate(lambda0);
            cert.s0 = s0;
            return cert;
        }
    }
    throw TailNotConvergent("could not certify f(lambda0) > 0");
}

// ---------------------------------------------------------------------------
// KernelGrid
// ---------------------------------------------------------------------------

KernelGrid KernelGrid::build(const ModelSpec& model, const PeriodicCurrent& current,
                             int nodes_per_period, Exec exec, int substeps) {
    if (nodes_per_period < 8) throw ConfigError("KernelGrid: too few nodes");
    KernelGrid g;
    g.model_ = model;
    g.current_ = current;
    g.n_ = nodes_per_period;
    g.substeps_ = substeps;
    g.toy_ = model.kind == RateKind::ToyStepRate;
    const double tau = current.tau();
    if (g.toy_) g.q_ = tau / model.beta;

    DecayCertificate nat = certify_decay(model, current);
    g.cert_ = nat;
    // phase-time decay rate and horizon
    double q_decay = tau * nat.f_lambda0;
    double s0_phase = nat.s0 / tau;
    double lag_needed = s0_phase + 38.0 / q_decay;
    g.periods_ = static_cast<int>(std::clamp(std::ceil(lag_needed / kTwoPi), 1.0, 64.0));
    if (s0_phase + 38.0 / q_decay > 64.0 * kTwoPi)
        throw TailNotConvergent("KernelGrid: kernel decays too slowly for a bounded horizon");
    g.tail_bound_ = std::exp(-q_decay * (kTwoPi * g.periods_ - s0_phase));

    const int n = g.n_;
    const double delta = kTwoPi / n;
    const double h = delta / substeps;

    // current samples on the half-substep lattice of one period
    const int lattice = 2 * substeps * n;
    std::vector<double> cur(lattice);
    for (int l = 0; l < lattice; ++l)
        cur[l] = current.mean() + (current.is_constant() ? 0.0 : current.profile(kTwoPi * l / lattice));
    auto a_at = [&](double phase) {
        long long idx = llround(phase / kTwoPi * lattice);
        return cur[static_cast<std::size_t>(((idx % lattice) + lattice) % lattice)];
    };

    const int lag_nodes = g.periods_ * n + 1;
    if (g.toy_) {
        g.ustar_.assign(n, 0.0);
        g.dustar_.assign(n, 0.0);
    } else {
        g.phi_.assign(static_cast<std::size_t>(n) * lag_nodes, 0.0);
        g.A_.assign(static_cast<std::size_t>(n) * lag_nodes, 0.0);
    }

    auto run_start = [&](int j) {
        double s = delta * j;
        PairIntegrator integ(model, a_at, tau, s, 0.0);
        if (g.toy_) {
            long long max_steps = static_cast<long long>(lag_nodes) * substeps * 4;
            long long k = 0;
            while (!integ.crossed) {
                integ.advance(h);
                if (++k > max_steps)
                    throw TailNotConvergent("KernelGrid: no threshold crossing within horizon");
            }
            double ust = integ.crossing - s;
            g.ustar_[j] = ust;
            // d ustar / ds by implicit differentiation of phi_{s+u,s}(0) = 1
            double v0 = tau * (model.drift(0.0) + a_at(s));
            double v1 = tau * (model.drift(1.0) + a_at(s + ust));
            double E = std::exp(tau * model.drift_c1 * ust);
            g.dustar_[j] = v0 * E / v1 - 1.0;
        } else {
            double* phi_row = &g.phi_[static_cast<std::size_t>(j) * lag_nodes];
            double* A_row = &g.A_[static_cast<std::size_t>(j) * lag_nodes];
            phi_row[0] = 0.0;
            A_row[0] = 0.0;
            for (int node = 1; node < lag_nodes; ++node) {
                for (int ss = 0; ss < substeps; ++ss) integ.advance(h);
                phi_row[node] = integ.phi;
                A_row[node] = integ.A;
            }
        }
    };

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j) run_start(j);
    } else {
        for (int j = 0; j < n; ++j) run_start(j);
    }
    return g;
}

double KernelGrid::crossing_lag(double s) const {
    const double delta = dt();
    double sj = s / delta;
    double fl = std::floor(sj);
    int j = static_cast<int>(fl);
    double w = (sj - fl) * delta;
    int j0 = ((j % n_) + n_) % n_;
    int j1 = (j0 + 1) % n_;
    return hermite_value(delta, ustar_[j0], dustar_[j0], ustar_[j1], dustar_[j1], w);
}

double KernelGrid::interp_A(int j, double lag) const {
    const int lag_nodes = periods_ * n_ + 1;
    const double delta = dt();
    double pos = lag / delta;
    int c = static_cast<int>(std::floor(pos));
    c = std::clamp(c, 0, lag_nodes - 2);
    double u = pos - c;
    const double* A_row = &A_[static_cast<std::size_t>(j) * lag_nodes];
    int im1 = std::max(c - 1, 0);
    int ip2 = std::min(c + 2, lag_nodes - 1);
    double p0 = A_row[im1], p1 = A_row[c], p2 = A_row[c + 1], p3 = A_row[ip2];
    double out = 0.0;
    double pw[4] = {1.0, u, u * u, u * u * u};
    double pts[4] = {p0, p1, p2, p3};
    for (int r = 0; r < 4; ++r) {
        double b = 0.0;
        for (int m = 0; m < 4; ++m) b += kCR[r][m] * pw[m];
        out += b * pts[r];
    }
    return out;
}

double KernelGrid::interp_phi(int j, double lag) const {
    const int lag_nodes = periods_ * n_ + 1;
    const double delta = dt();
    double pos = lag / delta;
    int c = static_cast<int>(std::floor(pos));
    c = std::clamp(c, 0, lag_nodes - 2);
    double u = pos - c;
    const double* row = &phi_[static_cast<std::size_t>(j) * lag_nodes];
    int im1 = std::max(c - 1, 0);
    int ip2 = std::min(c + 2, lag_nodes - 1);
    double pts[4] = {row[im1], row[c], row[c + 1], row[ip2]};
    double pw[4] = {1.0, u, u * u, u * u * u};
    double out = 0.0;
    for (int r = 0; r < 4; ++r) {
        double b = 0.0;
        for (int m = 0; m < 4; ++m) b += kCR[r][m] * pw[m];
        out += b * pts[r];
    }
    return out;
}

double KernelGrid::H(double t, double s) const {
    double lag = t - s;
    if (lag < 0.0) return 0.0;
    if (toy_) {
        double ust = crossing_lag(s - kTwoPi * std::floor(s / kTwoPi));
        return lag < ust ? 1.0 : std::exp(-q_ * (lag - ust));
    }
    double sf = s - kTwoPi * std::floor(s / kTwoPi);
    int j = static_cast<int>(llround(sf / dt())) % n_;
    if (lag > lag_horizon()) {
        // exponential continuation at the terminal flow value
        const int lag_nodes = periods_ * n_ + 1;
        double A_end = A_[static_cast<std::size_t>(j) * lag_nodes + lag_nodes - 1];
        double f_end = model_.rate(phi_[static_cast<std::size_t>(j) * lag_nodes + lag_nodes - 1]);
        return std::exp(-A_end - tau() * f_end * (lag - lag_horizon()));
    }
    return std::exp(-interp_A(j, lag));
}

double KernelGrid::K(double t, double s) const {
    double lag = t - s;
    if (lag < 0.0) return 0.0;
    if (toy_) {
        double ust = crossing_lag(s - kTwoPi * std::floor(s / kTwoPi));
        return lag < ust ? 0.0 : q_ * std::exp(-q_ * (lag - ust));
    }
    double sf = s - kTwoPi * std::floor(s / kTwoPi);
    int j = static_cast<int>(llround(sf / dt())) % n_;
    if (lag > lag_horizon()) {
        const int lag_nodes = periods_ * n_ + 1;
        double f_end = model_.rate(phi_[static_cast<std::size_t>(j) * lag_nodes + lag_nodes - 1]);
        return tau() * f_end * H(t, s);
    }
    return tau() * model_.rate(interp_phi(j, lag)) * std::exp(-interp_A(j, lag));
}

double KernelGrid::H_periodized(double t, double s) const {
    double lag = t - s;
    lag -= kTwoPi * std::floor(lag / kTwoPi);
    double acc = 0.0;
    for (int k = 0; k <= periods_ + 2; ++k) acc += H(s + lag + kTwoPi * k, s);
    return acc;
}

double KernelGrid::K_periodized(double t, double s) const {
    double lag = t - s;
    lag -= kTwoPi * std::floor(lag / kTwoPi);
    double acc = 0.0;
    for (int k = 0; k <= periods_ + 2; ++k) acc += K(s + lag + kTwoPi * k, s);
    return acc;
}

double KernelGrid::column_mass(int j) const {
    const double U = lag_horizon();
    if (toy_) {
        double ust = ustar_[static_cast<std::size_t>(j)];
        return 1.0 - std::exp(-q_ * (U - ust));
    }
    // trapezoid over the lag nodes plus the survival remainder past the horizon
    const int lag_nodes = periods_ * n_ + 1;
    const double delta = dt();
    const double* A_row = &A_[static_cast<std::size_t>(j) * lag_nodes];
    const double* phi_row = &phi_[static_cast<std::size_t>(j) * lag_nodes];
    double acc = 0.0;
    double prev = tau() * model_.rate(phi_row[0]) * std::exp(-A_row[0]);
    for (int i = 1; i < lag_nodes; ++i) {
        double cur = tau() * model_.rate(phi_row[i]) * std::exp(-A_row[i]);
        acc += 0.5 * delta * (prev + cur);
        prev = cur;
    }
    return acc + std::exp(-A_row[lag_nodes - 1]);
}

void KernelGrid::to_csv(std::ostream& os, int stride) const {
    os << "t,s,H,K\n";
    for (int j = 0; j < n_; j += stride) {
        double s = node(j);
        for (int i = 0; i <= periods_ * n_; i += stride) {
            double t = s + dt() * i;
            os << t << ',' << s << ',' << H(t, s) << ',' << K(t, s) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// operators
// ---------------------------------------------------------------------------

void PhaseOperators::apply_K(const std::vector<double>& in, std::vector<double>& out) const {
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = &K[static_cast<std::size_t>(i) * n];
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * in[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
}

void PhaseOperators::apply_H(const std::vector<double>& in, std::vector<double>& out) const {
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = &H[static_cast<std::size_t>(i) * n];
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * in[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
}

namespace {

// Fills one output row (length n) of the K- and H-operators for output time t.
void fill_row_toy(const KernelGrid& g, double t, double* krow, double* hrow) {
    const int n = g.nodes();
    const double delta = g.dt();
    const double q = g.tau() / g.model().beta;
    const int kmax = g.tail_periods();
    const int n_sub = 4;

    for (int j = 0; j < n; ++j) {
        double sj = delta * j;
        double u0 = g.crossing_lag_node(j);
        double du0 = g.crossing_slope_node(j);
        double u1 = g.crossing_lag_node((j + 1) % n);
        double du1 = g.crossing_slope_node((j + 1) % n);

        // sub-sampled crossing lag, linear on each sub-cell
        double us[n_sub + 1];
        for (int m = 0; m <= n_sub; ++m)
            us[m] = hermite_value(delta, u0, du0, u1, du1, delta * m / n_sub);

        double u_cell_max = us[0];
        for (int m = 1; m <= n_sub; ++m) u_cell_max = std::max(u_cell_max, us[m]);

        for (int k = 0; k <= kmax; ++k) {
            double base = t + kTwoPi * k - sj;  // lag at the cell's left edge
            if (base <= 0.0) continue;          // whole cell ahead of t (k = 0)
            bool attenuated = q * (base - delta - u_cell_max) > 42.0;
            bool flat_possible = (base - delta) < u_cell_max;
            if (attenuated && !flat_possible) break;  // base grows with k

            for (int m = 0; m < n_sub; ++m) {
                double w0 = delta * m / n_sub;
                double w1 = delta * (m + 1) / n_sub;
                double gm = (us[m + 1] - us[m]) / (w1 - w0);
                double c = 1.0 + gm;
                double P = base - us[m] + gm * w0;  // D(w) = P - c w

                // K part: q e^{-q(P - c w)} on D >= 0
                Interval kv = positive_part(P, c, w0, w1);
                // H exp part: same region; H flat part: D < 0 and lag >= 0
                Interval hflat = negative_part(P, c, w0, std::min(w1, base));
                if (!kv.empty() && !attenuated) {
                    double mom[4];
                    exp_moments(q * c, kv.lo, kv.hi, 3, mom);
                    double scale = std::exp(-q * P);
                    for (int r = 0; r < 4; ++r) {
                        int col = ((j + r - 1) % n + n) % n;
                        double wk = 0.0, dpow = 1.0;
                        for (int mm = 0; mm < 4; ++mm) {
                            wk += kCR[r][mm] / dpow * mom[mm];
                            dpow *= delta;
                        }
                        krow[col] += q * scale * wk;
                        hrow[col] += scale * wk;
                    }
                }
                if (!hflat.empty()) {
                    double mom[4];
                    exp_moments(0.0, hflat.lo, hflat.hi, 3, mom);
                    for (int r = 0; r < 4; ++r) {
                        int col = ((j + r - 1) % n + n) % n;
                        double wk = 0.0, dpow = 1.0;
                        for (int mm = 0; mm < 4; ++mm) {
                            wk += kCR[r][mm] / dpow * mom[mm];
                            dpow *= delta;
                        }
                        hrow[col] += wk;
                    }
                }
            }
        }
    }
}

void fill_row_smooth(const KernelGrid& g, double t, double* krow, double* hrow) {
    // periodic trapezoid over cells with two-sided values at the lag-0 jump
    const int n = g.nodes();
    const double delta = g.dt();
    const int kmax = g.tail_periods();
    for (int j = 0; j < n; ++j) {
        double sl = delta * j;
        // fold the left-edge lag into [0, 2 pi)
        double lag_l = t - sl;
        lag_l -= kTwoPi * std::floor(lag_l / kTwoPi);
        if (lag_l == 0.0) lag_l = kTwoPi;  // left edge takes the just-spiked limit
        double lag_r = lag_l - delta;
        double kl = 0.0, hl = 0.0, kr = 0.0, hr = 0.0;
        for (int k = 0; k <= kmax; ++k) {
            double ll = lag_l + kTwoPi * k;
            double lr = lag_r + kTwoPi * k;
            if (ll <= g.lag_horizon()) {
                kl += g.K(sl + ll, sl);
                hl += g.H(sl + ll, sl);
            }
            if (lr >= 0.0 && lr <= g.lag_horizon()) {
                double sr = sl + delta;
                kr += g.K(sr + lr, sr);
                hr += g.H(sr + lr, sr);
            }
        }
        int jr = (j + 1) % n;
        krow[j] += 0.5 * delta * kl;
        krow[jr] += 0.5 * delta * kr;
        hrow[j] += 0.5 * delta * hl;
        hrow[jr] += 0.5 * delta * hr;
    }
}

}  // namespace

std::vector<double> phase_operator_row(const KernelGrid& grid, double t, bool survival_kernel) {
    t -= kTwoPi * std::floor(t / kTwoPi);  // the periodized kernels live on [0, 2 pi)
    std::vector<double> krow(static_cast<std::size_t>(grid.nodes()), 0.0);
    std::vector<double> hrow(static_cast<std::size_t>(grid.nodes()), 0.0);
    if (grid.step_rate())
        fill_row_toy(grid, t, krow.data(), hrow.data());
    else
        fill_row_smooth(grid, t, krow.data(), hrow.data());
    return survival_kernel ? hrow : krow;
}

PhaseOperators assemble_phase_operators(const KernelGrid& grid, Exec exec,
                                        bool full_doeblin_scan) {
    PhaseOperators ops;
    const int n = grid.nodes();
    ops.n = n;
    ops.tau = grid.tau();
    ops.tail_bound = grid.tail_bound();
    ops.K.assign(static_cast<std::size_t>(n) * n, 0.0);
    ops.H.assign(static_cast<std::size_t>(n) * n, 0.0);

    auto fill = [&](int i) {
        double t = grid.node(i);
        double* krow = &ops.K[static_cast<std::size_t>(i) * n];
        double* hrow = &ops.H[static_cast<std::size_t>(i) * n];
        if (grid.step_rate())
            fill_row_toy(grid, t, krow, hrow);
        else
            fill_row_smooth(grid, t, krow, hrow);
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) fill(i);
    } else {
        for (int i = 0; i < n; ++i) fill(i);
    }

    // Doeblin lower bound from point values of the periodized kernel
    double dmin = 1e300;
    int stride = full_doeblin_scan ? 1 : std::max(1, n / 64);
    for (int i = 0; i < n; i += stride)
        for (int j = 0; j < n; j += stride) {
            double v = grid.K_periodized(grid.node(i), grid.node(j));
            dmin = std::min(dmin, v);
        }
    ops.doeblin_delta = dmin;

    double colerr = 0.0;
    for (int j = 0; j < n; ++j) colerr = std::max(colerr, std::abs(grid.column_mass(j) - 1.0));
    ops.col_stoch_err = colerr;
    return ops;
}

}  // namespace mfh
