#include "mfh/numerics.hpp"

#include <algorithm>
#include <cstdlib>

namespace mfh {

double bisect(const std::function<double(double)>& f, double a, double b,
              double fa, double fb, double xtol, int max_iter) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw NoRootInScan("bisect: interval does not bracket a sign change");
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        // secant proposal, clipped towards the midpoint for robustness
        double m = 0.5 * (a + b);
        double s = (fb != fa) ? (a - fa * (b - a) / (fb - fa)) : m;
        double x = (s > a + 0.25 * xtol && s < b - 0.25 * xtol) ? 0.5 * (s + m) : m;
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (fa > 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    return 0.5 * (a + b);
}

double hermite_crossing(double h, double y0, double d0, double y1, double d1,
                        double level) {
    double lo = 0.0, hi = h;
    double flo = y0 - level, fhi = y1 - level;
    if (flo == 0.0) return 0.0;
    if (fhi == 0.0) return h;
    if ((flo > 0) == (fhi > 0))
        throw NoRootInScan("hermite_crossing: endpoints do not bracket the level");
    for (int it = 0; it < 80 && (hi - lo) > 1e-16 * h; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = hermite_value(h, y0, d0, y1, d1, mid) - level;
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

void exp_moments(double sigma, double w0, double w1, int m_max, double* out) {
    double h = w1 - w0;
    if (h == 0.0) {
        for (int m = 0; m <= m_max; ++m) out[m] = 0.0;
        return;
    }
    // Work on the shifted variable v = w - w0 and expand back with binomials,
    // which keeps the recursion stable when w0 is large.
    double s = sigma;
    double base[4] = {0, 0, 0, 0};  // int_0^h e^{s v} v^m dv
    if (std::abs(s * h) < 1e-4) {
        // int v^m (1 + sv + (sv)^2/2 + (sv)^3/6 + (sv)^4/24) dv
        double pw = h;  // h^{m+1}
        for (int m = 0; m <= m_max; ++m) {
            base[m] = pw / (m + 1) + s * pw * h / (m + 2) +
                      s * s * pw * h * h / (2.0 * (m + 3)) +
                      s * s * s * pw * h * h * h / (6.0 * (m + 4)) +
                      s * s * s * s * pw * h * h * h * h / (24.0 * (m + 5));
            pw *= h;
        }
    } else {
        double eh = std::exp(s * h);
        base[0] = (eh - 1.0) / s;
        double pw = 1.0;  // h^m
        for (int m = 1; m <= m_max; ++m) {
            pw *= h;
            base[m] = (eh * pw - m * base[m - 1]) / s;
        }
    }
    double scale = std::exp(sigma * w0);
    // shift back: int_{w0}^{w1} e^{s w} w^m dw = e^{s w0} sum_k C(m,k) w0^{m-k} base[k]
    static const double binom[4][4] = {
        {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    for (int m = 0; m <= m_max; ++m) {
        double acc = 0.0;
        double w0pow = 1.0;
        for (int k = m; k >= 0; --k) {
            acc += binom[m][k] * w0pow * base[k];
            w0pow *= w0;
        }
        out[m] = scale * acc;
    }
}

Complex filon_linear(Complex z, double u0, double u1, double a, double b) {
    double h = u1 - u0;
    if (h == 0.0) return {0.0, 0.0};
    Complex zh = z * h;
    Complex e0 = std::exp(-z * u0);
    if (std::abs(zh) < 1e-5) {
        // series in zh for int_0^h e^{-z v} (a + b(u0+v)) dv
        Complex I0 = h * (1.0 - zh / 2.0 + zh * zh / 6.0 - zh * zh * zh / 24.0);
        Complex I1 = h * h * (0.5 - zh / 3.0 + zh * zh / 8.0 - zh * zh * zh / 30.0);
        return e0 * ((a + b * u0) * I0 + b * I1);
    }
    Complex em = std::exp(-zh);
    Complex I0 = (1.0 - em) / z;
    Complex I1 = (I0 - h * em) / z;
    return e0 * ((a + b * u0) * I0 + b * I1);
}

namespace {

constexpr double kCRBasis[4][4] = {
    {0.0, -0.5, 1.0, -0.5},
    {1.0, 0.0, -2.5, 1.5},
    {0.0, 0.5, 2.0, -1.5},
    {0.0, 0.0, -0.5, 0.5},
};

}  // namespace

Complex laplace_of_sampled(const std::vector<double>& f, double dt, Complex z,
                           const std::vector<double>& jumps) {
    Complex acc(0.0, 0.0);
    const std::size_t n = f.size();
    if (n < 2) return acc;

    // cell moments J_k = int_0^dt e^{-z v} v^k dv, shared by every regular
    // cell; e^{-z u0} advances by one complex multiply per cell
    Complex r = std::exp(-z * dt);
    Complex zdt = z * dt;
    Complex J[4];
    if (std::abs(zdt) < 1e-5) {
        for (int k = 0; k <= 3; ++k)
            J[k] = std::pow(dt, k + 1) *
                   (1.0 / (k + 1.0) - zdt / (k + 2.0) + zdt * zdt / (2.0 * (k + 3)) -
                    zdt * zdt * zdt / (6.0 * (k + 4)));
    } else {
        J[0] = (1.0 - r) / z;
        double hp = 1.0;
        for (int k = 1; k <= 3; ++k) {
            hp *= dt;
            J[k] = (static_cast<double>(k) * J[k - 1] - hp * r) / z;
        }
    }
    Complex M[4];
    for (int k = 0; k <= 3; ++k) M[k] = J[k] / std::pow(dt, k);

    Complex e0(1.0, 0.0);
    std::size_t renorm = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double u0 = dt * static_cast<double>(j);
        double u1 = u0 + dt;
        if (++renorm == 1024) {
            e0 = std::exp(-z * u0);
            renorm = 0;
        }
        double split = -1.0;
        bool near_jump = false;
        for (double d : jumps) {
            if (d > u0 + 1e-15 && d < u1 - 1e-15) split = d;
            if (std::abs(d - u0) < 1.5 * dt || std::abs(d - u1) < 1.5 * dt) near_jump = true;
        }
        double fl = f[j], fr = f[j + 1];
        if (split >= 0.0) {
            // one-sided linear pieces around the jump
            double fl2 = (j >= 1) ? f[j - 1] : fl;
            double bl = (j >= 1) ? (fl - fl2) / dt : 0.0;
            acc += filon_linear(z, u0, split, fl - bl * u0, bl);
            double fr2 = (j + 2 < n) ? f[j + 2] : fr;
            double br = (j + 2 < n) ? (fr2 - fr) / dt : 0.0;
            acc += filon_linear(z, split, u1, fr - br * u1, br);
        } else if (near_jump || j == 0 || j + 2 >= n) {
            // linear cell where a cubic stencil would straddle a jump or edge
            double b = (fr - fl) / dt;
            acc += e0 * (fl * M[0] + (b * dt) * M[1]);
        } else {
            // cubic cell against the exact exponential
            double p[4] = {f[j - 1], f[j], f[j + 1], f[j + 2]};
            Complex cell(0.0, 0.0);
            for (int k = 0; k <= 3; ++k) {
                double coef = 0.0;
                for (int q = 0; q < 4; ++q) coef += kCRBasis[q][k] * p[q];
                cell += coef * M[k];
            }
            acc += e0 * cell;
        }
        e0 *= r;
    }
    return acc;
}

void lu_solve(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(A[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double v = std::abs(A[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-300) throw DegenerateJacobian("lu_solve: singular matrix");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        double d = A[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = A[r * n + col] / d;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= A[ri * n + c] * b[c];
        b[ri] = acc / A[ri * n + ri];
    }
}

FourierCoeffs fourier_analyze(const std::vector<double>& values, std::size_t modes) {
    const std::size_t n = values.size();
    FourierCoeffs out;
    out.cosc.assign(modes, 0.0);
    out.sinc.assign(modes, 0.0);
    double mean = 0.0;
    for (double v : values) mean += v;
    out.mean = mean / static_cast<double>(n);
    const double two_pi_over_n = kTwoPi / static_cast<double>(n);
    for (std::size_t m = 1; m <= modes; ++m) {
        double ac = 0.0, as = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ang = two_pi_over_n * static_cast<double>(m * i % n);
            ac += values[i] * std::cos(ang);
            as += values[i] * std::sin(ang);
        }
        out.cosc[m - 1] = 2.0 * ac / static_cast<double>(n);
        out.sinc[m - 1] = 2.0 * as / static_cast<double>(n);
    }
    return out;
}

double fourier_eval(const FourierCoeffs& c, double t) {
    double v = c.mean;
    for (std::size_t m = 0; m < c.cosc.size(); ++m) {
        double k = static_cast<double>(m + 1);
        v += c.cosc[m] * std::cos(k * t) + c.sinc[m] * std::sin(k * t);
    }
    return v;
}

Complex fourier_mode(const std::vector<double>& values, int n) {
    const std::size_t N = values.size();
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        double ang = -kTwoPi * n * static_cast<double>(i) / static_cast<double>(N);
        acc += values[i] * Complex(std::cos(ang), std::sin(ang));
    }
    return acc / static_cast<double>(N);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw NumericError("fit_line: need at least two samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw NumericError("fit_line: degenerate abscissas");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

}  // namespace mfh
