#include "mfh/particle.hpp"

#include <algorithm>
#include <cmath>

#include "mfh/invariant.hpp"
#include "mfh/numerics.hpp"
#include "mfh/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfh {

namespace {

constexpr std::uint64_t kStreamDynamics = 0;
constexpr std::uint64_t kStreamInit = 1;

struct ToyRate {
    double inv_beta;
    double operator()(double x) const { return x >= 1.0 ? inv_beta : 0.0; }
};

struct PolyRate {
    double p;
    int ip;         // integer exponent fast path, 0 when fractional
    explicit PolyRate(double p_) : p(p_) {
        double r = std::round(p_);
        ip = (std::abs(p_ - r) < 1e-12 && r >= 1.0 && r <= 64.0) ? static_cast<int>(r) : 0;
    }
    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (ip == 0) return std::pow(x, p);
        double acc = 1.0, base = x;
        int e = ip;
        while (e > 0) {
            if (e & 1) acc *= base;
            base *= base;
            e >>= 1;
        }
        return acc;
    }
};

struct CustomRate {
    const ModelSpec* spec;
    double operator()(double x) const { return spec->rate(x); }
};

struct StepResult {
    long long count = 0;
    double max_x = 0.0;
};

// one micro step over a contiguous index range; resets spikers, advances the
// rest, collects raster entries for watched ids. The spike probability uses
// the rate integrated along the deterministic within-step flow (exact for the
// step rate, Simpson for smooth rates), so the thinning bias is O(dt^2).
template <class Rate>
StepResult step_range(const Rate& f, const ModelSpec& model, std::vector<double>& x,
                      const std::vector<std::uint32_t>& ids, const SimConfig& cfg,
                      long long step_index, double t_next, double dt, double exp_c1_dt,
                      double exp_c1_half, double xeq, std::vector<std::uint8_t>& spiked,
                      std::vector<RasterEntry>& raster, long long lo, long long hi) {
    StepResult res;
    const bool aff = model.drift_affine;
    const bool aff_exp = aff && model.drift_c1 != 0.0;
    const bool toy = model.kind == RateKind::ToyStepRate && aff_exp;
    const double c0 = model.drift_c0;
    const double c1 = model.drift_c1;
    // step model: potentials beyond x_reach cross the threshold inside the
    // step and accumulate rate for the remaining time
    double x_reach = 1e300;
    if (toy) x_reach = xeq + (1.0 - xeq) / exp_c1_dt;  // flow back from 1
    for (long long i = lo; i < hi; ++i) {
        double xi = x[static_cast<std::size_t>(i)];
        double x_new;
        if (aff_exp) {
            x_new = xeq + (xi - xeq) * exp_c1_dt;
        } else if (aff) {
            x_new = xi + c0 * dt;
        } else {
            auto b = [&](double y) { return model.drift(y); };
            double k1 = b(xi);
            double k2 = b(xi + 0.5 * dt * k1);
            double k3 = b(xi + 0.5 * dt * k2);
            double k4 = b(xi + dt * k3);
            x_new = xi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        // within-step rate integral
        double A;
        if (toy) {
            if (xi >= 1.0) {
                A = f(xi) * dt;
            } else if (xi > x_reach && xeq > 1.0) {
                double cross = std::log((xeq - xi) / (xeq - 1.0)) / (-c1);
                A = (dt - cross) * f(1.0);
            } else {
                A = 0.0;
            }
        } else {
            double fx = f(xi);
            if (fx == 0.0 && f(x_new) == 0.0) {
                A = 0.0;
            } else {
                double mid = aff_exp ? xeq + (xi - xeq) * exp_c1_half
                                     : 0.5 * (xi + x_new);
                A = dt / 6.0 * (fx + 4.0 * f(mid) + f(x_new));
            }
        }
        bool spike = false;
        if (A > 0.0) {
            double u = counter_u01(cfg.seed, kStreamDynamics,
                                   ids[static_cast<std::size_t>(i)],
                                   static_cast<std::uint64_t>(step_index));
            spike = u < -std::expm1(-A);
        }
        if (spike) {
            spiked[static_cast<std::size_t>(i)] = 1;
            x_new = 0.0;
            ++res.count;
            std::uint32_t id = ids[static_cast<std::size_t>(i)];
            if (id < cfg.raster_neurons &&
                static_cast<long long>(raster.size()) < cfg.raster_cap)
                raster.push_back({id, static_cast<float>(t_next)});
        } else {
            spiked[static_cast<std::size_t>(i)] = 0;
        }
        x[static_cast<std::size_t>(i)] = x_new;
        res.max_x = std::max(res.max_x, x_new);
    }
    return res;
}

template <class Rate>
SimOutput run_sim(const ModelSpec& model, const Rate& f, const SimConfig& cfg,
                  std::vector<double> x, const std::vector<std::uint32_t>& ids) {
    const auto N = static_cast<long long>(x.size());
    const double kick_unit = cfg.J / static_cast<double>(N);
    const double c0 = model.drift_c0, c1 = model.drift_c1;
    const double xeq = (model.drift_affine && c1 != 0.0) ? -c0 / c1 : 0.0;

    auto n_bins = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt_bin));
    SimOutput out;
    out.bin_time.resize(n_bins);
    out.rate_series.assign(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b)
        out.bin_time[b] = (static_cast<double>(b) + 0.5) * cfg.dt_bin;

    std::vector<std::uint8_t> spiked(static_cast<std::size_t>(N), 0);
    double x_max = 0.0;
    for (double v : x) x_max = std::max(x_max, v);

#ifdef _OPENMP
    const int threads = (cfg.exec == Exec::Parallel) ? omp_get_max_threads() : 1;
#else
    const int threads = 1;
#endif
    std::vector<std::vector<RasterEntry>> raster_parts(static_cast<std::size_t>(threads));

    double t = 0.0;
    long long step_index = 0;
    double dt_sum = 0.0;

    for (std::size_t b = 0; b < n_bins; ++b) {
        const double bin_end = (static_cast<double>(b) + 1.0) * cfg.dt_bin;
        long long bin_spikes = 0;
        while (t < bin_end - 1e-12 * cfg.dt_bin) {
            double fmax = f(x_max);
            double dt = bin_end - t;
            if (fmax > 0.0) dt = std::min(dt, cfg.thinning_cap / fmax);
            if (dt < cfg.dt_min) {
                dt = cfg.dt_min;
                if (fmax * dt > 1.0)
                    throw RateExplosion("simulate: max f * dt_min = " +
                                        std::to_string(fmax * dt));
                dt = std::min(dt, bin_end - t);
            }
            const double t_next = t + dt;
            const double e_c1 =
                (model.drift_affine && c1 != 0.0) ? std::exp(c1 * dt) : 1.0;
            const double e_c1_half =
                (model.drift_affine && c1 != 0.0) ? std::exp(0.5 * c1 * dt) : 1.0;

            long long count = 0;
            double max_stepped = 0.0;
            if (threads > 1) {
#pragma omp parallel reduction(+ : count) reduction(max : max_stepped)
                {
#ifdef _OPENMP
                    int tid = omp_get_thread_num();
                    int nth = omp_get_num_threads();
#else
                    int tid = 0, nth = 1;
#endif
                    long long lo = N * tid / nth;
                    long long hi = N * (tid + 1) / nth;
                    StepResult r = step_range(f, model, x, ids, cfg, step_index, t_next,
                                              dt, e_c1, e_c1_half, xeq, spiked,
                                              raster_parts[static_cast<std::size_t>(tid)],
                                              lo, hi);
                    count += r.count;
                    max_stepped = std::max(max_stepped, r.max_x);
                }
            } else {
                StepResult r = step_range(f, model, x, ids, cfg, step_index, t_next, dt,
                                          e_c1, e_c1_half, xeq, spiked, raster_parts[0],
                                          0, N);
                count = r.count;
                max_stepped = r.max_x;
            }

            if (count > 0 && kick_unit != 0.0) {
                const double kick_all = kick_unit * static_cast<double>(count);
                const double kick_self = kick_unit * static_cast<double>(count - 1);
#pragma omp parallel for schedule(static) if (threads > 1)
                for (long long i = 0; i < N; ++i)
                    x[static_cast<std::size_t>(i)] +=
                        spiked[static_cast<std::size_t>(i)] ? kick_self : kick_all;
                x_max = max_stepped + kick_all;  // spikers stay below by construction
            } else {
                x_max = max_stepped;
            }

            bin_spikes += count;
            dt_sum += dt;
            t = t_next;
            ++step_index;
        }
        out.rate_series[b] =
            static_cast<double>(bin_spikes) / (static_cast<double>(N) * cfg.dt_bin);
        out.total_spikes += bin_spikes;
    }
    out.steps = step_index;
    out.mean_dt = step_index > 0 ? dt_sum / static_cast<double>(step_index) : 0.0;

    for (auto& part : raster_parts)
        out.raster.insert(out.raster.end(), part.begin(), part.end());
    std::sort(out.raster.begin(), out.raster.end(), [](RasterEntry a, RasterEntry b) {
        if (a.time != b.time) return a.time < b.time;
        return a.neuron < b.neuron;
    });
    if (static_cast<long long>(out.raster.size()) > cfg.raster_cap)
        out.raster.resize(static_cast<std::size_t>(cfg.raster_cap));

    try {
        OscillationReport osc =
            detect_oscillation(out.rate_series, cfg.dt_bin, 0.2 * cfg.t_end);
        out.dominant_freq = osc.dominant_freq;
        out.snr = osc.snr;
        out.oscillation_flag = osc.oscillating;
    } catch (const SeriesTooShort&) {
        // short runs simply skip the spectral summary
    }
    return out;
}

std::vector<double> draw_initial(const ModelSpec& model, const SimConfig& cfg) {
    std::vector<double> x(static_cast<std::size_t>(cfg.N));
    switch (cfg.init) {
        case InitLaw::Uniform01:
            for (long long i = 0; i < cfg.N; ++i)
                x[static_cast<std::size_t>(i)] = counter_u01(
                    cfg.seed, kStreamInit, static_cast<std::uint64_t>(i), 0);
            break;
        case InitLaw::PointMass:
            std::fill(x.begin(), x.end(), cfg.init_value);
            break;
        case InitLaw::InvariantAt: {
            double alpha = cfg.init_value;
            if (model.is_toy()) {
                double beta = model.beta;
                double sigma = model.toy_m() + alpha;
                double omega = std::log(sigma / (sigma - 1.0));
                double gamma = 1.0 / (omega + beta);
                for (long long i = 0; i < cfg.N; ++i) {
                    double u = counter_u01(cfg.seed, kStreamInit,
                                           static_cast<std::uint64_t>(i), 0);
                    double below = gamma * omega;
                    x[static_cast<std::size_t>(i)] =
                        u < below
                            ? sigma * -std::expm1(-u / gamma)
                            : sigma - (sigma - 1.0) *
                                          std::pow(1.0 - (u - below) / (gamma * beta),
                                                   beta);
                }
            } else {
                InvariantMeasure m = invariant_measure(model, alpha, 4096);
                std::vector<double> cdf(m.x.size(), 0.0);
                double acc = 0.0;
                for (std::size_t k = 1; k < m.x.size(); ++k) {
                    acc += 0.5 * (m.density[k] + m.density[k - 1]) * (m.x[k] - m.x[k - 1]);
                    cdf[k] = acc;
                }
                for (double& v : cdf) v /= acc;
                for (long long i = 0; i < cfg.N; ++i) {
                    double u = counter_u01(cfg.seed, kStreamInit,
                                           static_cast<std::uint64_t>(i), 0);
                    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
                    std::size_t k = std::min<std::size_t>(
                        static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
                    x[static_cast<std::size_t>(i)] = m.x[k];
                }
            }
            break;
        }
    }
    return x;
}

}  // namespace

SimOutput simulate_with_state(const ModelSpec& model, const SimConfig& config,
                              const std::vector<double>& x0,
                              const std::vector<std::uint32_t>& rng_ids) {
    if (x0.size() != rng_ids.size())
        throw ConfigError("simulate_with_state: potentials and ids must pair up");
    for (double v : x0)
        if (v < 0.0) throw ConfigError("simulate_with_state: potentials must be >= 0");
    switch (model.kind) {
        case RateKind::ToyStepRate:
            return run_sim(model, ToyRate{1.0 / model.beta}, config, x0, rng_ids);
        case RateKind::SmoothPolynomialRate:
            return run_sim(model, PolyRate(model.poly_p), config, x0, rng_ids);
        case RateKind::Custom:
            return run_sim(model, CustomRate{&model}, config, x0, rng_ids);
    }
    throw ConfigError("simulate_with_state: unknown model kind");
}

SimOutput simulate(const ModelSpec& model, const SimConfig& config) {
    if (config.N < 1) throw ConfigError("simulate: N must be >= 1");
    std::vector<double> x = draw_initial(model, config);
    std::vector<std::uint32_t> ids(static_cast<std::size_t>(config.N));
    for (long long i = 0; i < config.N; ++i)
        ids[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
    return simulate_with_state(model, config, x, ids);
}

OscillationReport detect_oscillation(const std::vector<double>& rate_series,
                                     double dt_bin, double burn_in,
                                     double snr_threshold) {
    auto skip = static_cast<std::size_t>(std::ceil(burn_in / dt_bin));
    if (rate_series.size() < skip + 32)
        throw SeriesTooShort("detect_oscillation: need at least 32 bins after burn-in");
    std::vector<double> series(rate_series.begin() + static_cast<std::ptrdiff_t>(skip),
                               rate_series.end());

    // averaging the periodogram over segments keeps the noise floor flat, so
    // a median-relative peak threshold stays meaningful
    const int segments = 4;
    const std::size_t n = (series.size() / segments) * segments;
    const std::size_t len = n / segments;
    const std::size_t half = len / 2;
    std::vector<double> power(half + 1, 0.0);
    for (int seg = 0; seg < segments; ++seg) {
        const double* s = series.data() + static_cast<std::ptrdiff_t>(seg * len);
        double mean = 0.0;
        for (std::size_t i = 0; i < len; ++i) mean += s[i];
        mean /= static_cast<double>(len);
        for (std::size_t k = 1; k <= half; ++k) {
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                double ang =
                    kTwoPi * static_cast<double>(k * i % len) / static_cast<double>(len);
                re += (s[i] - mean) * std::cos(ang);
                im -= (s[i] - mean) * std::sin(ang);
            }
            power[k] += re * re + im * im;
        }
    }
    std::size_t kstar = 1;
    for (std::size_t k = 2; k <= half; ++k)
        if (power[k] > power[kstar]) kstar = k;

    std::vector<double> off;
    for (std::size_t k = 1; k <= half; ++k) {
        if (k + 1 >= kstar && k <= kstar + 1) continue;
        off.push_back(power[k]);
    }
    std::sort(off.begin(), off.end());
    double median = off.empty() ? 0.0 : off[off.size() / 2];

    OscillationReport rep;
    rep.peak_bin = static_cast<int>(kstar);
    rep.dominant_freq = static_cast<double>(kstar) / (static_cast<double>(len) * dt_bin);
    rep.snr = median > 0.0 ? power[kstar] / median : 0.0;
    // at least 16 full cycles over the analyzed window
    rep.oscillating = rep.snr >= snr_threshold && kstar >= 16 / segments;
    return rep;
}

BatchStats batch_mean(const std::vector<double>& series, std::size_t burn_in_bins,
                      int batches) {
    if (series.size() <= burn_in_bins + static_cast<std::size_t>(batches))
        throw SeriesTooShort("batch_mean: series shorter than burn-in + batches");
    const std::size_t n = series.size() - burn_in_bins;
    const std::size_t len = n / static_cast<std::size_t>(batches);
    std::vector<double> means;
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i)
            acc += series[burn_in_bins + static_cast<std::size_t>(b) * len + i];
        means.push_back(acc / static_cast<double>(len));
    }
    BatchStats st;
    for (double m : means) st.mean += m;
    st.mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double m : means) var += sqr(m - st.mean);
    var /= static_cast<double>(batches - 1);
    st.stderr_mean = std::sqrt(var / static_cast<double>(batches));
    return st;
}

}  // namespace mfh
