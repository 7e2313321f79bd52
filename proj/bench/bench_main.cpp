// Timing comparison of the serial reference implementations against the
// OpenMP paths: phase-kernel assembly and particle micro-stepping.

#include <chrono>
#include <cstdio>

#include "mfh/kernels.hpp"
#include "mfh/particle.hpp"
#include "mfh/periodic.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

template <class Fn>
double time_it(Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("omp max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif

    mfh::ModelSpec toy = mfh::ModelSpec::toy(0.1, 1.5);
    mfh::PeriodicCurrent cur = mfh::PeriodicCurrent::cosine(1.0, 0.05, 1.0);

    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");

    double ts = 0, tp = 0;
    {
        mfh::KernelGrid g;
        ts = time_it([&] { g = mfh::KernelGrid::build(toy, cur, 1024, mfh::Exec::Serial); });
        tp = time_it([&] { g = mfh::KernelGrid::build(toy, cur, 1024, mfh::Exec::Parallel); });
        std::printf("%-34s %10.4f %10.4f %8.2f\n", "kernel grid build (1024)", ts, tp, ts / tp);

        mfh::PhaseOperators ops;
        ts = time_it([&] { ops = mfh::assemble_phase_operators(g, mfh::Exec::Serial); });
        tp = time_it([&] { ops = mfh::assemble_phase_operators(g, mfh::Exec::Parallel); });
        std::printf("%-34s %10.4f %10.4f %8.2f\n", "phase operators (1024)", ts, tp, ts / tp);
    }

    {
        mfh::SimConfig cfg;
        cfg.N = 100000;
        cfg.J = 0.0;
        cfg.t_end = 5.0;
        cfg.seed = 7;
        cfg.exec = mfh::Exec::Serial;
        mfh::SimOutput a, b;
        ts = time_it([&] { a = mfh::simulate(toy, cfg); });
        cfg.exec = mfh::Exec::Parallel;
        tp = time_it([&] { b = mfh::simulate(toy, cfg); });
        std::printf("%-34s %10.4f %10.4f %8.2f\n", "particle toy N=1e5 t=5", ts, tp, ts / tp);
        bool same = a.total_spikes == b.total_spikes;
        std::printf("  serial/openmp outputs identical: %s\n", same ? "yes" : "NO");
    }

    {
        mfh::ModelSpec poly = mfh::ModelSpec::poly(10.0, 2.0, -2.0);
        mfh::SimConfig cfg;
        cfg.N = 20000;
        cfg.J = 0.8;
        cfg.t_end = 5.0;
        cfg.seed = 7;
        cfg.exec = mfh::Exec::Serial;
        mfh::SimOutput a, b;
        ts = time_it([&] { a = mfh::simulate(poly, cfg); });
        cfg.exec = mfh::Exec::Parallel;
        tp = time_it([&] { b = mfh::simulate(poly, cfg); });
        std::printf("%-34s %10.4f %10.4f %8.2f\n", "particle poly N=2e4 t=5", ts, tp, ts / tp);
        bool same = a.total_spikes == b.total_spikes;
        std::printf("  serial/openmp outputs identical: %s\n", same ? "yes" : "NO");
    }
    return 0;
}
