#pragma once

#include <cstdint>
#include <vector>

#include "mfh/kernels.hpp"
#include "mfh/model.hpp"

namespace mfh {

enum class InitLaw { Uniform01, PointMass, InvariantAt };

struct SimConfig {
    long long N = 1000;
    double J = 0.0;
    InitLaw init = InitLaw::Uniform01;
    double init_value = 0.0;   // PointMass x or InvariantAt alpha
    double t_end = 10.0;
    double dt_bin = 0.05;
    std::uint64_t seed = 1;
    double thinning_cap = 0.05;  // max f * dt per micro step
    double dt_min = 1e-7;
    long long raster_neurons = 500;
    long long raster_cap = 2'000'000;
    Exec exec = Exec::Parallel;
};

struct RasterEntry {
    std::uint32_t neuron;
    float time;
};

struct SimOutput {
    std::vector<double> bin_time;    // bin centers
    std::vector<double> rate_series; // spikes per unit time per neuron
    std::vector<RasterEntry> raster;
    long long total_spikes = 0;
    long long steps = 0;
    double mean_dt = 0.0;
    // spectral peak of the post-burn-in rate series
    double dominant_freq = 0.0;
    double snr = 0.0;
    bool oscillation_flag = false;
};

// Event simulation of the N-neuron system by per-neuron thinning: within a
// micro step dt each neuron spikes with probability 1 - e^{-f(x) dt}; spikers
// reset to 0, everyone else receives J/N per spike, applied at the step end.
// Draws are keyed by (seed, neuron id, step), so the output is bit-identical
// for any thread partition.
SimOutput simulate(const ModelSpec& model, const SimConfig& config);

// Engine entry with explicit initial potentials and RNG ids; relabeling
// (potential, id) pairs permutes raster ids and leaves rate_series unchanged.
SimOutput simulate_with_state(const ModelSpec& model, const SimConfig& config,
                              const std::vector<double>& x0,
                              const std::vector<std::uint32_t>& rng_ids);

struct OscillationReport {
    double dominant_freq = 0.0;  // cycles per unit time
    double snr = 0.0;            // peak power over median off-peak power
    bool oscillating = false;
    int peak_bin = 0;
};

// DFT of the centered post-burn-in series; the dominant bin must complete at
// least 16 cycles in the window to count as an oscillation.
OscillationReport detect_oscillation(const std::vector<double>& rate_series,
                                     double dt_bin, double burn_in,
                                     double snr_threshold = 5.0);

// Batch-mean estimate of the long-run rate and its standard error.
struct BatchStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

BatchStats batch_mean(const std::vector<double>& series, std::size_t burn_in_bins,
                      int batches = 8);

}  // namespace mfh
