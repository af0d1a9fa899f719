#pragma once

// Synthetic synchronous paths, Poisson sampling times and previous-tick series.
//
// Paths are generated by circulant embedding: the 2x2 cross-spectral matrix of the grid
// increments is factorised bin by bin and colours complex white noise, followed by an
// inverse FFT. This covers every CorrelationModel pair with one code path.
//
// Sampling convention on a path of step h: a tick falling in ((g-1)h, gh] reveals X(gh) and is
// registered at gh. The probability that a cell holds a tick is then 1 - e^{-lambda h}.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "epps/kernels.hpp"

namespace epps {

struct SimulatedPath {
    double grid_dt = 0.0;
    double start_time = 0.0;       ///< time of levels[.][0]
    std::size_t n_assets = 0;
    std::size_t n_levels = 0;      ///< grid points per asset, n_levels - 1 increments
    std::vector<double> values;    ///< asset-major, values[a * n_levels + k] = X^a(start + k h)
    std::uint64_t seed = 0;

    double level(std::size_t asset, std::size_t k) const { return values[asset * n_levels + k]; }
    std::span<const double> asset(std::size_t a) const {
        return {values.data() + a * n_levels, n_levels};
    }
    double time(std::size_t k) const { return start_time + static_cast<double>(k) * grid_dt; }
};

/// Precomputes the spectral factor for a pair on a given grid so that many independent paths
/// can be drawn cheaply.
class PathSimulator {
public:
    /// Path covers [-warmup, horizon] on a grid of step grid_dt (horizon + warmup must be a
    /// multiple of grid_dt up to 1e-9 relative). Throws NumericalError if the embedded
    /// cross-spectrum is not positive semi-definite.
    PathSimulator(const ModelPair& pair, double grid_dt, double horizon, double warmup = 0.0);

    /// Independent path for (seed, day): distinct days use distinct RNG streams.
    SimulatedPath simulate(std::uint64_t seed, std::uint32_t day = 0) const;

    std::size_t n_increments() const { return n_; }
    std::size_t embedding_size() const { return m_; }

private:
    double grid_dt_;
    double start_;
    std::size_t n_;
    std::size_t m_;
    // Hermitian square root of the 2x2 cross-spectral matrix per bin: {r00, r01, r10, r11}.
    std::vector<std::array<std::complex<double>, 4>> root_;
};

SimulatedPath simulate_paths(const ModelPair& pair, double grid_dt, double horizon,
                             std::size_t n_assets = 2, std::uint64_t seed = 0, double warmup = 0.0);

/// Poisson times with rate lambda on [-warmup, horizon]. Stream (asset, day) selects an
/// independent RNG stream for the same seed.
std::vector<double> draw_poisson_times(double lambda, double horizon, double warmup, std::uint64_t seed,
                                       std::uint32_t asset = 0, std::uint32_t day = 0);

/// Per-asset sampling: Poisson rates, or replayed tick times for an asset.
struct SamplingPlan {
    std::vector<double> rates;                       ///< [1/s], used where no replay is given
    std::vector<std::vector<double>> replay_times;   ///< optional per-asset explicit ticks

    void validate() const;
    /// Ticks for `asset` over [-warmup, horizon]; warmup defaults to 10/lambda.
    std::vector<double> ticks(std::size_t asset, double horizon, std::uint64_t seed, std::uint32_t day = 0,
                              std::optional<double> warmup = std::nullopt) const;
};

struct SteppedSeries {
    double grid_dt = 0.0;
    double start_time = 0.0;
    std::vector<double> levels;      ///< value at start + k grid_dt
    std::vector<double> tick_times;  ///< registered ticks inside [start, end]

    std::vector<double> increments() const;
    double time(std::size_t k) const { return start_time + static_cast<double>(k) * grid_dt; }
};

/// Generic previous-tick gridding: level at grid time t is the value of the latest tick with
/// time <= t. Ticks must be non-decreasing. Throws std::invalid_argument if no tick precedes
/// the grid start.
SteppedSeries previous_tick(std::span<const double> tick_times, std::span<const double> tick_values,
                            double start_time, double grid_dt, std::size_t n_points);

/// Samples asset `asset` of a path at the given ticks and grids the result on
/// [start_time, end_time] with step out_dt (a multiple of the path step).
SteppedSeries previous_tick(const SimulatedPath& path, std::size_t asset, std::span<const double> ticks,
                            double out_dt, double start_time, double end_time);

}  // namespace epps
