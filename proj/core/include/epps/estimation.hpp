#pragma once

// Empirical estimators on gridded previous-tick series: sampling rates, Epps curves,
// lagged correlograms and day-averaged cross-spectra.
//
// DFT convention: dX_n = sum_t dX_t e^{+2 pi i n t / T}, S^ij_n = dX^i_n conj(dX^j_n) / T.
// The inverse DFT of S^ij is the circular correlogram (1/T) sum_t dX^i_t dX^j_{t-m}.

#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <span>
#include <vector>

#include "epps/sampling.hpp"

namespace epps {

struct RateEstimate {
    double lambda = 0.0;  ///< ticks per second
    double stderr = 0.0;  ///< sqrt(count) / length
    std::size_t count = 0;
};

/// Tick count / session length. Throws DataError on zero ticks.
RateEstimate estimate_rate(std::size_t tick_count, double session_length);
RateEstimate estimate_rate(std::span<const double> ticks, double session_length);

struct EppsCurve {
    std::vector<double> dt_grid;
    std::vector<double> rho;     ///< NaN where missing
    std::vector<double> stderr;  ///< NaN where unavailable
    std::vector<std::size_t> n_returns;

    bool valid(std::size_t k) const { return std::isfinite(rho[k]); }
};

/// Pearson coefficient of non-overlapping dt-returns pooled across days. The standard error is
/// the delete-one-day jackknife (>= 2 days) or (1 - rho^2)/sqrt(N - 1) for a single day. Grid
/// points with fewer than 2 return pairs or zero variance are reported as NaN.
EppsCurve epps_curve(std::span<const SteppedSeries> days_i, std::span<const SteppedSeries> days_j,
                     std::span<const double> dt_grid);

struct Correlogram {
    double grid_dt = 1.0;
    std::vector<double> lag_grid;  ///< -max_lag .. max_lag in steps of grid_dt
    std::vector<double> values;
    std::vector<double> stderr;    ///< across-day standard error of the mean, NaN if < 2 days
    std::size_t n_days = 0;
    bool is_auto = false;

    std::size_t zero_index() const { return lag_grid.size() / 2; }
    /// Mass of the tau = 0 bin (the delta component for auto-correlograms).
    double zero_lag_mass() const { return values[zero_index()]; }
};

/// Per day: zero mean, unit variance increments. Throws DataError if the variance vanishes.
std::vector<double> normalize_increments(std::span<const double> increments);

/// c(tau) = <x_t y_{t - tau}> (mean over available pairs), averaged over days. `max_lag` in grid
/// steps. Increments are normalised per day first unless `normalize_per_day` is false, in which
/// case they are used as given.
Correlogram correlogram(std::span<const std::vector<double>> increments_i,
                        std::span<const std::vector<double>> increments_j, std::size_t max_lag,
                        double grid_dt = 1.0, bool is_auto = false, bool normalize_per_day = true);

/// Same on stepped series (increments taken and normalised per day).
Correlogram correlogram(std::span<const SteppedSeries> days_i, std::span<const SteppedSeries> days_j,
                        std::size_t max_lag, bool is_auto = false);

struct SpectrumEstimate {
    std::size_t T = 0;
    std::size_t n_days = 0;
    std::vector<std::complex<double>> S;               ///< day average, index n = 0..T-1
    std::vector<std::vector<std::complex<double>>> per_day;  ///< kept on request
    double lambda_i = std::numeric_limits<double>::quiet_NaN();
    double lambda_j = std::numeric_limits<double>::quiet_NaN();
    bool is_auto = false;
};

/// Single-day cross-periodogram, exactly Hermitian under n -> T - n.
std::vector<std::complex<double>> cross_periodogram(std::span<const double> x, std::span<const double> y);

/// Cross-periodogram averaged over days (pairwise summation). Every day must hold exactly T
/// increments (DataError otherwise).
SpectrumEstimate estimate_spectrum(std::span<const std::vector<double>> increments_i,
                                   std::span<const std::vector<double>> increments_j, std::size_t T,
                                   bool keep_days = false);

/// Inverse DFT of a spectrum: (1/T) sum_n S_n e^{-2 pi i n m / T}, i.e. the circular
/// correlogram at lag m (complex; the imaginary part vanishes for Hermitian input).
std::vector<std::complex<double>> spectrum_to_correlogram(std::span<const std::complex<double>> S);

}  // namespace epps
