#pragma once

// Deconvolution of the sampling kernel from measured cross-spectra, and reconstruction of
// correlograms and Epps curves from (corrected) spectra.
//
// Filters use the finite-length discrete kernel with Lambda = lambda * grid_dt. They are
// evaluated on n <= T/2 and mirrored by conjugation, so Hermitian symmetry is exact.
// Auto-spectra pass through unchanged: both "assets" share the same ticks, so the
// independent-sampling kernel does not apply and the delta mass is kept as measured.

#include <cstddef>
#include <span>
#include <vector>

#include "epps/estimation.hpp"

namespace epps {

struct FilterSpec {
    enum class Mode { none, inverse, wiener };
    Mode mode = Mode::wiener;
    double snr = 0.0;                ///< scalar SNR; <= 0 means "estimate from the spectrum"
    std::vector<double> snr_per_bin; ///< optional, index n = 0..T/2, overrides the scalar

    void validate() const;
};

/// Multiplies a spectrum by the discrete sampling kernel (the forward model).
SpectrumEstimate apply_sampling_kernel(const SpectrumEstimate& S, double lambda_i, double lambda_j,
                                       double grid_dt = 1.0);

/// S_hat_n = S~_n / K_n.
SpectrumEstimate inverse_filter(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j,
                                double grid_dt = 1.0);

/// S_hat_n = S~_n / K_n * |K_n|^2 / (|K_n|^2 + 1/SNR_n).
SpectrumEstimate wiener_filter(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j,
                               const FilterSpec& spec, double grid_dt = 1.0);

/// Dispatches on spec.mode.
SpectrumEstimate apply_filter(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j,
                              const FilterSpec& spec, double grid_dt = 1.0);

/// Default scalar SNR: mean |S~| over bins with w <= min(lambda_i, lambda_j) divided by mean |S~|
/// over the remaining bins up to Nyquist.
double default_snr(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j, double grid_dt = 1.0);

/// Inverse DFT of a Hermitian spectrum on lags -max_lag..max_lag (grid steps). Throws
/// NumericalError if the imaginary residue exceeds 1e-6 of the norm. Uses per-day spectra for
/// the standard error when present.
Correlogram filtered_correlogram(const SpectrumEstimate& S_hat, std::size_t max_lag, double grid_dt = 1.0);

/// (1/T) sum_n S_n F_D(w_n) with the Fejer weight F_D(w) = sin^2(D w / 2) / sin^2(w / 2): the
/// circular covariance of overlapping D-step returns.
double spectral_covariance(std::span<const std::complex<double>> S, std::size_t steps);

/// rho(dt) = C^ij / sqrt(C^ii C^jj) from spectra. Delete-one-day jackknife standard error when
/// all three estimates keep per-day spectra, NaN otherwise.
EppsCurve filtered_epps_curve(const SpectrumEstimate& S_ij, const SpectrumEstimate& S_ii,
                              const SpectrumEstimate& S_jj, std::span<const double> dt_grid,
                              double grid_dt = 1.0);

}  // namespace epps
