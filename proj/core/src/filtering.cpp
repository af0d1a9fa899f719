#include "epps/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "epps/async_theory.hpp"
#include "epps/errors.hpp"
#include "epps/numerics.hpp"

namespace epps {

namespace {

using cd = std::complex<double>;

void check_rates(double li, double lj, double grid_dt) {
    if (!(li > 0.0) || !(lj > 0.0)) throw std::invalid_argument("filter: rates must be > 0");
    if (!(grid_dt > 0.0)) throw std::invalid_argument("filter: grid_dt must be > 0");
}

// Applies a per-bin complex factor on n <= T/2 and mirrors by conjugation.
template <class Factor>
std::vector<cd> map_hermitian(std::span<const cd> S, Factor&& factor) {
    const std::size_t T = S.size();
    std::vector<cd> out(T);
    for (std::size_t n = 0; n <= T / 2; ++n) {
        out[n] = S[n] * factor(n);
        if (2 * n == T || n == 0) out[n] = cd(out[n].real(), S[n].imag() == 0.0 ? 0.0 : out[n].imag());
    }
    for (std::size_t n = T / 2 + 1; n < T; ++n) out[n] = std::conj(out[T - n]);
    return out;
}

template <class Factor>
SpectrumEstimate map_estimate(const SpectrumEstimate& S, Factor&& factor) {
    SpectrumEstimate out = S;
    if (S.is_auto) return out;
    out.S = map_hermitian(S.S, factor);
    for (std::size_t d = 0; d < S.per_day.size(); ++d) out.per_day[d] = map_hermitian(S.per_day[d], factor);
    return out;
}

double fejer(double omega, std::size_t steps) {
    const double D = static_cast<double>(steps);
    const double s = std::sin(omega / 2.0);
    if (std::abs(s) < 1e-8) return D * D;
    const double num = std::sin(D * omega / 2.0);
    return num * num / (s * s);
}

}  // namespace

void FilterSpec::validate() const {
    if (mode == Mode::wiener) {
        if (std::isnan(snr)) throw std::invalid_argument("FilterSpec: snr is NaN");
        for (double v : snr_per_bin) {
            if (!(v > 0.0)) throw std::invalid_argument("FilterSpec: snr must be > 0");
        }
    }
}

SpectrumEstimate apply_sampling_kernel(const SpectrumEstimate& S, double lambda_i, double lambda_j,
                                       double grid_dt) {
    check_rates(lambda_i, lambda_j, grid_dt);
    const double Li = lambda_i * grid_dt, Lj = lambda_j * grid_dt;
    return map_estimate(S, [&](std::size_t n) { return discrete_kernel(Li, Lj, n, S.T); });
}

SpectrumEstimate inverse_filter(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j,
                                double grid_dt) {
    check_rates(lambda_i, lambda_j, grid_dt);
    const double Li = lambda_i * grid_dt, Lj = lambda_j * grid_dt;
    return map_estimate(S_tilde, [&](std::size_t n) { return 1.0 / discrete_kernel(Li, Lj, n, S_tilde.T); });
}

double default_snr(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j, double grid_dt) {
    check_rates(lambda_i, lambda_j, grid_dt);
    const double split = std::min(lambda_i, lambda_j) * grid_dt;  // rad per step
    const std::size_t T = S_tilde.T;
    std::vector<double> low, high;
    for (std::size_t n = 0; n <= T / 2; ++n) {
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(T);
        (omega <= split ? low : high).push_back(std::abs(S_tilde.S[n]));
    }
    if (low.empty() || high.empty()) return std::numeric_limits<double>::infinity();
    const double lo = numerics::pairwise_sum(low) / static_cast<double>(low.size());
    const double hi = numerics::pairwise_sum(high) / static_cast<double>(high.size());
    if (!(hi > 0.0)) return std::numeric_limits<double>::infinity();
    if (!(lo > 0.0)) throw NumericalError("default_snr: no low-frequency spectral mass");
    return lo / hi;
}

SpectrumEstimate wiener_filter(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j,
                               const FilterSpec& spec, double grid_dt) {
    check_rates(lambda_i, lambda_j, grid_dt);
    spec.validate();
    const std::size_t T = S_tilde.T;
    if (!spec.snr_per_bin.empty() && spec.snr_per_bin.size() != T / 2 + 1) {
        throw std::invalid_argument("wiener_filter: per-bin snr must have T/2 + 1 entries");
    }
    const double scalar = spec.snr > 0.0 ? spec.snr : default_snr(S_tilde, lambda_i, lambda_j, grid_dt);
    const double Li = lambda_i * grid_dt, Lj = lambda_j * grid_dt;
    return map_estimate(S_tilde, [&](std::size_t n) {
        const cd K = discrete_kernel(Li, Lj, n, T);
        const double snr = spec.snr_per_bin.empty() ? scalar : spec.snr_per_bin[n];
        const double k2 = std::norm(K);
        const double damp = std::isinf(snr) ? 1.0 : k2 / (k2 + 1.0 / snr);
        return damp / K;
    });
}

SpectrumEstimate apply_filter(const SpectrumEstimate& S_tilde, double lambda_i, double lambda_j,
                              const FilterSpec& spec, double grid_dt) {
    switch (spec.mode) {
        case FilterSpec::Mode::none: return S_tilde;
        case FilterSpec::Mode::inverse: return inverse_filter(S_tilde, lambda_i, lambda_j, grid_dt);
        case FilterSpec::Mode::wiener: return wiener_filter(S_tilde, lambda_i, lambda_j, spec, grid_dt);
    }
    throw std::invalid_argument("apply_filter: unknown mode");
}

Correlogram filtered_correlogram(const SpectrumEstimate& S_hat, std::size_t max_lag, double grid_dt) {
    const std::size_t T = S_hat.T;
    if (max_lag >= T) throw std::invalid_argument("filtered_correlogram: max_lag must be < T");
    auto lags_of = [&](std::span<const cd> S) {
        const auto c = spectrum_to_correlogram(S);
        double norm = 0.0, resid = 0.0;
        for (const auto& v : c) {
            norm = std::max(norm, std::abs(v));
            resid = std::max(resid, std::abs(v.imag()));
        }
        if (resid > 1e-6 * norm) {
            throw NumericalError("filtered_correlogram: imaginary residue " + std::to_string(resid) +
                                 " (spectrum not Hermitian)");
        }
        std::vector<double> out(2 * max_lag + 1);
        for (std::size_t w = 0; w < out.size(); ++w) {
            const auto m = static_cast<std::ptrdiff_t>(w) - static_cast<std::ptrdiff_t>(max_lag);
            out[w] = c[m >= 0 ? static_cast<std::size_t>(m) : T - static_cast<std::size_t>(-m)].real();
        }
        return out;
    };
    Correlogram out;
    out.grid_dt = grid_dt;
    out.n_days = S_hat.n_days;
    out.is_auto = S_hat.is_auto;
    out.values = lags_of(S_hat.S);
    for (std::size_t w = 0; w <= 2 * max_lag; ++w) {
        out.lag_grid.push_back((static_cast<double>(w) - static_cast<double>(max_lag)) * grid_dt);
    }
    out.stderr.assign(out.values.size(), std::numeric_limits<double>::quiet_NaN());
    const std::size_t M = S_hat.per_day.size();
    if (M >= 2) {
        std::vector<std::vector<double>> per(out.values.size(), std::vector<double>(M));
        for (std::size_t d = 0; d < M; ++d) {
            const auto v = lags_of(S_hat.per_day[d]);
            for (std::size_t w = 0; w < v.size(); ++w) per[w][d] = v[w];
        }
        for (std::size_t w = 0; w < per.size(); ++w) {
            const double mean = numerics::pairwise_sum(per[w]) / static_cast<double>(M);
            std::vector<double> sq(M);
            for (std::size_t d = 0; d < M; ++d) sq[d] = (per[w][d] - mean) * (per[w][d] - mean);
            out.stderr[w] = std::sqrt(numerics::pairwise_sum(sq) / static_cast<double>(M - 1) / static_cast<double>(M));
        }
    }
    return out;
}

double spectral_covariance(std::span<const cd> S, std::size_t steps) {
    const std::size_t T = S.size();
    std::vector<double> terms(T);
    for (std::size_t n = 0; n < T; ++n) {
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(T);
        terms[n] = S[n].real() * fejer(omega, steps);
    }
    return numerics::pairwise_sum(terms) / static_cast<double>(T);
}

EppsCurve filtered_epps_curve(const SpectrumEstimate& S_ij, const SpectrumEstimate& S_ii,
                              const SpectrumEstimate& S_jj, std::span<const double> dt_grid, double grid_dt) {
    if (S_ij.T != S_ii.T || S_ij.T != S_jj.T) throw DataError("filtered_epps_curve: spectra differ in length");
    const std::size_t M = S_ij.per_day.size();
    const bool jackknife = M >= 2 && S_ii.per_day.size() == M && S_jj.per_day.size() == M;
    EppsCurve out;
    for (double dt : dt_grid) {
        const double ratio = dt / grid_dt;
        const auto steps = static_cast<std::size_t>(std::llround(ratio));
        if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
            throw std::invalid_argument("filtered_epps_curve: dt is not a multiple of grid_dt");
        }
        const double cij = spectral_covariance(S_ij.S, steps);
        const double cii = spectral_covariance(S_ii.S, steps);
        const double cjj = spectral_covariance(S_jj.S, steps);
        if (!(cii > 0.0) || !(cjj > 0.0)) {
            throw NumericalError("filtered_epps_curve: nonpositive variance at dt = " + std::to_string(dt));
        }
        const double rho = cij / std::sqrt(cii * cjj);
        double se = std::numeric_limits<double>::quiet_NaN();
        if (jackknife) {
            const double m = static_cast<double>(M);
            std::vector<double> loo(M);
            for (std::size_t d = 0; d < M; ++d) {
                const double a = (m * cij - spectral_covariance(S_ij.per_day[d], steps)) / (m - 1.0);
                const double b = (m * cii - spectral_covariance(S_ii.per_day[d], steps)) / (m - 1.0);
                const double c = (m * cjj - spectral_covariance(S_jj.per_day[d], steps)) / (m - 1.0);
                loo[d] = a / std::sqrt(b * c);
            }
            const double mean = numerics::pairwise_sum(loo) / m;
            std::vector<double> sq(M);
            for (std::size_t d = 0; d < M; ++d) sq[d] = (loo[d] - mean) * (loo[d] - mean);
            se = std::sqrt((m - 1.0) / m * numerics::pairwise_sum(sq));
        }
        out.dt_grid.push_back(dt);
        out.rho.push_back(rho);
        out.stderr.push_back(se);
        out.n_returns.push_back(S_ij.T * S_ij.n_days);
    }
    return out;
}

}  // namespace epps
