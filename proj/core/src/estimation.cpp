#include "epps/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epps/errors.hpp"
#include "epps/fft.hpp"
#include "epps/numerics.hpp"

namespace epps {

namespace {

using cd = std::complex<double>;
using numerics::pairwise_sum;

struct Moments {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

    Moments& operator+=(const Moments& o) {
        n += o.n;
        sx += o.sx;
        sy += o.sy;
        sxx += o.sxx;
        syy += o.syy;
        sxy += o.sxy;
        return *this;
    }
    Moments operator-(const Moments& o) const {
        return {n - o.n, sx - o.sx, sy - o.sy, sxx - o.sxx, syy - o.syy, sxy - o.sxy};
    }
    double pearson() const {
        if (n < 2) return std::numeric_limits<double>::quiet_NaN();
        const double vx = sxx - sx * sx / n;
        const double vy = syy - sy * sy / n;
        if (!(vx > 0.0) || !(vy > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        return (sxy - sx * sy / n) / std::sqrt(vx * vy);
    }
};

void check_same_grid(const SteppedSeries& a, const SteppedSeries& b) {
    if (a.levels.size() != b.levels.size() || a.grid_dt != b.grid_dt || a.start_time != b.start_time) {
        throw DataError("epps_curve: paired series are not on a common grid");
    }
}

double mean_of(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

}  // namespace

RateEstimate estimate_rate(std::size_t tick_count, double session_length) {
    if (!(session_length > 0.0)) throw std::invalid_argument("estimate_rate: session_length must be > 0");
    if (tick_count == 0) throw DataError("estimate_rate: no ticks");
    const double c = static_cast<double>(tick_count);
    return {c / session_length, std::sqrt(c) / session_length, tick_count};
}

RateEstimate estimate_rate(std::span<const double> ticks, double session_length) {
    return estimate_rate(ticks.size(), session_length);
}

EppsCurve epps_curve(std::span<const SteppedSeries> days_i, std::span<const SteppedSeries> days_j,
                     std::span<const double> dt_grid) {
    if (days_i.size() != days_j.size()) throw DataError("epps_curve: day counts differ");
    if (days_i.empty()) throw DataError("epps_curve: no days");
    for (std::size_t k = 1; k < dt_grid.size(); ++k) {
        if (!(dt_grid[k] > dt_grid[k - 1])) throw std::invalid_argument("epps_curve: dt_grid must increase");
    }
    for (std::size_t d = 0; d < days_i.size(); ++d) check_same_grid(days_i[d], days_j[d]);

    const double h = days_i.front().grid_dt;
    EppsCurve out;
    out.dt_grid.assign(dt_grid.begin(), dt_grid.end());
    const std::size_t n_days = days_i.size();
    for (double dt : dt_grid) {
        const double ratio = dt / h;
        const auto step = static_cast<std::size_t>(std::llround(ratio));
        if (step == 0 || std::abs(ratio - static_cast<double>(step)) > 1e-9 * ratio) {
            throw std::invalid_argument("epps_curve: dt " + std::to_string(dt) + " is not a multiple of grid_dt");
        }
        std::vector<Moments> per_day(n_days);
        for (std::size_t d = 0; d < n_days; ++d) {
            if (days_i[d].grid_dt != h) throw DataError("epps_curve: days use different grid steps");
            const auto& li = days_i[d].levels;
            const auto& lj = days_j[d].levels;
            Moments m;
            for (std::size_t a = 0; a + step < li.size(); a += step) {
                const double x = li[a + step] - li[a];
                const double y = lj[a + step] - lj[a];
                m.n += 1;
                m.sx += x;
                m.sy += y;
                m.sxx += x * x;
                m.syy += y * y;
                m.sxy += x * y;
            }
            per_day[d] = m;
        }
        Moments total;
        for (const auto& m : per_day) total += m;
        const double rho = total.pearson();
        double se = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(rho)) {
            if (n_days >= 2) {
                std::vector<double> loo(n_days);
                bool ok = true;
                for (std::size_t d = 0; d < n_days; ++d) {
                    loo[d] = (total - per_day[d]).pearson();
                    ok = ok && std::isfinite(loo[d]);
                }
                if (ok) {
                    const double mean = mean_of(loo);
                    std::vector<double> sq(n_days);
                    for (std::size_t d = 0; d < n_days; ++d) sq[d] = (loo[d] - mean) * (loo[d] - mean);
                    se = std::sqrt((static_cast<double>(n_days) - 1.0) / static_cast<double>(n_days) *
                                   pairwise_sum(sq));
                }
            } else if (total.n > 1) {
                se = (1.0 - rho * rho) / std::sqrt(total.n - 1.0);
            }
        }
        out.rho.push_back(rho);
        out.stderr.push_back(se);
        out.n_returns.push_back(static_cast<std::size_t>(total.n));
    }
    return out;
}

std::vector<double> normalize_increments(std::span<const double> increments) {
    if (increments.size() < 2) throw DataError("normalize_increments: fewer than 2 increments");
    const double mean = mean_of(increments);
    std::vector<double> out(increments.begin(), increments.end());
    std::vector<double> sq(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] -= mean;
        sq[k] = out[k] * out[k];
    }
    const double var = pairwise_sum(sq) / static_cast<double>(out.size());
    if (!(var > 0.0)) throw DataError("normalize_increments: zero variance");
    const double inv = 1.0 / std::sqrt(var);
    for (double& v : out) v *= inv;
    return out;
}

Correlogram correlogram(std::span<const std::vector<double>> increments_i,
                        std::span<const std::vector<double>> increments_j, std::size_t max_lag, double grid_dt,
                        bool is_auto, bool normalize_per_day) {
    if (increments_i.size() != increments_j.size()) throw DataError("correlogram: day counts differ");
    if (increments_i.empty()) throw DataError("correlogram: no days");
    const std::size_t n_days = increments_i.size();
    const std::size_t width = 2 * max_lag + 1;
    std::vector<std::vector<double>> per_lag(width, std::vector<double>(n_days));

    for (std::size_t d = 0; d < n_days; ++d) {
        if (increments_i[d].size() != increments_j[d].size()) throw DataError("correlogram: day lengths differ");
        const std::size_t n = increments_i[d].size();
        if (max_lag >= n) throw std::invalid_argument("correlogram: max_lag must be below the session length");
        const auto x = normalize_per_day ? normalize_increments(increments_i[d]) : increments_i[d];
        const auto y = is_auto ? x : normalize_per_day ? normalize_increments(increments_j[d]) : increments_j[d];
        // Linear lag sums via a zero-padded FFT: no wrap-around for |m| <= max_lag.
        const std::size_t P = fft::good_size(n + max_lag + 1);
        std::vector<double> xp(P, 0.0), yp(P, 0.0);
        std::copy(x.begin(), x.end(), xp.begin());
        std::copy(y.begin(), y.end(), yp.begin());
        const auto X = fft::backward_real(xp);
        const auto Y = fft::backward_real(yp);
        std::vector<cd> prod(P);
        for (std::size_t k = 0; k < P; ++k) prod[k] = X[k] * std::conj(Y[k]);
        const auto sums = fft::forward(prod);
        for (std::size_t w = 0; w < width; ++w) {
            const auto m = static_cast<std::ptrdiff_t>(w) - static_cast<std::ptrdiff_t>(max_lag);
            const std::size_t idx = m >= 0 ? static_cast<std::size_t>(m) : P - static_cast<std::size_t>(-m);
            const double count = static_cast<double>(n - static_cast<std::size_t>(std::abs(m)));
            per_lag[w][d] = sums[idx].real() / static_cast<double>(P) / count;
        }
    }

    Correlogram out;
    out.grid_dt = grid_dt;
    out.n_days = n_days;
    out.is_auto = is_auto;
    for (std::size_t w = 0; w < width; ++w) {
        const double lag = (static_cast<double>(w) - static_cast<double>(max_lag)) * grid_dt;
        out.lag_grid.push_back(lag);
        const double mean = mean_of(per_lag[w]);
        out.values.push_back(mean);
        if (n_days >= 2) {
            std::vector<double> sq(n_days);
            for (std::size_t d = 0; d < n_days; ++d) sq[d] = (per_lag[w][d] - mean) * (per_lag[w][d] - mean);
            const double var = pairwise_sum(sq) / static_cast<double>(n_days - 1);
            out.stderr.push_back(std::sqrt(var / static_cast<double>(n_days)));
        } else {
            out.stderr.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

Correlogram correlogram(std::span<const SteppedSeries> days_i, std::span<const SteppedSeries> days_j,
                        std::size_t max_lag, bool is_auto) {
    if (days_i.size() != days_j.size()) throw DataError("correlogram: day counts differ");
    if (days_i.empty()) throw DataError("correlogram: no days");
    std::vector<std::vector<double>> xi, xj;
    for (std::size_t d = 0; d < days_i.size(); ++d) {
        xi.push_back(days_i[d].increments());
        xj.push_back(days_j[d].increments());
    }
    return correlogram(xi, xj, max_lag, days_i.front().grid_dt, is_auto);
}

std::vector<cd> cross_periodogram(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("cross_periodogram: length mismatch");
    const std::size_t T = x.size();
    const auto X = fft::backward_real(x);
    const auto Y = fft::backward_real(y);
    std::vector<cd> S(T);
    const double inv = 1.0 / static_cast<double>(T);
    for (std::size_t n = 0; n <= T / 2; ++n) S[n] = X[n] * std::conj(Y[n]) * inv;
    for (std::size_t n = T / 2 + 1; n < T; ++n) S[n] = std::conj(S[T - n]);
    return S;
}

SpectrumEstimate estimate_spectrum(std::span<const std::vector<double>> increments_i,
                                   std::span<const std::vector<double>> increments_j, std::size_t T,
                                   bool keep_days) {
    if (increments_i.size() != increments_j.size()) throw DataError("estimate_spectrum: day counts differ");
    if (increments_i.empty()) throw DataError("estimate_spectrum: no days");
    if (T < 2) throw std::invalid_argument("estimate_spectrum: T must be >= 2");
    const std::size_t n_days = increments_i.size();
    std::vector<std::vector<cd>> days(n_days);
    for (std::size_t d = 0; d < n_days; ++d) {
        if (increments_i[d].size() != T || increments_j[d].size() != T) {
            throw DataError("estimate_spectrum: day " + std::to_string(d) + " does not hold exactly T = " +
                            std::to_string(T) + " increments");
        }
        days[d] = cross_periodogram(increments_i[d], increments_j[d]);
    }
    SpectrumEstimate out;
    out.T = T;
    out.n_days = n_days;
    out.S.resize(T);
    std::vector<double> re(n_days), im(n_days);
    for (std::size_t n = 0; n < T; ++n) {
        for (std::size_t d = 0; d < n_days; ++d) {
            re[d] = days[d][n].real();
            im[d] = days[d][n].imag();
        }
        out.S[n] = cd(pairwise_sum(re), pairwise_sum(im)) / static_cast<double>(n_days);
    }
    if (keep_days) out.per_day = std::move(days);
    return out;
}

std::vector<cd> spectrum_to_correlogram(std::span<const cd> S) {
    auto c = fft::forward(S);
    const double inv = 1.0 / static_cast<double>(S.size());
    for (auto& v : c) v *= inv;
    return c;
}

}  // namespace epps
