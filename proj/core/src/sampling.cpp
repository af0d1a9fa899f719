#include "epps/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epps/errors.hpp"
#include "epps/fft.hpp"
#include "epps/rng.hpp"

namespace epps {

namespace {

using cd = std::complex<double>;

std::size_t steps_in(double span, double h, const char* what) {
    const double ratio = span / h;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
        throw std::invalid_argument(std::string(what) + " is not a multiple of the grid step");
    }
    return n;
}

// Increment covariances r(m) = gamma(k_m) on the circulant, k_m = m or m - M.
std::vector<cd> circulant_column(const CorrelationModel& model, double h, std::size_t m_size, double sign) {
    std::vector<cd> r(m_size);
    for (std::size_t m = 0; m < m_size; ++m) {
        const double k = m <= m_size / 2 ? static_cast<double>(m)
                                         : static_cast<double>(m) - static_cast<double>(m_size);
        r[m] = kernel_second_difference(model, sign * k * h, h);
    }
    return r;
}

}  // namespace

PathSimulator::PathSimulator(const ModelPair& pair, double grid_dt, double horizon, double warmup)
    : grid_dt_(grid_dt), start_(-warmup) {
    if (!(grid_dt > 0.0)) throw std::invalid_argument("simulate_paths: grid_dt must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_paths: horizon must be > 0");
    if (!(warmup >= 0.0)) throw std::invalid_argument("simulate_paths: warmup must be >= 0");
    n_ = steps_in(horizon + warmup, grid_dt, "horizon + warmup");

    double reach = std::abs(pair.cross().lag);
    for (const auto* m : {&pair.cross(), &pair.auto_i(), &pair.auto_j()}) {
        reach = std::max(reach, std::abs(m->lag) + 40.0 * m->width);
    }
    const auto margin = static_cast<std::size_t>(std::ceil(reach / grid_dt)) + 2;
    m_ = fft::good_size(2 * std::max(n_, margin));

    const auto r00 = circulant_column(pair.auto_i(), grid_dt, m_, 1.0);
    const auto r11 = circulant_column(pair.auto_j(), grid_dt, m_, 1.0);
    const auto r01 = circulant_column(pair.cross(), grid_dt, m_, 1.0);
    const auto s00 = fft::forward(r00);
    const auto s11 = fft::forward(r11);
    const auto s01 = fft::forward(r01);

    double scale = 0.0;
    for (std::size_t n = 0; n < m_; ++n) scale = std::max(scale, s00[n].real() + s11[n].real());
    const double tol = 1e-9 * scale;

    root_.resize(m_);
    for (std::size_t n = 0; n < m_; ++n) {
        const double a = s00[n].real();
        const double d = s11[n].real();
        const cd b = s01[n];
        const double half_tr = 0.5 * (a + d);
        const double rad = std::hypot(0.5 * (a - d), std::abs(b));
        const double mu_hi = half_tr + rad;
        const double mu_lo = half_tr - rad;
        if (mu_lo < -tol) {
            throw NumericalError("simulate_paths: cross-spectral matrix not positive semi-definite (eigenvalue " +
                                 std::to_string(mu_lo) + " at bin " + std::to_string(n) + ")");
        }
        if (mu_hi <= 0.0) {
            root_[n] = {cd(0.0), cd(0.0), cd(0.0), cd(0.0)};
            continue;
        }
        // Lift a slightly negative eigenvalue to zero, then sqrt(A) = (A + sI) / t.
        double aa = a, dd = d;
        cd bb = b;
        double lo = mu_lo;
        if (lo < 0.0) {
            const double w = -lo / (mu_hi - lo);  // A + |lo| P_lo with P_lo = (mu_hi I - A) / (mu_hi - lo)
            aa += w * (mu_hi - a);
            dd += w * (mu_hi - d);
            bb -= w * b;
            lo = 0.0;
        }
        const double s = std::sqrt(mu_hi * lo);
        const double t = std::sqrt(mu_hi) + std::sqrt(lo);
        root_[n] = {cd((aa + s) / t), bb / t, std::conj(bb) / t, cd((dd + s) / t)};
    }
}

SimulatedPath PathSimulator::simulate(std::uint64_t seed, std::uint32_t day) const {
    Philox rng(seed, stream_id(StreamPurpose::path_noise, 0), day);
    std::vector<cd> y0(m_), y1(m_);
    for (std::size_t n = 0; n < m_; ++n) {
        const double a0 = rng.normal();
        const double b0 = rng.normal();
        const double a1 = rng.normal();
        const double b1 = rng.normal();
        const cd w0(a0, b0), w1(a1, b1);
        const auto& r = root_[n];
        y0[n] = r[0] * w0 + r[1] * w1;
        y1[n] = r[2] * w0 + r[3] * w1;
    }
    const auto x0 = fft::backward(y0);
    const auto x1 = fft::backward(y1);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m_));

    SimulatedPath path;
    path.grid_dt = grid_dt_;
    path.start_time = start_;
    path.n_assets = 2;
    path.n_levels = n_ + 1;
    path.seed = seed;
    path.values.assign(2 * path.n_levels, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
        path.values[k + 1] = path.values[k] + norm * x0[k].real();
        path.values[path.n_levels + k + 1] = path.values[path.n_levels + k] + norm * x1[k].real();
    }
    return path;
}

SimulatedPath simulate_paths(const ModelPair& pair, double grid_dt, double horizon, std::size_t n_assets,
                             std::uint64_t seed, double warmup) {
    if (n_assets != 2) throw std::invalid_argument("simulate_paths: a ModelPair drives exactly 2 assets");
    return PathSimulator(pair, grid_dt, horizon, warmup).simulate(seed);
}

std::vector<double> draw_poisson_times(double lambda, double horizon, double warmup, std::uint64_t seed,
                                       std::uint32_t asset, std::uint32_t day) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("draw_poisson_times: lambda must be finite and > 0");
    }
    if (!(warmup >= 0.0) || !(horizon >= -warmup)) {
        throw std::invalid_argument("draw_poisson_times: need warmup >= 0 and horizon >= -warmup");
    }
    Philox rng(seed, stream_id(StreamPurpose::ticks, asset), day);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(lambda * (horizon + warmup) * 1.1) + 16);
    double t = -warmup;
    for (;;) {
        t += rng.exponential(lambda);
        if (t > horizon) break;
        times.push_back(t);
    }
    return times;
}

void SamplingPlan::validate() const {
    for (double r : rates) {
        if (!(r > 0.0)) throw std::invalid_argument("SamplingPlan: rates must be > 0");
    }
    for (const auto& ts : replay_times) {
        for (std::size_t k = 1; k < ts.size(); ++k) {
            if (!(ts[k] > ts[k - 1])) throw std::invalid_argument("SamplingPlan: replayed times must increase");
        }
    }
}

std::vector<double> SamplingPlan::ticks(std::size_t asset, double horizon, std::uint64_t seed, std::uint32_t day,
                                        std::optional<double> warmup) const {
    if (asset < replay_times.size() && !replay_times[asset].empty()) return replay_times[asset];
    if (asset >= rates.size()) throw std::invalid_argument("SamplingPlan: no rate or replay for asset");
    const double lambda = rates[asset];
    return draw_poisson_times(lambda, horizon, warmup.value_or(10.0 / lambda), seed,
                              static_cast<std::uint32_t>(asset), day);
}

std::vector<double> SteppedSeries::increments() const {
    std::vector<double> out;
    if (levels.size() < 2) return out;
    out.resize(levels.size() - 1);
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) out[k] = levels[k + 1] - levels[k];
    return out;
}

SteppedSeries previous_tick(std::span<const double> tick_times, std::span<const double> tick_values,
                            double start_time, double grid_dt, std::size_t n_points) {
    if (tick_times.size() != tick_values.size()) {
        throw std::invalid_argument("previous_tick: times and values differ in length");
    }
    if (!(grid_dt > 0.0)) throw std::invalid_argument("previous_tick: grid_dt must be > 0");
    const double eps = 1e-9 * grid_dt;
    if (tick_times.empty() || tick_times.front() > start_time + eps) {
        throw std::invalid_argument("previous_tick: no tick at or before the grid start");
    }
    SteppedSeries out;
    out.grid_dt = grid_dt;
    out.start_time = start_time;
    out.levels.resize(n_points);
    const double end_time = start_time + static_cast<double>(n_points ? n_points - 1 : 0) * grid_dt;
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_points; ++k) {
        const double t = start_time + static_cast<double>(k) * grid_dt;
        while (j + 1 < tick_times.size() && tick_times[j + 1] <= t + eps) {
            if (tick_times[j + 1] < tick_times[j]) throw std::invalid_argument("previous_tick: ticks not sorted");
            ++j;
        }
        out.levels[k] = tick_values[j];
    }
    for (double t : tick_times) {
        if (t >= start_time - eps && t <= end_time + eps) out.tick_times.push_back(t);
    }
    return out;
}

SteppedSeries previous_tick(const SimulatedPath& path, std::size_t asset, std::span<const double> ticks,
                            double out_dt, double start_time, double end_time) {
    if (asset >= path.n_assets) throw std::invalid_argument("previous_tick: asset out of range");
    const double h = path.grid_dt;
    steps_in(out_dt, h, "output step");
    const std::size_t n_out = steps_in(end_time - start_time, out_dt, "output window") + 1;
    const double path_end = path.time(path.n_levels - 1);
    if (start_time < path.start_time - 1e-9 * h || end_time > path_end + 1e-9 * h) {
        throw std::invalid_argument("previous_tick: output window outside the path");
    }

    std::vector<double> reg_times, reg_values;
    reg_times.reserve(ticks.size());
    reg_values.reserve(ticks.size());
    const auto series = path.asset(asset);
    for (double t : ticks) {
        // Ticks within rounding of a grid point register at that point.
        const double cell = std::ceil((t - path.start_time) / h - 1e-9);
        if (cell < 0.0) {
            if (t < path.start_time - h) throw std::invalid_argument("previous_tick: tick before path start");
        }
        const auto g = static_cast<std::size_t>(std::max(0.0, cell));
        if (g >= path.n_levels) break;
        const double registered = path.time(g);
        // Several ticks in one cell reveal the same level; keep one.
        if (!reg_times.empty() && registered == reg_times.back()) continue;
        reg_times.push_back(registered);
        reg_values.push_back(series[g]);
    }
    return previous_tick(reg_times, reg_values, start_time, out_dt, n_out);
}

}  // namespace epps
