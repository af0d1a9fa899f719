#include "epps/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "epps/errors.hpp"
#include "epps/estimation.hpp"

namespace epps {

namespace {

bool parse_number(const std::string& s, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
        out.push_back(f);
    }
    return out;
}

}  // namespace

void SessionSpec::validate() const {
    if (!(length > 0.0)) throw std::invalid_argument("SessionSpec: length must be > 0");
    if (!(open_skip >= 0.0) || !(close_skip >= 0.0)) throw std::invalid_argument("SessionSpec: skips must be >= 0");
    if (close_time && !(*close_time - close_skip > window_start())) {
        throw std::invalid_argument("SessionSpec: empty window");
    }
}

double SessionSpec::window_end() const {
    const double end = window_start() + length;
    return close_time ? std::min(end, *close_time - close_skip) : end;
}

std::vector<std::string> TickData::assets() const {
    std::vector<std::string> out;
    for (const auto& [a, _] : series) out.push_back(a);
    return out;
}

std::size_t TickData::tick_count(const std::string& asset) const {
    const auto it = series.find(asset);
    if (it == series.end()) return 0;
    std::size_t n = 0;
    for (const auto& [_, ts] : it->second) n += ts.times.size();
    return n;
}

TickData load_ticks(const std::filesystem::path& path, const SessionSpec& session, bool fail_fast,
                    const std::set<std::string>& allowed) {
    session.validate();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open tick file " + path.string());
    TickData data;
    std::string line;
    std::size_t lineno = 0;
    // Last raw time seen per asset-day, including ticks outside the window, for monotonicity.
    std::map<std::pair<std::string, std::string>, double> last_time;

    auto reject = [&](const std::string& why) {
        const std::string msg = path.string() + ":" + std::to_string(lineno) + ": " + why;
        if (fail_fast) throw DataError(msg);
        data.diagnostics.push_back(msg);
        ++data.n_rejected;
    };

    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    ++lineno;
    const auto header = split_fields(line);
    if (header != std::vector<std::string>{"asset", "day", "time_sec", "price"}) {
        throw DataError(path.string() + ":1: header must be asset,day,time_sec,price");
    }
    const double w0 = session.window_start();
    const double w1 = session.window_end();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        ++data.n_records;
        const auto f = split_fields(line);
        if (f.size() != 4) {
            reject("expected 4 fields");
            continue;
        }
        const std::string& asset = f[0];
        const std::string& day = f[1];
        double t = 0.0, price = 0.0;
        if (asset.empty() || day.empty()) {
            reject("empty asset or day");
            continue;
        }
        if (!allowed.empty() && !allowed.count(asset)) {
            reject("unknown asset '" + asset + "'");
            continue;
        }
        if (!parse_number(f[2], t)) {
            reject("bad time '" + f[2] + "'");
            continue;
        }
        if (!parse_number(f[3], price)) {
            reject("bad price '" + f[3] + "'");
            continue;
        }
        if (!(price > 0.0)) {
            reject("nonpositive price " + f[3]);
            continue;
        }
        const auto key = std::make_pair(asset, day);
        const auto lt = last_time.find(key);
        if (lt != last_time.end() && t < lt->second) {
            reject("time " + f[2] + " goes backwards");
            continue;
        }
        last_time[key] = t;
        if (t < w0 || t > w1) {
            ++data.n_outside_window;
            continue;
        }
        auto& ts = data.series[asset][day];
        ts.asset = asset;
        ts.day = day;
        const double rebased = t - w0;
        const double lp = std::log(price);
        if (!ts.times.empty() && ts.times.back() == rebased) {
            ts.log_prices.back() = lp;
        } else {
            ts.times.push_back(rebased);
            ts.log_prices.push_back(lp);
        }
    }
    return data;
}

SteppedSeries grid_ticks(const TickSeries& ts, double grid_dt, double length) {
    if (ts.times.size() < 2) throw DataError("day " + ts.day + " of " + ts.asset + ": fewer than 2 ticks");
    const auto n = static_cast<std::size_t>(std::llround(length / grid_dt));
    if (std::abs(static_cast<double>(n) * grid_dt - length) > 1e-9 * length) {
        throw std::invalid_argument("grid_ticks: length is not a multiple of grid_dt");
    }
    // Leading cells without a prior tick take the first price, i.e. carry zero increments.
    std::vector<double> times(ts.times), values(ts.log_prices);
    if (times.front() > 0.0) {
        times.insert(times.begin(), 0.0);
        values.insert(values.begin(), values.front());
    }
    auto s = previous_tick(times, values, 0.0, grid_dt, n + 1);
    s.tick_times = ts.times;
    return s;
}

SteppedSeries grid_and_normalize(const TickSeries& ts, double grid_dt, double length) {
    SteppedSeries s = grid_ticks(ts, grid_dt, length);
    std::vector<double> inc;
    try {
        inc = normalize_increments(s.increments());
    } catch (const DataError&) {
        throw DataError("day " + ts.day + " of " + ts.asset + ": constant price, normalisation degenerate");
    }
    s.levels[0] = 0.0;
    for (std::size_t k = 0; k < inc.size(); ++k) s.levels[k + 1] = s.levels[k] + inc[k];
    return s;
}

std::vector<std::string> assets_by_activity(const TickData& data) {
    auto out = data.assets();
    std::stable_sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
        return data.tick_count(a) > data.tick_count(b);
    });
    return out;
}

}  // namespace epps
