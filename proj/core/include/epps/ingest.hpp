#pragma once

// Tick-file ingestion and session windowing.
//
// Format: UTF-8 CSV with header `asset,day,time_sec,price`, time_sec in decimal seconds from
// midnight exchange time. Ticks are kept inside [open + open_skip, open + open_skip + length]
// (and before close - close_skip when a close time is set), rebased to the window start, and
// stored as log prices.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epps/sampling.hpp"

namespace epps {

struct SessionSpec {
    double open_time = 34200.0;  ///< 09:30 in seconds from midnight
    double open_skip = 2700.0;
    double close_skip = 1260.0;
    double length = 20000.0;
    std::optional<double> close_time;  ///< 16:00 would be 57600

    void validate() const;
    double window_start() const { return open_time + open_skip; }
    double window_end() const;
};

struct TickSeries {
    std::string asset;
    std::string day;
    std::vector<double> times;       ///< seconds from window start
    std::vector<double> log_prices;
};

struct TickData {
    /// asset -> day -> series
    std::map<std::string, std::map<std::string, TickSeries>> series;
    std::vector<std::string> diagnostics;  ///< one line per rejected record
    std::size_t n_records = 0;
    std::size_t n_rejected = 0;
    std::size_t n_outside_window = 0;

    std::vector<std::string> assets() const;
    std::size_t tick_count(const std::string& asset) const;
};

/// Loads and windows a tick file. Malformed records (bad fields, price <= 0, time going
/// backwards within an asset-day, asset not in `allowed` when given) are reported with line
/// numbers and skipped, or throw DataError on the first one when fail_fast is set. Repeated
/// timestamps keep the last price.
TickData load_ticks(const std::filesystem::path& path, const SessionSpec& session, bool fail_fast = false,
                    const std::set<std::string>& allowed = {});

/// Previous-tick gridding on [0, length] followed by per-day normalisation of the increments
/// to zero mean and unit variance; levels are the cumulative normalised increments. Cells
/// before the first tick carry zero increments. Throws DataError with fewer than 2 ticks or a
/// constant price.
SteppedSeries grid_and_normalize(const TickSeries& ts, double grid_dt, double length);

/// Gridding without normalisation (levels are log prices, leading cells take the first price).
SteppedSeries grid_ticks(const TickSeries& ts, double grid_dt, double length);

/// Assets ordered by total tick count (descending, ties by name).
std::vector<std::string> assets_by_activity(const TickData& data);

}  // namespace epps
