#pragma once

// End-to-end workflow: synthetic or tick-file input -> previous-tick series -> rates, Epps
// curves, correlograms and spectra -> filtering -> fits, written as CSV with a manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epps/filtering.hpp"
#include "epps/fitting.hpp"
#include "epps/ingest.hpp"
#include "epps/model_config.hpp"

namespace epps {

inline constexpr const char* kToolVersion = "0.1.0";

struct Ensemble {
    std::string name;
    std::vector<std::string> assets;
};

struct RunConfig {
    enum class Source { synthetic, ticks };
    Source source = Source::synthetic;

    // synthetic input
    KeyValues model_keys;                  ///< cross.* / auto_i.* / auto_j.*
    double lambda_i = 1.0;
    double lambda_j = 1.0;
    std::size_t n_days = 50;
    double path_dt = 1.0;                  ///< simulation step (divides grid_dt)
    std::optional<std::filesystem::path> replay_file;
    std::vector<std::string> replay_assets;  ///< assets of replay_file whose ticks drive i and j

    // tick input
    std::optional<std::filesystem::path> tick_file;
    SessionSpec session;
    bool fail_fast = false;
    std::size_t select_top = 0;            ///< "T" ensemble: most traded assets
    std::size_t select_bottom = 0;         ///< "L" ensemble: least traded assets

    std::vector<std::string> assets{"A", "B"};
    std::vector<Ensemble> ensembles;       ///< empty: one ensemble with all assets
    std::vector<std::string> ensemble_pairs;  ///< e.g. "T-L"; empty: within each ensemble

    // analysis
    std::uint64_t seed = 1;
    double grid_dt = 1.0;
    std::vector<double> dt_grid{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
    std::size_t max_lag = 120;             ///< grid steps
    bool normalize_per_day = true;         ///< false: one mean and variance over the whole sample
    FilterSpec filter;
    std::vector<FitFamily> families{FitFamily::cross_raw, FitFamily::cross_async, FitFamily::auto_raw,
                                    FitFamily::auto_async};
    std::filesystem::path out_dir = "epps_out";

    /// Throws DataError on invalid settings.
    void validate() const;
    /// Canonical text, hashed into the manifest.
    std::string canonical() const;
};

/// Builds a RunConfig from key=value settings (see README for the key list).
RunConfig run_config_from_keys(const KeyValues& kv);

struct ManifestEntry {
    std::string path;  ///< relative to out_dir
    std::string sha256;
};

struct RunSummary {
    std::filesystem::path out_dir;
    std::vector<ManifestEntry> files;
    std::vector<std::string> skips;
};

/// Runs the full workflow and writes the artifact tree plus manifest.json.
RunSummary run_pipeline(const RunConfig& config);

/// Regenerates the synthetic figure data (theory curves, staircase sample, simulated and
/// filtered correlograms and Epps curves) under out_dir.
RunSummary generate_figures(const std::filesystem::path& out_dir, std::uint64_t seed);

/// Lowercase hex SHA-256 of a byte string / file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Lists every file under out_dir (except manifest.json) with its hash, sorted by path, and
/// writes manifest.json.
std::vector<ManifestEntry> write_manifest(const std::filesystem::path& out_dir, const std::string& config_text,
                                          std::uint64_t seed, const std::vector<std::string>& skips,
                                          const KeyValues& notes);

}  // namespace epps
