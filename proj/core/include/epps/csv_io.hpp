#pragma once

// Plain CSV readers and writers for every artifact. Numbers are written with 17 significant
// digits so files round-trip exactly and are byte-identical across runs. Optional metadata is
// carried in leading "# key=value" lines.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "epps/estimation.hpp"
#include "epps/fitting.hpp"
#include "epps/model_config.hpp"

namespace epps::csv {

std::string format_number(double v);

struct Table {
    KeyValues meta;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  ///< throws DataError if absent
};

/// Reads a numeric table (header line, numeric rows, optional "# key=value" preamble).
Table read_table(const std::filesystem::path& path);

void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns, const KeyValues& meta = {});
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns, const KeyValues& meta = {});

void write_epps_curve(const std::filesystem::path& path, const EppsCurve& curve, const KeyValues& meta = {});
void write_correlogram(const std::filesystem::path& path, const Correlogram& cg, const KeyValues& meta = {});
Correlogram read_correlogram(const std::filesystem::path& path);

void write_spectrum(const std::filesystem::path& path, const SpectrumEstimate& S, const KeyValues& meta = {});
SpectrumEstimate read_spectrum(const std::filesystem::path& path);

struct FitRow {
    std::string i, j;
    FitResult fit;
};
/// Columns c, tau, xi hold (a, b, xi) for the auto families.
void write_fits(std::ostream& out, const std::vector<FitRow>& rows);
void write_fits(const std::filesystem::path& path, const std::vector<FitRow>& rows);

void write_stepped_series(const std::filesystem::path& path, const SteppedSeries& s);
void write_tick_times(const std::filesystem::path& path, const std::vector<double>& ticks);

}  // namespace epps::csv
