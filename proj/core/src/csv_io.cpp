#include "epps/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epps/errors.hpp"

namespace epps::csv {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t lineno) {
    if (cell == "nan" || cell == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (cell == "inf") return std::numeric_limits<double>::infinity();
    if (cell == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size()) return v;
    } catch (const std::exception&) {
    }
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": '" + cell + "' is not a number");
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return k;
    }
    throw DataError("table has no column '" + name + "'");
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (line.rfind("#", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                auto key = line.substr(1, eq - 1);
                auto value = line.substr(eq + 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
                t.meta[key] = value;
            }
            continue;
        }
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_cell(c, path, lineno));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw DataError(path.string() + ": missing header");
    return t;
}

void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns, const KeyValues& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_number(columns[c][r]);
        out << "\n";
    }
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns, const KeyValues& meta) {
    auto out = open_out(path);
    write_table(out, header, columns, meta);
}

void write_epps_curve(const std::filesystem::path& path, const EppsCurve& curve, const KeyValues& meta) {
    write_table(path, {"dt", "rho", "stderr"}, {curve.dt_grid, curve.rho, curve.stderr}, meta);
}

void write_correlogram(const std::filesystem::path& path, const Correlogram& cg, const KeyValues& meta) {
    KeyValues m = meta;
    m["n_days"] = std::to_string(cg.n_days);
    m["is_auto"] = cg.is_auto ? "true" : "false";
    m["grid_dt"] = format_number(cg.grid_dt);
    write_table(path, {"tau", "value", "stderr"}, {cg.lag_grid, cg.values, cg.stderr}, m);
}

Correlogram read_correlogram(const std::filesystem::path& path) {
    const auto t = read_table(path);
    Correlogram cg;
    const auto ct = t.column("tau");
    const auto cv = t.column("value");
    const bool has_se = std::find(t.header.begin(), t.header.end(), "stderr") != t.header.end();
    for (const auto& row : t.rows) {
        cg.lag_grid.push_back(row[ct]);
        cg.values.push_back(row[cv]);
        cg.stderr.push_back(has_se ? row[t.column("stderr")] : std::numeric_limits<double>::quiet_NaN());
    }
    cg.n_days = static_cast<std::size_t>(get_int(t.meta, "n_days", 1));
    cg.is_auto = get_bool(t.meta, "is_auto", false);
    cg.grid_dt = cg.lag_grid.size() > 1 ? cg.lag_grid[1] - cg.lag_grid[0] : 1.0;
    return cg;
}

void write_spectrum(const std::filesystem::path& path, const SpectrumEstimate& S, const KeyValues& meta) {
    KeyValues m = meta;
    m["T"] = std::to_string(S.T);
    m["n_days"] = std::to_string(S.n_days);
    m["lambda_i"] = format_number(S.lambda_i);
    m["lambda_j"] = format_number(S.lambda_j);
    m["is_auto"] = S.is_auto ? "true" : "false";
    std::vector<double> n(S.T), re(S.T), im(S.T);
    for (std::size_t k = 0; k < S.T; ++k) {
        n[k] = static_cast<double>(k);
        re[k] = S.S[k].real();
        im[k] = S.S[k].imag();
    }
    write_table(path, {"n", "re", "im"}, {n, re, im}, m);
}

SpectrumEstimate read_spectrum(const std::filesystem::path& path) {
    const auto t = read_table(path);
    SpectrumEstimate S;
    const auto cn = t.column("n"), cr = t.column("re"), ci = t.column("im");
    S.T = t.rows.size();
    S.S.resize(S.T);
    for (const auto& row : t.rows) {
        const double idx = row[cn];
        if (!(idx >= 0.0) || idx >= static_cast<double>(S.T) || idx != std::floor(idx)) {
            throw DataError(path.string() + ": bad frequency index");
        }
        S.S[static_cast<std::size_t>(idx)] = {row[cr], row[ci]};
    }
    S.n_days = static_cast<std::size_t>(get_int(t.meta, "n_days", 1));
    S.lambda_i = get_double(t.meta, "lambda_i", std::numeric_limits<double>::quiet_NaN());
    S.lambda_j = get_double(t.meta, "lambda_j", std::numeric_limits<double>::quiet_NaN());
    S.is_auto = get_bool(t.meta, "is_auto", false);
    return S;
}

void write_fits(std::ostream& out, const std::vector<FitRow>& rows) {
    out << "i,j,family,c,tau,xi,stderr_c,stderr_tau,stderr_xi,chi2,n_points,weighted,degenerate\n";
    for (const auto& r : rows) {
        const auto& f = r.fit;
        out << r.i << "," << r.j << "," << family_name(f.family);
        for (double v : f.params) out << "," << format_number(v);
        for (double v : f.stderr) out << "," << format_number(v);
        out << "," << format_number(f.chi2) << "," << f.n_points << "," << int(f.weighted) << ","
            << int(f.degenerate) << "\n";
    }
}

void write_fits(const std::filesystem::path& path, const std::vector<FitRow>& rows) {
    auto out = open_out(path);
    write_fits(out, rows);
}

void write_stepped_series(const std::filesystem::path& path, const SteppedSeries& s) {
    std::vector<double> t(s.levels.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = s.time(k);
    write_table(path, {"t", "level"}, {t, s.levels});
}

void write_tick_times(const std::filesystem::path& path, const std::vector<double>& ticks) {
    write_table(path, {"tick_time"}, {ticks});
}

}  // namespace epps::csv
