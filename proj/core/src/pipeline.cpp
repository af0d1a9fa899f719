#include "epps/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "epps/async_theory.hpp"
#include "epps/csv_io.hpp"
#include "epps/errors.hpp"
#include "epps/parallel.hpp"
#include "epps/sampling.hpp"

namespace epps {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string safe_name(const std::string& s) {
    std::string out;
    for (char ch : s) {
        const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_' || ch == '-';
        out += ok ? ch : '_';
    }
    return out.empty() ? "_" : out;
}

std::string day_label(std::size_t d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "d%04zu", d);
    return buf;
}

std::size_t steps_of(double span, double step, const std::string& what) {
    const double ratio = span / step;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
        throw DataError(what + " must be a positive multiple of " + csv::format_number(step));
    }
    return n;
}

const char* mode_name(FilterSpec::Mode m) {
    switch (m) {
        case FilterSpec::Mode::none: return "none";
        case FilterSpec::Mode::inverse: return "inverse";
        case FilterSpec::Mode::wiener: return "wiener";
    }
    return "?";
}

FilterSpec::Mode parse_mode(const std::string& s) {
    if (s == "none") return FilterSpec::Mode::none;
    if (s == "inverse") return FilterSpec::Mode::inverse;
    if (s == "wiener") return FilterSpec::Mode::wiener;
    throw DataError("filter must be none, inverse or wiener, got '" + s + "'");
}

// Prepares an output directory: fresh, or a previous run of ours that is cleared.
void prepare_out_dir(const fs::path& dir) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw DataError(dir.string() + " exists and is not a directory");
        if (!fs::is_empty(dir)) {
            if (!fs::exists(dir / "manifest.json")) {
                throw DataError(dir.string() + " is not empty and holds no previous manifest; refusing to overwrite");
            }
            for (const auto& e : fs::directory_iterator(dir)) fs::remove_all(e.path());
        }
    }
    fs::create_directories(dir);
}

struct AssetData {
    std::map<std::string, SteppedSeries> days;  ///< day -> series on [0, T]
    std::size_t ticks = 0;
};

std::vector<double> normalised_increments(const SteppedSeries& s) { return normalize_increments(s.increments()); }

// One mean and variance over all days of an asset.
void sample_normalise(std::map<std::string, std::vector<double>>& days) {
    double n = 0.0, sum = 0.0, sum2 = 0.0;
    for (const auto& [_, x] : days) {
        for (double v : x) {
            n += 1.0;
            sum += v;
        }
    }
    const double mean = sum / n;
    for (const auto& [_, x] : days) {
        for (double v : x) sum2 += (v - mean) * (v - mean);
    }
    const double scale = 1.0 / std::sqrt(sum2 / n);
    for (auto& [_, x] : days) {
        for (double& v : x) v = (v - mean) * scale;
    }
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Configuration

RunConfig run_config_from_keys(const KeyValues& kv) {
    static const std::set<std::string> known{
        "source", "lambda_i", "lambda_j", "n_days", "path_dt", "replay_file", "replay_assets", "tick_file",
        "session.open_time", "session.open_skip", "session.close_skip", "session.length", "session.close_time",
        "fail_fast", "select_top", "select_bottom", "assets", "ensemble_pairs", "seed", "grid_dt", "dt_grid",
        "max_lag", "normalization", "filter", "snr", "snr_file", "families", "out_dir"};
    RunConfig c;
    for (const auto& [k, v] : kv) {
        const bool model = k.rfind("cross.", 0) == 0 || k.rfind("auto_i.", 0) == 0 || k.rfind("auto_j.", 0) == 0;
        if (model) {
            c.model_keys[k] = v;
        } else if (k.rfind("ensemble.", 0) == 0) {
            c.ensembles.push_back({k.substr(9), get_string_list(kv, k, {})});
        } else if (!known.count(k)) {
            throw DataError("unknown configuration key '" + k + "'");
        }
    }
    const std::string source = get_string(kv, "source", "synthetic");
    if (source == "synthetic") {
        c.source = RunConfig::Source::synthetic;
    } else if (source == "ticks") {
        c.source = RunConfig::Source::ticks;
    } else {
        throw DataError("source must be synthetic or ticks");
    }
    c.lambda_i = get_double(kv, "lambda_i", c.lambda_i);
    c.lambda_j = get_double(kv, "lambda_j", c.lambda_j);
    c.n_days = static_cast<std::size_t>(get_int(kv, "n_days", static_cast<long long>(c.n_days)));
    c.grid_dt = get_double(kv, "grid_dt", c.grid_dt);
    c.path_dt = get_double(kv, "path_dt", c.grid_dt);
    if (kv.count("replay_file")) c.replay_file = get_string(kv, "replay_file", "");
    c.replay_assets = get_string_list(kv, "replay_assets", {});
    if (kv.count("tick_file")) c.tick_file = get_string(kv, "tick_file", "");
    c.session.open_time = get_double(kv, "session.open_time", c.session.open_time);
    c.session.open_skip = get_double(kv, "session.open_skip", c.session.open_skip);
    c.session.close_skip = get_double(kv, "session.close_skip", c.session.close_skip);
    c.session.length = get_double(kv, "session.length", c.session.length);
    if (kv.count("session.close_time")) c.session.close_time = get_double(kv, "session.close_time", 0.0);
    c.fail_fast = get_bool(kv, "fail_fast", false);
    c.select_top = static_cast<std::size_t>(get_int(kv, "select_top", 0));
    c.select_bottom = static_cast<std::size_t>(get_int(kv, "select_bottom", 0));
    c.assets = get_string_list(kv, "assets", c.source == RunConfig::Source::synthetic ? c.assets
                                                                                       : std::vector<std::string>{});
    c.ensemble_pairs = get_string_list(kv, "ensemble_pairs", {});
    c.seed = static_cast<std::uint64_t>(get_int(kv, "seed", 1));
    c.dt_grid = get_double_list(kv, "dt_grid", c.dt_grid);
    c.max_lag = static_cast<std::size_t>(get_int(kv, "max_lag", static_cast<long long>(c.max_lag)));
    const std::string norm = get_string(kv, "normalization", "per_day");
    if (norm != "per_day" && norm != "sample") throw DataError("normalization must be per_day or sample");
    c.normalize_per_day = norm == "per_day";
    c.filter.mode = parse_mode(get_string(kv, "filter", "wiener"));
    c.filter.snr = get_double(kv, "snr", 0.0);
    if (kv.count("snr_file")) {
        const auto t = csv::read_table(get_string(kv, "snr_file", ""));
        const auto col = t.column("snr");
        for (const auto& row : t.rows) c.filter.snr_per_bin.push_back(row[col]);
    }
    c.families.clear();
    for (const auto& f : get_string_list(kv, "families", {"cross_raw", "cross_async", "auto_raw", "auto_async"})) {
        try {
            c.families.push_back(parse_family(f));
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what());
        }
    }
    c.out_dir = get_string(kv, "out_dir", c.out_dir.string());
    c.validate();
    return c;
}

void RunConfig::validate() const {
    if (!(grid_dt > 0.0)) throw DataError("grid_dt must be > 0");
    const double T = session.length;
    try {
        session.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    steps_of(T, grid_dt, "session.length");
    for (std::size_t k = 0; k < dt_grid.size(); ++k) {
        steps_of(dt_grid[k], grid_dt, "dt_grid entry " + csv::format_number(dt_grid[k]));
        if (k > 0 && !(dt_grid[k] > dt_grid[k - 1])) throw DataError("dt_grid must be increasing");
    }
    if (static_cast<double>(max_lag) * grid_dt >= T) throw DataError("max_lag must be shorter than the session");
    if (source == Source::synthetic) {
        if (!(path_dt > 0.0)) throw DataError("path_dt must be > 0");
        steps_of(grid_dt, path_dt, "grid_dt");
        if (!(lambda_i > 0.0) || !(lambda_j > 0.0)) throw DataError("rates must be > 0");
        if (n_days == 0) throw DataError("n_days must be >= 1");
        if (assets.size() != 2) throw DataError("synthetic runs use exactly two assets");
        if (replay_file && replay_assets.size() != 2) throw DataError("replay_assets must name two assets");
        pair_from_keys(model_keys);
    } else if (!tick_file) {
        throw DataError("source=ticks requires tick_file");
    }
    if (filter.mode == FilterSpec::Mode::wiener && filter.snr < 0.0) throw DataError("snr must be > 0 (0 = default)");
    for (double v : filter.snr_per_bin) {
        if (!(v > 0.0)) throw DataError("per-bin snr must be > 0");
    }
}

std::string RunConfig::canonical() const {
    KeyValues kv = model_keys;
    auto num = [](double v) { return csv::format_number(v); };
    auto join = [](const auto& items, auto&& fmt) {
        std::string s;
        for (const auto& x : items) s += (s.empty() ? "" : ",") + fmt(x);
        return s;
    };
    auto id = [](const std::string& s) { return s; };
    kv["source"] = source == Source::synthetic ? "synthetic" : "ticks";
    kv["lambda_i"] = num(lambda_i);
    kv["lambda_j"] = num(lambda_j);
    kv["n_days"] = std::to_string(n_days);
    kv["path_dt"] = num(path_dt);
    if (replay_file) kv["replay_file"] = replay_file->string();
    kv["replay_assets"] = join(replay_assets, id);
    if (tick_file) kv["tick_file"] = tick_file->string();
    kv["session.open_time"] = num(session.open_time);
    kv["session.open_skip"] = num(session.open_skip);
    kv["session.close_skip"] = num(session.close_skip);
    kv["session.length"] = num(session.length);
    if (session.close_time) kv["session.close_time"] = num(*session.close_time);
    kv["fail_fast"] = fail_fast ? "true" : "false";
    kv["select_top"] = std::to_string(select_top);
    kv["select_bottom"] = std::to_string(select_bottom);
    kv["assets"] = join(assets, id);
    for (const auto& e : ensembles) kv["ensemble." + e.name] = join(e.assets, id);
    kv["ensemble_pairs"] = join(ensemble_pairs, id);
    kv["seed"] = std::to_string(seed);
    kv["grid_dt"] = num(grid_dt);
    kv["dt_grid"] = join(dt_grid, num);
    kv["max_lag"] = std::to_string(max_lag);
    kv["normalization"] = normalize_per_day ? "per_day" : "sample";
    kv["filter"] = mode_name(filter.mode);
    kv["snr"] = num(filter.snr);
    kv["snr_per_bin"] = join(filter.snr_per_bin, num);
    kv["families"] = join(families, [](FitFamily f) { return std::string(family_name(f)); });
    return to_text(kv);
}

// ---------------------------------------------------------------------------------------------
// Hashing and manifest

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::vector<ManifestEntry> write_manifest(const fs::path& out_dir, const std::string& config_text, std::uint64_t seed,
                                          const std::vector<std::string>& skips, const KeyValues& notes) {
    std::vector<ManifestEntry> files;
    for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), out_dir).generic_string();
        if (rel == "manifest.json") continue;
        files.push_back({rel, sha256_file(e.path())});
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });

    nlohmann::ordered_json j;
    j["tool"] = "epps";
    j["version"] = kToolVersion;
    j["seed"] = seed;
    j["config_sha256"] = sha256_hex(config_text);
    j["config"] = config_text;
    j["notes"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : notes) j["notes"][k] = v;
    j["skips"] = skips;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw DataError("cannot write manifest");
    out << j.dump(2) << "\n";
    return files;
}

// ---------------------------------------------------------------------------------------------
// Run

namespace {

std::map<std::string, AssetData> synthetic_assets(const RunConfig& c, std::vector<std::string>& skips) {
    const ModelPair pair = pair_from_keys(c.model_keys);
    const double T = c.session.length;
    const double lambda_min = std::min(c.lambda_i, c.lambda_j);
    const double warmup_raw = std::isinf(lambda_min) ? 0.0 : 10.0 / lambda_min;
    const double warmup = std::ceil(warmup_raw / c.grid_dt) * c.grid_dt;
    const PathSimulator sim(pair, c.path_dt, T, warmup);

    std::vector<std::vector<std::vector<double>>> replay(2);  // asset -> day -> times
    if (c.replay_file) {
        const auto data = load_ticks(*c.replay_file, c.session, c.fail_fast);
        for (std::size_t a = 0; a < 2; ++a) {
            const auto it = data.series.find(c.replay_assets[a]);
            if (it == data.series.end()) throw DataError("replay asset '" + c.replay_assets[a] + "' not in replay file");
            for (const auto& [day, ts] : it->second) replay[a].push_back(ts.times);
        }
    }
    const double rates[2] = {c.lambda_i, c.lambda_j};

    std::vector<std::array<std::optional<SteppedSeries>, 2>> out_days(c.n_days);
    std::vector<std::array<std::size_t, 2>> counts(c.n_days);
    std::vector<std::string> errors(c.n_days);
    parallel_for(c.n_days, [&](std::size_t d) {
        try {
            const auto path = sim.simulate(c.seed, static_cast<std::uint32_t>(d));
            for (std::size_t a = 0; a < 2; ++a) {
                std::vector<double> ticks;
                if (!replay[a].empty()) {
                    ticks = replay[a][d % replay[a].size()];
                    if (ticks.empty() || ticks.front() > 0.0) ticks.insert(ticks.begin(), 0.0);
                } else if (std::isinf(rates[a])) {
                    for (std::size_t k = 0; k < path.n_levels; ++k) ticks.push_back(path.time(k));
                } else {
                    ticks = draw_poisson_times(rates[a], T, warmup, c.seed, static_cast<std::uint32_t>(a),
                                               static_cast<std::uint32_t>(d));
                }
                counts[d][a] = static_cast<std::size_t>(
                    std::count_if(ticks.begin(), ticks.end(), [&](double t) { return t > 0.0 && t <= T; }));
                out_days[d][a] = previous_tick(path, a, ticks, c.grid_dt, 0.0, T);
            }
        } catch (const std::exception& e) {
            errors[d] = e.what();
        }
    });
    std::map<std::string, AssetData> assets;
    for (std::size_t d = 0; d < c.n_days; ++d) {
        if (!errors[d].empty()) {
            skips.push_back("day " + day_label(d) + ": " + errors[d]);
            continue;
        }
        for (std::size_t a = 0; a < 2; ++a) {
            auto& ad = assets[c.assets[a]];
            ad.days.emplace(day_label(d), std::move(*out_days[d][a]));
            ad.ticks += counts[d][a];
        }
    }
    return assets;
}

std::map<std::string, AssetData> tick_assets(const RunConfig& c, std::vector<std::string>& skips,
                                             std::vector<Ensemble>& ensembles) {
    const std::set<std::string> allowed(c.assets.begin(), c.assets.end());
    const auto data = load_ticks(*c.tick_file, c.session, c.fail_fast, allowed);
    for (const auto& d : data.diagnostics) skips.push_back("record " + d);
    if (c.select_top || c.select_bottom) {
        const auto ranked = assets_by_activity(data);
        const std::size_t top = std::min(c.select_top, ranked.size());
        const std::size_t bottom = std::min(c.select_bottom, ranked.size());
        if (top) ensembles.push_back({"T", {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top)}});
        if (bottom) ensembles.push_back({"L", {ranked.end() - static_cast<std::ptrdiff_t>(bottom), ranked.end()}});
    }
    std::map<std::string, AssetData> assets;
    const double T = c.session.length;
    for (const auto& [name, days] : data.series) {
        auto& ad = assets[name];
        for (const auto& [day, ts] : days) {
            try {
                ad.days.emplace(day, c.normalize_per_day ? grid_and_normalize(ts, c.grid_dt, T)
                                                         : grid_ticks(ts, c.grid_dt, T));
                ad.ticks += ts.times.size();
            } catch (const DataError& e) {
                skips.push_back(std::string("asset-day skipped: ") + e.what());
            }
        }
    }
    return assets;
}

std::vector<std::pair<std::string, std::string>> analysis_pairs(const std::vector<Ensemble>& ensembles,
                                                                const std::vector<std::string>& ensemble_pairs,
                                                                const std::map<std::string, AssetData>& assets) {
    std::map<std::string, std::vector<std::string>> by_name;
    for (const auto& e : ensembles) {
        std::vector<std::string> present;
        for (const auto& a : e.assets) {
            if (assets.count(a)) present.push_back(a);
        }
        by_name[e.name] = present;
    }
    std::set<std::pair<std::string, std::string>> pairs;
    auto add_between = [&](const std::vector<std::string>& x, const std::vector<std::string>& y) {
        for (const auto& a : x) {
            for (const auto& b : y) {
                if (a != b) pairs.insert(a < b ? std::pair{a, b} : std::pair{b, a});
            }
        }
    };
    if (ensemble_pairs.empty()) {
        for (const auto& [_, members] : by_name) add_between(members, members);
    } else {
        for (const auto& spec : ensemble_pairs) {
            const auto dash = spec.find('-');
            if (dash == std::string::npos) throw DataError("ensemble pair '" + spec + "' must look like T-L");
            const auto x = by_name.find(spec.substr(0, dash));
            const auto y = by_name.find(spec.substr(dash + 1));
            if (x == by_name.end() || y == by_name.end()) throw DataError("unknown ensemble in '" + spec + "'");
            add_between(x->second, y->second);
        }
    }
    return {pairs.begin(), pairs.end()};
}

}  // namespace

RunSummary run_pipeline(const RunConfig& config) {
    config.validate();
    prepare_out_dir(config.out_dir);
    const fs::path out = config.out_dir;
    const double T = config.session.length;
    const std::size_t T_steps = steps_of(T, config.grid_dt, "session.length");

    std::vector<std::string> skips;
    std::vector<Ensemble> ensembles = config.ensembles;
    std::map<std::string, AssetData> assets;
    if (config.source == RunConfig::Source::synthetic) {
        assets = synthetic_assets(config, skips);
        ensembles = {{"all", config.assets}};
    } else {
        assets = tick_assets(config, skips, ensembles);
        if (ensembles.empty()) ensembles.push_back({"all", assets.empty() ? config.assets : [&] {
                                                         std::vector<std::string> v;
                                                         for (const auto& [a, _] : assets) v.push_back(a);
                                                         return v;
                                                     }()});
    }

    // Rates and normalised increments. Days with constant prices are dropped in either mode.
    std::map<std::string, RateEstimate> rates;
    std::map<std::string, std::map<std::string, std::vector<double>>> increments;
    for (auto it = assets.begin(); it != assets.end();) {
        auto& [name, ad] = *it;
        for (auto d = ad.days.begin(); d != ad.days.end();) {
            try {
                auto x = normalised_increments(d->second);
                increments[name][d->first] = config.normalize_per_day ? std::move(x) : d->second.increments();
                ++d;
            } catch (const DataError& e) {
                skips.push_back("asset " + name + " day " + d->first + ": " + e.what());
                d = ad.days.erase(d);
            }
        }
        if (ad.days.empty() || ad.ticks == 0) {
            skips.push_back("asset " + name + ": no usable days");
            increments.erase(name);
            it = assets.erase(it);
            continue;
        }
        if (!config.normalize_per_day) sample_normalise(increments[name]);
        rates[name] = estimate_rate(ad.ticks, T * static_cast<double>(ad.days.size()));
        ++it;
    }
    {
        std::vector<std::string> names;
        std::vector<double> lambda, se, ticks, days;
        for (const auto& [name, r] : rates) {
            names.push_back(name);
            lambda.push_back(r.lambda);
            se.push_back(r.stderr);
            ticks.push_back(static_cast<double>(r.count));
            days.push_back(static_cast<double>(assets[name].days.size()));
        }
        std::ofstream f(out / "rates.csv", std::ios::binary);
        f << "asset,lambda,stderr,ticks,days\n";
        for (std::size_t k = 0; k < names.size(); ++k) {
            f << names[k] << "," << csv::format_number(lambda[k]) << "," << csv::format_number(se[k]) << ","
              << static_cast<std::size_t>(ticks[k]) << "," << static_cast<std::size_t>(days[k]) << "\n";
        }
    }

    std::vector<csv::FitRow> fit_rows;
    std::vector<std::array<std::string, 3>> chi2_rows;  // i, j, kind -> ratio stored separately
    std::vector<double> chi2_values;
    auto wants = [&](FitFamily f) {
        return std::find(config.families.begin(), config.families.end(), f) != config.families.end();
    };

    // Auto-correlograms and auto fits per asset.
    for (const auto& [name, ad] : assets) {
        std::vector<std::vector<double>> x;
        for (const auto& [day, inc] : increments[name]) x.push_back(inc);
        try {
            const auto cg = correlogram(x, x, config.max_lag, config.grid_dt, true, false);
            csv::write_correlogram(out / "assets" / safe_name(name) / "autocorrelogram.csv", cg);
            std::optional<FitResult> raw, asyn;
            if (wants(FitFamily::auto_raw)) {
                raw = fit_auto_raw(cg);
                fit_rows.push_back({name, name, *raw});
            }
            if (wants(FitFamily::auto_async)) {
                asyn = fit_auto_async(cg, rates[name].lambda);
                fit_rows.push_back({name, name, *asyn});
            }
            if (raw && asyn) {
                chi2_rows.push_back({name, name, "auto"});
                chi2_values.push_back(chi2_ratio(*raw, *asyn));
            }
        } catch (const std::exception& e) {
            skips.push_back("auto analysis " + name + ": " + e.what());
        }
    }

    std::string snr_source = "not used";
    for (const auto& [i, j] : analysis_pairs(ensembles, config.ensemble_pairs, assets)) {
        const std::string tag = safe_name(i) + "__" + safe_name(j);
        try {
            std::vector<SteppedSeries> si, sj;
            std::vector<std::vector<double>> xi, xj;
            for (const auto& [day, s] : assets[i].days) {
                const auto other = assets[j].days.find(day);
                if (other == assets[j].days.end()) continue;
                si.push_back(s);
                sj.push_back(other->second);
                xi.push_back(increments[i][day]);
                xj.push_back(increments[j][day]);
            }
            if (si.empty()) throw DataError("no common days");
            const fs::path pdir = out / "pairs" / tag;
            const double li = rates[i].lambda, lj = rates[j].lambda;

            csv::write_epps_curve(pdir / "epps_raw.csv", epps_curve(si, sj, config.dt_grid));
            const auto cg = correlogram(xi, xj, config.max_lag, config.grid_dt, false, false);
            csv::write_correlogram(pdir / "correlogram_raw.csv", cg);

            auto S_ij = estimate_spectrum(xi, xj, T_steps, true);
            auto S_ii = estimate_spectrum(xi, xi, T_steps, true);
            auto S_jj = estimate_spectrum(xj, xj, T_steps, true);
            S_ij.lambda_i = li;
            S_ij.lambda_j = lj;
            S_ii.is_auto = S_jj.is_auto = true;
            S_ii.lambda_i = S_ii.lambda_j = li;
            S_jj.lambda_i = S_jj.lambda_j = lj;
            csv::write_spectrum(pdir / "spectrum_raw.csv", S_ij);

            KeyValues fmeta{{"filter", mode_name(config.filter.mode)}};
            if (config.filter.mode == FilterSpec::Mode::wiener) {
                if (!config.filter.snr_per_bin.empty()) {
                    snr_source = "per-bin file";
                } else if (config.filter.snr > 0.0) {
                    snr_source = "user scalar";
                    fmeta["snr"] = csv::format_number(config.filter.snr);
                } else {
                    snr_source = "default scalar (low/high spectral mass split at min rate)";
                    fmeta["snr"] = csv::format_number(default_snr(S_ij, li, lj, config.grid_dt));
                }
                fmeta["snr_source"] = snr_source;
            }
            const auto S_hat = apply_filter(S_ij, li, lj, config.filter, config.grid_dt);
            csv::write_spectrum(pdir / "spectrum_filtered.csv", S_hat, fmeta);
            csv::write_correlogram(pdir / "correlogram_filtered.csv",
                                   filtered_correlogram(S_hat, config.max_lag, config.grid_dt), fmeta);
            csv::write_epps_curve(pdir / "epps_filtered.csv",
                                  filtered_epps_curve(S_hat, S_ii, S_jj, config.dt_grid, config.grid_dt), fmeta);

            std::optional<FitResult> raw, asyn;
            if (wants(FitFamily::cross_raw)) {
                try {
                    raw = fit_cross_raw(cg);
                    fit_rows.push_back({i, j, *raw});
                } catch (const NumericalError& e) {
                    skips.push_back("fit cross_raw " + tag + ": " + e.what());
                }
            }
            if (wants(FitFamily::cross_async)) {
                try {
                    asyn = fit_cross_async(cg, li, lj);
                    fit_rows.push_back({i, j, *asyn});
                } catch (const NumericalError& e) {
                    skips.push_back("fit cross_async " + tag + ": " + e.what());
                }
            }
            if (raw && asyn && asyn->chi2 > 0.0) {
                chi2_rows.push_back({i, j, "cross"});
                chi2_values.push_back(chi2_ratio(*raw, *asyn));
            }
        } catch (const std::exception& e) {
            skips.push_back("pair " + tag + ": " + e.what());
        }
    }

    csv::write_fits(out / "fits.csv", fit_rows);
    {
        std::ofstream f(out / "chi2_ratios.csv", std::ios::binary);
        f << "i,j,kind,ratio\n";
        for (std::size_t k = 0; k < chi2_rows.size(); ++k) {
            f << chi2_rows[k][0] << "," << chi2_rows[k][1] << "," << chi2_rows[k][2] << ","
              << csv::format_number(chi2_values[k]) << "\n";
        }
    }

    const KeyValues notes{
        {"correlogram_lag_extent_s", csv::format_number(static_cast<double>(config.max_lag) * config.grid_dt)},
        {"fit_weighting", "inverse across-day variance when >= 5 days, else uniform"},
        {"normalisation", config.normalize_per_day ? "per day, zero mean and unit variance increments after gridding"
                                                   : "whole sample, zero mean and unit variance increments after gridding"},
        {"snr", snr_source},
        {"grid_dt", csv::format_number(config.grid_dt)},
    };
    RunSummary summary;
    summary.out_dir = out;
    summary.skips = skips;
    summary.files = write_manifest(out, config.canonical(), config.seed, skips, notes);
    return summary;
}

// ---------------------------------------------------------------------------------------------
// Figures

RunSummary generate_figures(const fs::path& out_dir, std::uint64_t seed) {
    prepare_out_dir(out_dir);
    std::vector<std::string> skips;

    // Staircase: a Brownian path and its previous-tick version.
    {
        const ModelPair pair(CorrelationModel::brownian(0.5), CorrelationModel::brownian(1.0),
                             CorrelationModel::brownian(1.0));
        const double h = 0.1, horizon = 200.0, lambda = 0.2, warmup = 50.0;
        const auto path = PathSimulator(pair, h, horizon, warmup).simulate(seed);
        const auto ticks = draw_poisson_times(lambda, horizon, warmup, seed, 0, 0);
        const auto stepped = previous_tick(path, 0, ticks, h, 0.0, horizon);
        std::vector<double> t, x, xs;
        const auto offset = static_cast<std::size_t>(std::llround(warmup / h));
        for (std::size_t k = 0; k < stepped.levels.size(); ++k) {
            t.push_back(stepped.time(k));
            x.push_back(path.level(0, offset + k));
            xs.push_back(stepped.levels[k]);
        }
        csv::write_table(out_dir / "staircase.csv", {"t", "path", "stepped"}, {t, x, xs},
                         {{"lambda", csv::format_number(lambda)}});
    }

    // Epps curves from theory: synchronous, sampled at lambda = 1, lagged by 2 s.
    {
        const double c = 0.5;
        const ModelPair flat(CorrelationModel::brownian(c), CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0));
        const ModelPair lagged(CorrelationModel::brownian(c, 2.0), CorrelationModel::brownian(1.0),
                               CorrelationModel::brownian(1.0));
        const AsyncKernel k{1.0, 1.0};
        std::vector<double> dt, sync, async0, async2, sync2;
        for (int m = 0; m <= 120; ++m) {
            const double d = std::pow(10.0, -1.0 + 3.0 * m / 120.0);
            dt.push_back(d);
            sync.push_back(sync_rho(flat, d));
            async0.push_back(async_rho(flat, k, d));
            sync2.push_back(sync_rho(lagged, d));
            async2.push_back(async_rho(lagged, k, d));
        }
        csv::write_table(out_dir / "epps_theory.csv", {"dt", "rho_sync", "rho_async", "rho_sync_lag2", "rho_async_lag2"},
                         {dt, sync, async0, sync2, async2}, {{"c", "0.5"}, {"lambda", "1"}});
    }

    // Sampled auto-kernel of a Brownian motion with a short mean-reverting component.
    {
        const CorrelationModel auto_model{1.0, 0.0, 0.3, -0.5};
        const double lambda = 1.0;
        std::vector<double> tau, regular, dt, var_sync, var_async;
        for (int m = 0; m <= 100; ++m) {
            const double t = 0.05 * m;
            tau.push_back(t);
            regular.push_back(async_autocorr(auto_model, lambda, t).regular_part);
        }
        for (int m = 1; m <= 100; ++m) {
            const double d = 0.1 * m;
            dt.push_back(d);
            var_sync.push_back(sync_covariance(auto_model, d));
            var_async.push_back(async_variance(auto_model, lambda, d));
        }
        const KeyValues meta{{"delta_weight", csv::format_number(async_autocorr_delta_weight(auto_model, lambda))}};
        csv::write_table(out_dir / "autocorr_theory.csv", {"tau", "regular"}, {tau, regular}, meta);
        csv::write_table(out_dir / "variance_theory.csv", {"dt", "sync", "async"}, {dt, var_sync, var_async});
    }

    // Simulated asymmetric-rate pair: raw and filtered correlograms and Epps curves.
    {
        RunConfig c;
        c.model_keys = {{"cross.c", "0.5"}};
        c.lambda_i = 1.0;
        c.lambda_j = 0.05;
        c.n_days = 20;
        c.seed = seed;
        c.max_lag = 60;
        c.families = {FitFamily::cross_raw, FitFamily::cross_async};
        c.out_dir = out_dir / "simulated_pair";
        const auto sub = run_pipeline(c);
        for (const auto& s : sub.skips) skips.push_back("simulated_pair: " + s);

        const ModelPair pair(CorrelationModel::brownian(0.5), CorrelationModel::brownian(1.0),
                             CorrelationModel::brownian(1.0));
        const AsyncKernel k{c.lambda_i, c.lambda_j};
        std::vector<double> tau, theory, dt, rho;
        for (int m = -60; m <= 60; ++m) {
            tau.push_back(m);
            theory.push_back(async_cross_corr_binned(pair.cross(), k, m, 1.0) /
                             std::sqrt(async_variance(pair.auto_i(), k.lambda_i, 1.0) *
                                       async_variance(pair.auto_j(), k.lambda_j, 1.0)));
        }
        for (double d : c.dt_grid) {
            dt.push_back(d);
            rho.push_back(async_rho(pair, k, d));
        }
        csv::write_table(out_dir / "correlogram_theory.csv", {"tau", "value"}, {tau, theory});
        csv::write_table(out_dir / "epps_async_theory.csv", {"dt", "rho"}, {dt, rho});
    }

    RunSummary summary;
    summary.out_dir = out_dir;
    summary.skips = skips;
    summary.files = write_manifest(out_dir, "figures\nseed=" + std::to_string(seed) + "\n", seed, skips, {});
    return summary;
}

}  // namespace epps
