// epps: command line front end. Every subcommand writes plot-ready CSV.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "epps/async_theory.hpp"
#include "epps/csv_io.hpp"
#include "epps/errors.hpp"
#include "epps/filtering.hpp"
#include "epps/fitting.hpp"
#include "epps/kernels.hpp"
#include "epps/model_config.hpp"
#include "epps/pipeline.hpp"
#include "epps/sampling.hpp"

namespace fs = std::filesystem;
using namespace epps;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumerical = 3;

KeyValues load_keys(const std::string& path) { return path.empty() ? KeyValues{} : read_key_values(path); }

double parse_rate(const std::string& s) {
    if (s == "inf" || s == "infinity") return kSynchronous;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && v > 0.0) return v;
    } catch (const std::exception&) {
    }
    throw DataError("rate must be a positive number or 'inf', got '" + s + "'");
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DataError("grid needs 0 < from < to and at least 2 points");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    return out;
}

void write_csv(const std::string& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& cols, const KeyValues& meta = {}) {
    if (out.empty() || out == "-") {
        csv::write_table(std::cout, header, cols, meta);
    } else {
        if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
        csv::write_table(fs::path(out), header, cols, meta);
    }
}

// Run-config keys with CLI overrides applied on top of --config.
struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string ticks;
    std::string filter;
    std::string snr;

    void add(CLI::App* app) {
        app->add_option("--config", config, "key=value run configuration");
        app->add_option("--seed", seed, "RNG seed");
        app->add_option("--out", out, "output directory");
        app->add_option("--ticks", ticks, "tick CSV (asset,day,time_sec,price); implies source=ticks");
        app->add_option("--filter", filter, "none | inverse | wiener")->check(CLI::IsMember({"none", "inverse", "wiener"}));
        app->add_option("--snr", snr, "Wiener SNR: a number or a CSV file with an 'snr' column");
    }

    KeyValues keys() const {
        KeyValues kv = load_keys(config);
        if (seed) kv["seed"] = std::to_string(*seed);
        if (!out.empty()) kv["out_dir"] = out;
        if (!ticks.empty()) {
            kv["source"] = "ticks";
            kv["tick_file"] = ticks;
        }
        if (!filter.empty()) kv["filter"] = filter;
        apply_snr(kv, snr);
        return kv;
    }

    static void apply_snr(KeyValues& kv, const std::string& snr) {
        if (snr.empty()) return;
        try {
            std::size_t used = 0;
            std::stod(snr, &used);
            if (used == snr.size()) {
                kv["snr"] = snr;
                return;
            }
        } catch (const std::exception&) {
        }
        kv["snr_file"] = snr;
    }
};

void print_summary(const RunSummary& s) {
    std::cout << "wrote " << s.files.size() << " files + manifest.json to " << s.out_dir.string() << "\n";
    for (const auto& skip : s.skips) std::cerr << "skipped: " << skip << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Epps effect: theory, simulation, estimation, filtering and fits"};
    app.require_subcommand(1);

    // simulate -----------------------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "simulate a correlated pair of paths");
    std::string sim_config, sim_out = "-";
    double sim_dt = 0.1, sim_horizon = 1000.0, sim_warmup = 0.0;
    std::uint64_t sim_seed = 1;
    std::uint32_t sim_day = 0;
    sim->add_option("--config", sim_config, "model file (cross.*, auto_i.*, auto_j.*)");
    sim->add_option("--dt", sim_dt, "path step [s]");
    sim->add_option("--horizon", sim_horizon, "path length [s]");
    sim->add_option("--warmup", sim_warmup, "extra path before t = 0 [s]");
    sim->add_option("--seed", sim_seed);
    sim->add_option("--day", sim_day, "independent stream index");
    sim->add_option("--out", sim_out, "output CSV ('-' for stdout)");

    // sample -------------------------------------------------------------------------------
    auto* smp = app.add_subcommand("sample", "simulate, draw Poisson ticks and build previous-tick series");
    std::string smp_config, smp_out = "epps_sample", smp_li = "1", smp_lj = "1";
    double smp_dt = 0.1, smp_grid = 1.0, smp_horizon = 1000.0;
    std::uint64_t smp_seed = 1;
    std::uint32_t smp_day = 0;
    smp->add_option("--config", smp_config, "model file");
    smp->add_option("--lambda-i", smp_li, "tick rate of asset i [1/s] or inf");
    smp->add_option("--lambda-j", smp_lj, "tick rate of asset j [1/s] or inf");
    smp->add_option("--dt", smp_dt, "path step [s]");
    smp->add_option("--grid-dt", smp_grid, "output grid step [s]");
    smp->add_option("--horizon", smp_horizon, "session length [s]");
    smp->add_option("--seed", smp_seed);
    smp->add_option("--day", smp_day);
    smp->add_option("--out", smp_out, "output directory");

    // theory -------------------------------------------------------------------------------
    auto* th = app.add_subcommand("theory", "closed-form curves");
    std::string th_quantity, th_config, th_out = "-", th_li = "inf", th_lj = "inf";
    double th_from = 0.1, th_to = 1000.0, th_lag_max = 20.0, th_lag_step = 0.5, th_bin = 0.0;
    std::size_t th_points = 61;
    th->add_option("quantity", th_quantity,
                   "sync_rho | async_rho | sync_covariance | async_covariance | async_variance | "
                   "async_cross_corr | async_autocorr | lorentz_kernel")
        ->required()
        ->check(CLI::IsMember({"sync_rho", "async_rho", "sync_covariance", "async_covariance", "async_variance",
                               "async_cross_corr", "async_autocorr", "lorentz_kernel"}));
    th->add_option("--config", th_config, "model file");
    th->add_option("--lambda-i", th_li, "rate of asset i or inf");
    th->add_option("--lambda-j", th_lj, "rate of asset j or inf");
    th->add_option("--from", th_from, "first dt (or omega) of the log grid");
    th->add_option("--to", th_to, "last dt (or omega) of the log grid");
    th->add_option("--points", th_points, "log grid size");
    th->add_option("--lag-max", th_lag_max, "largest |tau| for lag curves [s]");
    th->add_option("--lag-step", th_lag_step, "tau step for lag curves [s]");
    th->add_option("--bin", th_bin, "average lag curves over increments of this length [s] (0: pointwise)");
    th->add_option("--out", th_out, "output CSV ('-' for stdout)");

    // estimate / run -----------------------------------------------------------------------
    auto* est = app.add_subcommand("estimate", "rates, Epps curves, correlograms and spectra without fits");
    RunFlags est_flags;
    est_flags.add(est);
    auto* run = app.add_subcommand("run", "full pipeline: estimate, filter, fit, manifest");
    RunFlags run_flags;
    run_flags.add(run);

    // filter -------------------------------------------------------------------------------
    auto* flt = app.add_subcommand("filter", "deconvolve the sampling kernel from a spectrum CSV");
    std::string flt_in, flt_mode = "wiener", flt_snr, flt_out = "epps_filter", flt_li, flt_lj;
    double flt_grid = 1.0;
    std::size_t flt_max_lag = 120;
    flt->add_option("--in", flt_in, "spectrum CSV (n,re,im)")->required();
    flt->add_option("--mode", flt_mode)->check(CLI::IsMember({"none", "inverse", "wiener"}));
    flt->add_option("--snr", flt_snr, "number or CSV with an 'snr' column (default: estimated)");
    flt->add_option("--lambda-i", flt_li, "override rate i (default: from the spectrum header)");
    flt->add_option("--lambda-j", flt_lj, "override rate j");
    flt->add_option("--grid-dt", flt_grid, "grid step of the spectrum [s]");
    flt->add_option("--max-lag", flt_max_lag, "correlogram extent [grid steps]");
    flt->add_option("--out", flt_out, "output directory");

    // fit ----------------------------------------------------------------------------------
    auto* fit = app.add_subcommand("fit", "fit a correlogram CSV to a model family");
    std::string fit_in, fit_family, fit_out = "-", fit_li = "1", fit_lj = "1";
    fit->add_option("--in", fit_in, "correlogram CSV (tau,value,stderr)")->required();
    fit->add_option("--family", fit_family, "cross_raw | cross_async | auto_raw | auto_async")
        ->required()
        ->check(CLI::IsMember({"cross_raw", "cross_async", "auto_raw", "auto_async"}));
    fit->add_option("--lambda-i", fit_li, "rate of asset i (async families)");
    fit->add_option("--lambda-j", fit_lj, "rate of asset j (cross_async)");
    fit->add_option("--out", fit_out, "output CSV ('-' for stdout)");

    // figures ------------------------------------------------------------------------------
    auto* fig = app.add_subcommand("figures", "regenerate all synthetic figure data");
    std::string fig_out = "epps_figures";
    std::uint64_t fig_seed = 1;
    fig->add_option("--out", fig_out, "output directory");
    fig->add_option("--seed", fig_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*sim) {
            const ModelPair pair = pair_from_keys(load_keys(sim_config));
            const auto path = PathSimulator(pair, sim_dt, sim_horizon, sim_warmup).simulate(sim_seed, sim_day);
            std::vector<double> t(path.n_levels), xi(path.n_levels), xj(path.n_levels);
            for (std::size_t k = 0; k < path.n_levels; ++k) {
                t[k] = path.time(k);
                xi[k] = path.level(0, k);
                xj[k] = path.level(1, k);
            }
            write_csv(sim_out, {"t", "x_i", "x_j"}, {t, xi, xj}, {{"seed", std::to_string(sim_seed)}});
        } else if (*smp) {
            const ModelPair pair = pair_from_keys(load_keys(smp_config));
            const double rates[2] = {parse_rate(smp_li), parse_rate(smp_lj)};
            const double lmin = std::min(rates[0], rates[1]);
            const double warmup = std::isinf(lmin) ? 0.0 : std::ceil(10.0 / lmin / smp_grid) * smp_grid;
            const auto path = PathSimulator(pair, smp_dt, smp_horizon, warmup).simulate(smp_seed, smp_day);
            fs::create_directories(smp_out);
            const char* names[2] = {"i", "j"};
            for (std::uint32_t a = 0; a < 2; ++a) {
                std::vector<double> ticks;
                if (std::isinf(rates[a])) {
                    for (std::size_t k = 0; k < path.n_levels; ++k) ticks.push_back(path.time(k));
                } else {
                    ticks = draw_poisson_times(rates[a], smp_horizon, warmup, smp_seed, a, smp_day);
                }
                const auto stepped = previous_tick(path, a, ticks, smp_grid, 0.0, smp_horizon);
                csv::write_tick_times(fs::path(smp_out) / (std::string("ticks_") + names[a] + ".csv"),
                                      stepped.tick_times);
                csv::write_stepped_series(fs::path(smp_out) / (std::string("stepped_") + names[a] + ".csv"),
                                          stepped);
            }
            std::cout << "wrote ticks and stepped series to " << smp_out << "\n";
        } else if (*th) {
            const ModelPair pair = pair_from_keys(load_keys(th_config));
            const AsyncKernel k{parse_rate(th_li), parse_rate(th_lj)};
            k.validate();
            const std::string& q = th_quantity;
            const KeyValues meta{{"quantity", q}, {"lambda_i", th_li}, {"lambda_j", th_lj}};
            if (q == "async_cross_corr" || q == "async_autocorr") {
                if (!(th_lag_step > 0.0) || !(th_lag_max >= 0.0)) throw DataError("lag grid must be positive");
                const auto n = static_cast<long>(std::floor(th_lag_max / th_lag_step + 1e-9));
                std::vector<double> tau, value, delta;
                for (long m = -n; m <= n; ++m) {
                    const double t = static_cast<double>(m) * th_lag_step;
                    tau.push_back(t);
                    if (q == "async_cross_corr") {
                        if (th_bin > 0.0) {
                            value.push_back(async_cross_corr_binned(pair.cross(), k, t, th_bin));
                            delta.push_back(0.0);
                        } else {
                            const auto v = async_cross_corr(pair.cross(), k, t);
                            value.push_back(v.regular_part);
                            delta.push_back(v.delta_part);
                        }
                    } else {
                        const auto v = async_autocorr(pair.auto_i(), k.lambda_i, t);
                        value.push_back(v.regular_part);
                        delta.push_back(v.delta_part);
                    }
                }
                write_csv(th_out, {"tau", "value", "delta"}, {tau, value, delta}, meta);
            } else if (q == "lorentz_kernel") {
                std::vector<double> w = log_grid(th_from, th_to, th_points), re, im;
                for (double x : w) {
                    const auto K = lorentz_kernel(k, x);
                    re.push_back(K.real());
                    im.push_back(K.imag());
                }
                write_csv(th_out, {"omega", "re", "im"}, {w, re, im}, meta);
            } else {
                std::vector<double> dt = log_grid(th_from, th_to, th_points), value;
                for (double d : dt) {
                    if (q == "sync_rho") value.push_back(sync_rho(pair, d));
                    if (q == "async_rho") value.push_back(async_rho(pair, k, d));
                    if (q == "sync_covariance") value.push_back(sync_covariance(pair.cross(), d));
                    if (q == "async_covariance") value.push_back(async_covariance(pair.cross(), k, d));
                    if (q == "async_variance") value.push_back(async_variance(pair.auto_i(), k.lambda_i, d));
                }
                write_csv(th_out, {"dt", "value"}, {dt, value}, meta);
            }
        } else if (*est || *run) {
            KeyValues kv = (*est ? est_flags : run_flags).keys();
            if (*est) {
                kv["filter"] = "none";
                kv["families"] = "";
            }
            print_summary(run_pipeline(run_config_from_keys(kv)));
        } else if (*flt) {
            const auto S = csv::read_spectrum(flt_in);
            const double li = flt_li.empty() ? S.lambda_i : parse_rate(flt_li);
            const double lj = flt_lj.empty() ? S.lambda_j : parse_rate(flt_lj);
            if (!(li > 0.0) || !(lj > 0.0)) throw DataError("rates unknown: pass --lambda-i/--lambda-j");
            KeyValues kv{{"filter", flt_mode}};
            RunFlags::apply_snr(kv, flt_snr);
            FilterSpec spec;
            spec.mode = flt_mode == "none" ? FilterSpec::Mode::none
                        : flt_mode == "inverse" ? FilterSpec::Mode::inverse
                                                : FilterSpec::Mode::wiener;
            spec.snr = get_double(kv, "snr", 0.0);
            if (kv.count("snr_file")) {
                const auto t = csv::read_table(kv.at("snr_file"));
                const auto col = t.column("snr");
                for (const auto& row : t.rows) spec.snr_per_bin.push_back(row[col]);
            }
            const auto S_hat = apply_filter(S, li, lj, spec, flt_grid);
            fs::create_directories(flt_out);
            KeyValues meta{{"filter", flt_mode}};
            if (spec.mode == FilterSpec::Mode::wiener && spec.snr_per_bin.empty()) {
                meta["snr"] = csv::format_number(spec.snr > 0.0 ? spec.snr : default_snr(S, li, lj, flt_grid));
            }
            csv::write_spectrum(fs::path(flt_out) / "spectrum_filtered.csv", S_hat, meta);
            csv::write_correlogram(fs::path(flt_out) / "correlogram_filtered.csv",
                                   filtered_correlogram(S_hat, flt_max_lag, flt_grid), meta);
            std::cout << "wrote filtered spectrum and correlogram to " << flt_out << "\n";
        } else if (*fit) {
            const auto cg = csv::read_correlogram(fit_in);
            const FitFamily family = parse_family(fit_family);
            FitResult r;
            switch (family) {
                case FitFamily::cross_raw: r = fit_cross_raw(cg); break;
                case FitFamily::cross_async: r = fit_cross_async(cg, parse_rate(fit_li), parse_rate(fit_lj)); break;
                case FitFamily::auto_raw: r = fit_auto_raw(cg); break;
                case FitFamily::auto_async: r = fit_auto_async(cg, parse_rate(fit_li)); break;
            }
            const std::vector<csv::FitRow> rows{{"i", is_auto_family(family) ? "i" : "j", r}};
            if (fit_out.empty() || fit_out == "-") {
                csv::write_fits(std::cout, rows);
            } else {
                csv::write_fits(fit_out, rows);
            }
        } else if (*fig) {
            print_summary(generate_figures(fig_out, fig_seed));
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return 0;
}
