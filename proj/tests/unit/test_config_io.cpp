#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "epps/csv_io.hpp"
#include "epps/errors.hpp"
#include "epps/model_config.hpp"
#include "oracles.hpp"

using namespace epps;

namespace {

KeyValues parse(const std::string& text) {
    std::istringstream in(text);
    return parse_key_values(in, "cfg");
}

}  // namespace

TEST(ConfigIo, ParsesKeyValuesWithCommentsAndBlanks) {
    const auto kv = parse("# header\n\n  lambda_i = 0.5  # fast\nname=A B\r\nlist = 1, 2 ,5\n");
    EXPECT_EQ(kv.size(), 3u);
    EXPECT_DOUBLE_EQ(get_double(kv, "lambda_i", 0.0), 0.5);
    EXPECT_EQ(get_string(kv, "name", ""), "A B");
    EXPECT_EQ(get_double_list(kv, "list", {}), (std::vector<double>{1.0, 2.0, 5.0}));
    EXPECT_EQ(get_int(kv, "missing", 7), 7);
}

TEST(ConfigIo, MalformedInputNamesTheLine) {
    try {
        parse("a=1\nno equals sign\n");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("cfg:2"), std::string::npos);
    }
    EXPECT_THROW(parse("a=1\na=2\n"), DataError);
    EXPECT_THROW(parse("=3\n"), DataError);
    const auto kv = parse("x=1.5e\nn=3.0\nb=maybe\n");
    EXPECT_THROW(get_double(kv, "x", 0.0), DataError);
    EXPECT_THROW(get_int(kv, "n", 0), DataError);
    EXPECT_THROW(get_bool(kv, "b", false), DataError);
    EXPECT_THROW(read_key_values("/nonexistent/cfg.txt"), DataError);
}

TEST(ConfigIo, ModelKeys) {
    const auto kv = parse("cross.c=0.4\ncross.xi=2\ncross.tau=-1\nauto_i.a=0.8\nauto_i.b=0.2\nauto_i.xi=3\n");
    const auto pair = pair_from_keys(kv);
    EXPECT_DOUBLE_EQ(pair.cross().exp_weight, 0.4);
    EXPECT_DOUBLE_EQ(pair.cross().delta_weight, 0.0);
    EXPECT_DOUBLE_EQ(pair.cross().width, 2.0);
    EXPECT_DOUBLE_EQ(pair.cross().lag, -1.0);
    EXPECT_DOUBLE_EQ(pair.auto_i().delta_weight, 0.8);
    EXPECT_DOUBLE_EQ(pair.auto_i().exp_weight, 0.2);
    // Missing auto kernel: unit Brownian motion.
    EXPECT_DOUBLE_EQ(pair.auto_j().delta_weight, 1.0);
    EXPECT_DOUBLE_EQ(pair.auto_j().width, 0.0);

    const auto delta = model_from_keys(parse("cross.c=0.3\n"), "cross", {});
    EXPECT_DOUBLE_EQ(delta.delta_weight, 0.3);
    EXPECT_DOUBLE_EQ(delta.exp_weight, 0.0);
    EXPECT_THROW(model_from_keys(parse("cross.c=0.3\ncross.a=0.1\n"), "cross", {}), DataError);
    EXPECT_THROW(model_from_keys(parse("cross.c=0.3\ncross.xi=-1\n"), "cross", {}), DataError);
    // |rho| > 1 at some scale is rejected.
    EXPECT_THROW(pair_from_keys(parse("cross.c=1.5\n")), DataError);
}

TEST(ConfigIo, PairKeysRoundTrip) {
    const ModelPair pair({0.1, 2.0, 3.0, 0.25}, {0.7, 0.0, 4.0, 0.3}, CorrelationModel::brownian(1.0));
    const auto back = pair_from_keys(pair_to_keys(pair));
    EXPECT_EQ(back.cross().lag, 2.0);
    EXPECT_EQ(back.cross().exp_weight, 0.25);
    EXPECT_EQ(back.auto_i().width, 4.0);
    EXPECT_EQ(to_text(parse("b=2\na=1\n")), "a=1\nb=2\n");
}

TEST(ConfigIo, NumberFormatting) {
    EXPECT_EQ(csv::format_number(std::nan("")), "nan");
    EXPECT_EQ(csv::format_number(INFINITY), "inf");
    EXPECT_EQ(csv::format_number(-INFINITY), "-inf");
    EXPECT_EQ(csv::format_number(0.5), "0.5");
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::stod(csv::format_number(x)), x);
}

TEST(ConfigIo, CorrelogramRoundTrip) {
    const auto dir = oracle::temp_dir("config_io_cg");
    Correlogram cg;
    cg.grid_dt = 0.5;
    cg.n_days = 3;
    cg.is_auto = true;
    for (int k = -3; k <= 3; ++k) {
        cg.lag_grid.push_back(0.5 * k);
        cg.values.push_back(std::exp(-0.3 * k * k) / 3.0);
        cg.stderr.push_back(k == 0 ? std::nan("") : 0.01 * (k + 4));
    }
    csv::write_correlogram(dir / "cg.csv", cg, {{"kind", "test"}});
    const auto back = csv::read_correlogram(dir / "cg.csv");
    EXPECT_EQ(back.lag_grid, cg.lag_grid);
    EXPECT_EQ(back.values, cg.values);
    EXPECT_TRUE(std::isnan(back.stderr[3]));
    EXPECT_EQ(back.stderr[0], cg.stderr[0]);
    EXPECT_EQ(back.n_days, 3u);
    EXPECT_TRUE(back.is_auto);
    EXPECT_DOUBLE_EQ(back.grid_dt, 0.5);
    EXPECT_EQ(csv::read_table(dir / "cg.csv").meta.at("kind"), "test");
}

TEST(ConfigIo, SpectrumRoundTrip) {
    const auto dir = oracle::temp_dir("config_io_spec");
    SpectrumEstimate S;
    S.T = 6;
    S.n_days = 2;
    S.lambda_i = 0.25;
    S.lambda_j = 1.0 / 3.0;
    S.S = {{1.0, 0.0}, {0.1, 0.2}, {-0.3, 1e-17}, {0.7, 0.0}, {-0.3, -1e-17}, {0.1, -0.2}};
    csv::write_spectrum(dir / "s.csv", S);
    const auto back = csv::read_spectrum(dir / "s.csv");
    EXPECT_EQ(back.T, 6u);
    EXPECT_EQ(back.n_days, 2u);
    EXPECT_EQ(back.S, S.S);
    EXPECT_EQ(back.lambda_j, S.lambda_j);
}

TEST(ConfigIo, TableErrors) {
    const auto dir = oracle::temp_dir("config_io_table");
    {
        std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3,x\n";
    }
    EXPECT_THROW(csv::read_table(dir / "bad.csv"), DataError);
    {
        std::ofstream(dir / "ok.csv") << "# k=v\na,b\n1,2\n";
    }
    const auto t = csv::read_table(dir / "ok.csv");
    EXPECT_EQ(t.column("b"), 1u);
    EXPECT_THROW(t.column("c"), DataError);
}

TEST(ConfigIo, FitsTableHeaderAndNaN) {
    FitResult r;
    r.family = FitFamily::cross_async;
    r.params = {0.5, 1.0, std::nan("")};
    r.stderr = {0.1, 0.2, std::nan("")};
    r.degenerate = true;
    r.n_points = 41;
    std::ostringstream out;
    csv::write_fits(out, {{"A", "B", r}});
    const auto text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "i,j,family,c,tau,xi,stderr_c,stderr_tau,stderr_xi,chi2,n_points,weighted,degenerate");
    EXPECT_NE(text.find("A,B,cross_async,0.5,1,nan,0.10000000000000001,0.20000000000000001,nan,0,41,0,1"),
              std::string::npos)
        << text;
}
