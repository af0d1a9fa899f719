#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "epps/errors.hpp"
#include "epps/kernels.hpp"
#include "epps/sampling.hpp"
#include "oracles.hpp"

using namespace epps;

namespace {

ModelPair brownian_pair(double c) {
    return {CorrelationModel::brownian(c), CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0)};
}

}  // namespace

TEST(Sampling, PoissonTimesAreSortedInsideTheWindow) {
    const auto t = draw_poisson_times(2.0, 100.0, 5.0, 11, 0, 3);
    ASSERT_FALSE(t.empty());
    EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
    EXPECT_GE(t.front(), -5.0);
    EXPECT_LE(t.back(), 100.0);
}

TEST(Sampling, PoissonCountsHaveTheRightMeanAndVariance) {
    const double lambda = 0.7, span = 50.0;
    const int days = 2000;
    double s = 0.0, s2 = 0.0;
    for (int d = 0; d < days; ++d) {
        const double n = static_cast<double>(draw_poisson_times(lambda, span, 0.0, 5, 1, d).size());
        s += n;
        s2 += n * n;
    }
    const double mean = s / days, var = s2 / days - mean * mean;
    const double mu = lambda * span;
    EXPECT_NEAR(mean, mu, 5.0 * std::sqrt(mu / days));
    EXPECT_NEAR(var / mu, 1.0, 5.0 * std::sqrt(2.0 / days));
}

TEST(Sampling, StreamsDifferByAssetAndDay) {
    const auto a = draw_poisson_times(1.0, 20.0, 0.0, 1, 0, 0);
    EXPECT_EQ(a, draw_poisson_times(1.0, 20.0, 0.0, 1, 0, 0));
    EXPECT_NE(a, draw_poisson_times(1.0, 20.0, 0.0, 1, 1, 0));
    EXPECT_NE(a, draw_poisson_times(1.0, 20.0, 0.0, 1, 0, 1));
}

TEST(Sampling, PlanReplaysGivenTimes) {
    SamplingPlan plan{{1.0, 2.0}, {{}, {-1.0, 0.5, 3.0}}};
    plan.validate();
    EXPECT_EQ(plan.ticks(1, 10.0, 1), (std::vector<double>{-1.0, 0.5, 3.0}));
    EXPECT_EQ(plan.ticks(0, 10.0, 1, 0, 0.0), draw_poisson_times(1.0, 10.0, 0.0, 1, 0, 0));
    SamplingPlan bad{{1.0}, {{1.0, 1.0}}};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Sampling, GenericPreviousTick) {
    const std::vector<double> t{0.0, 0.5, 2.2, 2.9};
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = previous_tick(t, v, 0.0, 1.0, 4);
    EXPECT_EQ(s.levels, (std::vector<double>{1.0, 2.0, 2.0, 4.0}));
    EXPECT_EQ(s.increments(), (std::vector<double>{1.0, 0.0, 2.0}));
    EXPECT_THROW(previous_tick(std::vector<double>{0.1}, std::vector<double>{1.0}, 0.0, 1.0, 2), std::invalid_argument);
}

TEST(Sampling, PathPreviousTickRegistersAtTheCellEnd) {
    const PathSimulator sim(brownian_pair(0.5), 0.1, 10.0, 1.0);
    const auto path = sim.simulate(3);
    // Path starts at -1 with step 0.1: index k is time -1 + 0.1 k.
    const std::vector<double> ticks{-0.95, 0.31, 0.33, 4.0, 7.77};
    const auto s = previous_tick(path, 0, ticks, 1.0, 0.0, 10.0);
    ASSERT_EQ(s.levels.size(), 11u);
    auto at = [&](double t) { return path.level(0, static_cast<std::size_t>(std::llround((t + 1.0) / 0.1))); };
    EXPECT_EQ(s.levels[0], at(-0.9));  // -0.95 registers at -0.9
    EXPECT_EQ(s.levels[1], at(0.4));   // 0.31 and 0.33 both register at 0.4
    EXPECT_EQ(s.levels[3], at(0.4));
    EXPECT_EQ(s.levels[4], at(4.0));   // on-grid tick registers at itself
    EXPECT_EQ(s.levels[7], at(4.0));
    EXPECT_EQ(s.levels[8], at(7.8));
    EXPECT_EQ(s.levels[10], at(7.8));
}

TEST(Sampling, DenseTicksReproduceThePath) {
    const PathSimulator sim(brownian_pair(0.3), 0.5, 100.0);
    const auto path = sim.simulate(8);
    std::vector<double> ticks;
    for (std::size_t k = 0; k < path.n_levels; ++k) ticks.push_back(path.time(k));
    const auto s = previous_tick(path, 1, ticks, 0.5, 0.0, 100.0);
    for (std::size_t k = 0; k < s.levels.size(); ++k) ASSERT_EQ(s.levels[k], path.level(1, k));
}

TEST(Sampling, BrownianPairIncrementsHaveTheModelCovariance) {
    const double h = 0.1, c = 0.5;
    const PathSimulator sim(brownian_pair(c), h, 4000.0);
    const auto path = sim.simulate(21);
    const std::size_t n = path.n_levels - 1;
    double sii = 0.0, sjj = 0.0, sij = 0.0, lag1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = path.level(0, k + 1) - path.level(0, k);
        const double y = path.level(1, k + 1) - path.level(1, k);
        sii += x * x;
        sjj += y * y;
        sij += x * y;
        if (k + 1 < n) lag1 += x * (path.level(1, k + 2) - path.level(1, k + 1));
    }
    const double N = static_cast<double>(n);
    EXPECT_NEAR(sii / N / h, 1.0, 5.0 * std::sqrt(2.0 / N));
    EXPECT_NEAR(sjj / N / h, 1.0, 5.0 * std::sqrt(2.0 / N));
    EXPECT_NEAR(sij / N / h, c, 5.0 * std::sqrt((1.0 + c * c) / N));
    EXPECT_NEAR(lag1 / N / h, 0.0, 5.0 / std::sqrt(N));
}

TEST(Sampling, LaggedExponentialKernelAcrossManyPaths) {
    // Grid increments at lag k h have covariance given by the kernel second difference.
    const double h = 0.5;
    const CorrelationModel cross{0.0, 1.0, 2.0, 0.6};
    const ModelPair pair(cross, CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0));
    const PathSimulator sim(pair, h, 500.0);
    const std::vector<int> lags{-4, 0, 2, 3, 8};
    std::vector<double> sum(lags.size()), sum2(lags.size());
    const int paths = 60;
    for (int p = 0; p < paths; ++p) {
        const auto path = sim.simulate(4, p);
        const std::size_t n = path.n_levels - 1;
        for (std::size_t q = 0; q < lags.size(); ++q) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t k = 10; k + 10 < n; ++k) {
                const auto kj = static_cast<std::ptrdiff_t>(k) - lags[q];
                const double x = path.level(0, k + 1) - path.level(0, k);
                const double y = path.level(1, kj + 1) - path.level(1, kj);
                acc += x * y;
                ++cnt;
            }
            const double est = acc / static_cast<double>(cnt);
            sum[q] += est;
            sum2[q] += est * est;
        }
    }
    for (std::size_t q = 0; q < lags.size(); ++q) {
        const double mean = sum[q] / paths;
        const double se = std::sqrt((sum2[q] / paths - mean * mean) / (paths - 1));
        // <dX^i_t dX^j_{t - m h}> = int (h - |v|)_+ c(m h + v) dv.
        const double expected = kernel_second_difference(cross, lags[q] * h, h);
        EXPECT_NEAR(mean, expected, 5.0 * se + 1e-12) << "lag " << lags[q];
    }
}

TEST(Sampling, SimulationIsDeterministicPerSeedAndDay) {
    const PathSimulator sim(brownian_pair(0.2), 1.0, 64.0);
    EXPECT_EQ(sim.simulate(1, 2).values, sim.simulate(1, 2).values);
    EXPECT_NE(sim.simulate(1, 2).values, sim.simulate(1, 3).values);
    EXPECT_NE(sim.simulate(1, 2).values, sim.simulate(2, 2).values);
    EXPECT_GE(sim.embedding_size(), 2 * sim.n_increments());
}

TEST(Sampling, PathStartsAtZeroBeforeWarmup) {
    const auto path = simulate_paths(brownian_pair(0.5), 0.1, 10.0, 2, 7, 2.0);
    EXPECT_DOUBLE_EQ(path.start_time, -2.0);
    EXPECT_EQ(path.level(0, 0), 0.0);
    EXPECT_EQ(path.level(1, 0), 0.0);
    EXPECT_EQ(path.n_levels, 121u);
}
