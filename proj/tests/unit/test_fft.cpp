#include <gtest/gtest.h>

#include <cmath>

#include "epps/fft.hpp"
#include "epps/rng.hpp"
#include "oracles.hpp"

using epps::fft::cd;

namespace {

std::vector<cd> random_complex(std::size_t n, std::uint64_t seed) {
    epps::Philox g(seed);
    std::vector<cd> x(n);
    for (auto& v : x) v = cd(g.normal(), g.normal());
    return x;
}

}  // namespace

TEST(Fft, MatchesNaiveDft) {
    for (std::size_t n : {1u, 2u, 7u, 12u, 30u, 97u}) {
        const auto x = random_complex(n, n);
        const auto F = epps::fft::forward(x);
        const auto B = epps::fft::backward(x);
        const auto Fo = oracle::dft(x, -1);
        const auto Bo = oracle::dft(x, +1);
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(std::abs(F[k] - Fo[k]), 0.0, 1e-11) << n;
            EXPECT_NEAR(std::abs(B[k] - Bo[k]), 0.0, 1e-11) << n;
        }
    }
}

TEST(Fft, RealInputUsesPlusSign) {
    std::vector<double> x{1.0, -2.0, 0.5, 3.0, 0.25};
    std::vector<cd> xc(x.begin(), x.end());
    const auto X = epps::fft::backward_real(x);
    const auto Xo = oracle::dft(xc, +1);
    ASSERT_EQ(X.size(), x.size());
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(std::abs(X[k] - Xo[k]), 0.0, 1e-13);
}

TEST(Fft, RoundTripAndParseval) {
    const std::size_t n = 20000;
    const auto x = random_complex(n, 9);
    const auto X = epps::fft::forward(x);
    const auto y = epps::fft::backward(X);
    double energy_t = 0.0, energy_f = 0.0, err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        err = std::max(err, std::abs(y[k] / static_cast<double>(n) - x[k]));
        energy_t += std::norm(x[k]);
        energy_f += std::norm(X[k]);
    }
    EXPECT_LT(err, 1e-12);
    EXPECT_NEAR(energy_f / static_cast<double>(n) / energy_t, 1.0, 1e-12);
}

TEST(Fft, GoodSizeIsSevenSmooth) {
    EXPECT_EQ(epps::fft::good_size(1), 1u);
    EXPECT_EQ(epps::fft::good_size(11), 12u);
    auto smooth = [](std::size_t m) {
        for (std::size_t p : {2u, 3u, 5u, 7u}) {
            while (m % p == 0) m /= p;
        }
        return m == 1;
    };
    for (std::size_t n : {13u, 97u, 1025u, 40001u}) {
        const std::size_t m = epps::fft::good_size(n);
        EXPECT_GE(m, n);
        EXPECT_TRUE(smooth(m));
        for (std::size_t k = n; k < m; ++k) EXPECT_FALSE(smooth(k)) << k;
    }
}
