#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "epps/rng.hpp"

using epps::Philox;

// Known-answer vectors of the Random123 reference implementation of Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
    const auto out = Philox::encrypt({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
    const auto out = Philox::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto out = Philox::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Philox, StreamsAreDeterministicAndDistinct) {
    Philox a(42, 1, 7), b(42, 1, 7), c(42, 1, 8), d(43, 1, 7);
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 100; ++k) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        seen.insert(x);
        seen.insert(c.next_u64());
        seen.insert(d.next_u64());
    }
    EXPECT_EQ(seen.size(), 300u);
}

TEST(Philox, UniformMoments) {
    Philox g(1);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = g.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    // Mean 1/2 (sd 1/sqrt(12 n)), second moment 1/3.
    EXPECT_NEAR(s / n, 0.5, 5.0 / std::sqrt(12.0 * n));
    EXPECT_NEAR(s2 / n, 1.0 / 3.0, 5.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST(Philox, NormalMoments) {
    Philox g(2, 3, 4);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = g.normal();
        s += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Philox, ExponentialMean) {
    Philox g(5);
    const int n = 200000;
    const double rate = 2.5;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = g.exponential(rate);
        ASSERT_GE(e, 0.0);
        s += e;
    }
    EXPECT_NEAR(s / n, 1.0 / rate, 5.0 / rate / std::sqrt(n));
}

TEST(Philox, StreamIdsDoNotCollideAcrossPurposes) {
    using epps::StreamPurpose;
    EXPECT_NE(epps::stream_id(StreamPurpose::path_noise, 0), epps::stream_id(StreamPurpose::ticks, 0));
    EXPECT_NE(epps::stream_id(StreamPurpose::ticks, 5), epps::stream_id(StreamPurpose::fit_noise, 5));
}
