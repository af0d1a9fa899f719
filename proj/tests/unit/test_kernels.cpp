#include <gtest/gtest.h>

#include <cmath>

#include "epps/kernels.hpp"
#include "oracles.hpp"

using namespace epps;

namespace {

// int (step - |v|)_+ c_reg(x + v) dv by direct quadrature, plus the delta contribution.
double second_difference_oracle(const CorrelationModel& m, double x, double step) {
    double out = m.effective_delta() * std::max(0.0, step - std::abs(x - m.lag));
    if (m.width > 0.0) {
        auto f = [&](double v) {
            return (step - std::abs(v)) * m.exp_weight * std::exp(-std::abs(x + v - m.lag) / m.width) / (2.0 * m.width);
        };
        std::vector<double> knots{-step, step};
        const double kink = m.lag - x;
        if (std::abs(kink) < step) knots.push_back(kink);
        knots.push_back(0.0);
        std::sort(knots.begin(), knots.end());
        out += oracle::gk_split(f, knots);
    }
    return out;
}

}  // namespace

TEST(Kernels, EvalDeltaAndExponentialParts) {
    const CorrelationModel m{0.3, 2.0, 1.5, 0.7};
    const auto at_lag = kernel_eval(m, 2.0);
    EXPECT_DOUBLE_EQ(at_lag.delta_part, 0.3);
    EXPECT_DOUBLE_EQ(at_lag.regular_part, 0.7 / 3.0);
    const auto off = kernel_eval(m, 3.5);
    EXPECT_EQ(off.delta_part, 0.0);
    EXPECT_NEAR(off.regular_part, 0.7 * std::exp(-1.0) / 3.0, 1e-16);
}

TEST(Kernels, ZeroWidthFoldsIntoDelta) {
    const CorrelationModel m{0.2, 0.0, 0.0, 0.5};
    EXPECT_DOUBLE_EQ(m.effective_delta(), 0.7);
    EXPECT_DOUBLE_EQ(m.regular_weight(), 0.0);
    EXPECT_DOUBLE_EQ(kernel_eval(m, 0.0).delta_part, 0.7);
    EXPECT_DOUBLE_EQ(sync_covariance(m, 3.0), 2.1);
}

TEST(Kernels, SpectrumIsFourierTransformOfKernel) {
    const CorrelationModel m{0.4, 1.2, 0.8, 0.9};
    for (double w : {0.0, 0.3, 1.0, 4.0}) {
        // int c(s) e^{i w s} ds with the regular part by quadrature over +-40 widths.
        auto re = [&](double s) { return kernel_eval(m, s).regular_part * std::cos(w * s); };
        auto im = [&](double s) { return kernel_eval(m, s).regular_part * std::sin(w * s); };
        std::vector<double> knots;
        for (int k = -200; k <= 200; ++k) knots.push_back(m.lag + 0.2 * k * m.width);
        const std::complex<double> expected =
            m.delta_weight * std::polar(1.0, w * m.lag) + std::complex<double>(oracle::gk_split(re, knots), oracle::gk_split(im, knots));
        const auto got = spectrum_eval(m, w);
        EXPECT_NEAR(std::abs(got - expected), 0.0, 1e-12) << "w = " << w;
    }
}

TEST(Kernels, SecondDifferenceMatchesQuadrature) {
    for (const auto& m : {CorrelationModel{0.5, 0.0, 2.0, 0.5}, CorrelationModel{0.0, 1.5, 0.7, -0.4},
                          CorrelationModel{0.1, -3.0, 10.0, 1.0}, CorrelationModel{0.0, 0.0, 1e-3, 1.0}}) {
        for (double x : {0.0, 0.5, -1.0, 2.9}) {
            for (double step : {1e-5, 0.1, 1.0, 7.0}) {
                EXPECT_NEAR(kernel_second_difference(m, x, step), second_difference_oracle(m, x, step),
                            1e-12 * std::max(1.0, step))
                    << "x " << x << " step " << step << " width " << m.width;
            }
        }
    }
}

TEST(Kernels, SyncCovarianceClosedForm) {
    // a dt + b [dt - xi (1 - e^{-dt/xi})] for a zero-lag kernel.
    const double a = 0.3, b = 0.6, xi = 2.0;
    const CorrelationModel m{a, 0.0, xi, b};
    for (double dt : {0.01, 1.0, 5.0, 100.0}) {
        EXPECT_NEAR(sync_covariance(m, dt), a * dt + b * (dt - xi * (1.0 - std::exp(-dt / xi))), 1e-13 * dt);
    }
}

TEST(Kernels, SyncCovarianceNumericAgrees) {
    const CorrelationModel m{0.0, 0.0, 1.3, 0.8};
    auto reg = [&](double s) { return kernel_eval(m, s).regular_part; };
    for (double dt : {0.2, 2.0, 9.0}) {
        EXPECT_NEAR(sync_covariance_numeric(reg, dt), sync_covariance(m, dt), 1e-10);
    }
}

TEST(Kernels, ModelPairRejectsImpossibleCorrelation) {
    EXPECT_THROW(ModelPair(CorrelationModel::brownian(1.5), CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0)),
                 std::invalid_argument);
    EXPECT_NO_THROW(ModelPair(CorrelationModel::brownian(0.99), CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0)));
    EXPECT_THROW(CorrelationModel({0.0, 1.0, 1.0, 1.0}).validate_auto(), std::invalid_argument);
    EXPECT_THROW(CorrelationModel({-1.0, 0.0, 0.0, 0.0}).validate_auto(), std::invalid_argument);
}

TEST(Kernels, SyncRhoLimits) {
    // Lagged Brownian cross kernel: rho grows linearly once dt exceeds the lag.
    const ModelPair pair(CorrelationModel::brownian(0.5, 2.0), CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0));
    EXPECT_NEAR(sync_rho(pair, 1.0), 0.0, 1e-15);
    EXPECT_NEAR(sync_rho(pair, 4.0), 0.5 * 2.0 / 4.0, 1e-15);
    EXPECT_NEAR(sync_rho(pair, 1e6), sync_rho_limit_long(pair), 1e-5);
    EXPECT_DOUBLE_EQ(sync_rho_limit_long(pair), 0.5);
}
