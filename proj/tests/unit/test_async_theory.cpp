#include <gtest/gtest.h>

#include <cmath>

#include "epps/async_theory.hpp"
#include "oracles.hpp"

using namespace epps;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

oracle::Kernel as_oracle(const CorrelationModel& m) { return {m.delta_weight, m.lag, m.width, m.exp_weight}; }

// Density of U_i - U_j written out for the test: U ~ Exp(lambda) independent.
double shift_density_oracle(double li, double lj, double s) {
    const double kappa = li * lj / (li + lj);
    return s >= 0.0 ? kappa * std::exp(-li * s) : kappa * std::exp(lj * s);
}

// (c * p)(tau) with both rates finite, by quadrature.
double sampled_kernel_oracle(const CorrelationModel& m, double li, double lj, double tau) {
    const double y = tau - m.lag;
    double out = m.effective_delta() * shift_density_oracle(li, lj, y);
    if (m.width > 0.0 && m.exp_weight != 0.0) {
        auto f = [&](double u) {
            return m.exp_weight * std::exp(-std::abs(u) / m.width) / (2.0 * m.width) * shift_density_oracle(li, lj, y - u);
        };
        const double reach = 60.0 * std::max({m.width, 1.0 / li, 1.0 / lj});
        std::vector<double> knots{y - reach, std::min(0.0, y), std::max(0.0, y), y + reach};
        knots.front() = std::min(knots.front(), -reach);
        knots.back() = std::max(knots.back(), reach);
        std::vector<double> fine;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            for (int m2 = 0; m2 < 12; ++m2) fine.push_back(knots[k] + (knots[k + 1] - knots[k]) * m2 / 12.0);
        }
        fine.push_back(knots.back());
        out += oracle::gk_split(f, fine);
    }
    return out;
}

// Variance of previous-tick returns from the age distributions: the return over [t, t + dt]
// is X(t + dt - A2) - X(t - A1) when a tick falls in the window (A2 < dt), zero otherwise.
double variance_oracle(double a, double b, double xi, double lambda, double dt) {
    auto sync = [&](double D) { return a * D + (xi > 0.0 ? b * (D - xi * (1.0 - std::exp(-D / xi))) : b * D); };
    auto inner = [&](double a2) {
        auto g = [&](double a1) { return lambda * std::exp(-lambda * a1) * sync(dt - a2 + a1); };
        return lambda * std::exp(-lambda * a2) * oracle::gk(g, 0.0, 80.0 / lambda);
    };
    return oracle::gk(inner, 0.0, dt);
}

}  // namespace

TEST(AsyncTheory, LorentzKernelMatchesAgeCharacteristicFunctions) {
    for (auto [li, lj] : {std::pair{1.0, 1.0}, {2.0, 0.3}, {0.05, 5.0}, {kInf, 0.7}}) {
        for (double w : {0.0, 0.1, 1.0, 3.0}) {
            const auto got = lorentz_kernel({li, lj}, w);
            EXPECT_NEAR(std::abs(got - oracle::sampling_factor(li, lj, w)), 0.0, 1e-10) << li << " " << lj << " " << w;
        }
    }
    EXPECT_EQ(lorentz_kernel({kInf, kInf}, 5.0), std::complex<double>(1.0, 0.0));
}

TEST(AsyncTheory, ShiftDensityIsNormalisedAndTransformsToKernel) {
    const AsyncKernel k{1.5, 0.4};
    auto p = [&](double s) { return sampling_shift_density(k, s); };
    EXPECT_NEAR(oracle::gk(p, -100.0, 0.0) + oracle::gk(p, 0.0, 30.0), 1.0, 1e-12);
    const double w = 0.8;
    auto re = [&](double s) { return p(s) * std::cos(w * s); };
    auto im = [&](double s) { return p(s) * std::sin(w * s); };
    std::vector<double> knots;
    for (int m = -200; m <= 60; ++m) knots.push_back(0.5 * m);
    const std::complex<double> ft(oracle::gk_split(re, knots), oracle::gk_split(im, knots));
    EXPECT_NEAR(std::abs(ft - lorentz_kernel(k, w)), 0.0, 1e-10);
}

TEST(AsyncTheory, CrossCorrMatchesConvolution) {
    const CorrelationModel m{0.3, 2.0, 1.5, 0.6};
    for (auto [li, lj] : {std::pair{1.0, 1.0}, {2.0, 0.25}, {0.5, 3.0}, {1.0 / 1.5, 2.0}}) {
        for (double tau : {-5.0, 0.0, 1.0, 2.0, 2.5, 9.0}) {
            const auto got = async_cross_corr(m, {li, lj}, tau);
            EXPECT_EQ(got.delta_part, 0.0);
            EXPECT_NEAR(got.regular_part, sampled_kernel_oracle(m, li, lj, tau), 1e-11) << li << " " << lj << " " << tau;
        }
    }
}

TEST(AsyncTheory, InfiniteRatesReduceToSynchronous) {
    const CorrelationModel m{0.3, 1.0, 2.0, 0.5};
    const auto sync = kernel_eval(m, 1.0);
    const auto got = async_cross_corr(m, {kInf, kInf}, 1.0);
    EXPECT_EQ(got.delta_part, sync.delta_part);
    EXPECT_EQ(got.regular_part, sync.regular_part);
    for (double dt : {0.5, 3.0}) {
        EXPECT_DOUBLE_EQ(async_covariance(m, {kInf, kInf}, dt), sync_covariance(m, dt));
        EXPECT_DOUBLE_EQ(async_variance({1.0, 0.0, 2.0, -0.3}, kInf, dt), sync_covariance({1.0, 0.0, 2.0, -0.3}, dt));
    }
    // Very large finite rates approach the synchronous answer continuously.
    EXPECT_NEAR(async_covariance(m, {1e7, 1e7}, 3.0), sync_covariance(m, 3.0), 1e-6);
}

TEST(AsyncTheory, CovarianceMatchesSpectralQuadrature) {
    const std::vector<CorrelationModel> models{CorrelationModel::brownian(0.5), CorrelationModel::brownian(0.5, 1.5),
                                               {0.2, 0.8, 0.7, 0.4}, {0.0, -1.2, 2.0, 0.6}};
    for (const auto& m : models) {
        for (auto [li, lj] : {std::pair{1.0, 1.0}, {2.0, 0.3}, {0.4, 1.1}}) {
            for (double dt : {0.3, 1.2, 4.0}) {
                const double expected = oracle::spectral_covariance(as_oracle(m), li, lj, dt, 1e-10);
                EXPECT_NEAR(async_covariance(m, {li, lj}, dt), expected, 1e-8)
                    << "lag " << m.lag << " li " << li << " lj " << lj << " dt " << dt;
            }
        }
    }
}

TEST(AsyncTheory, OneInfiniteRateMatchesSpectralQuadrature) {
    const CorrelationModel m{0.3, 0.7, 1.0, 0.5};
    for (auto [li, lj] : {std::pair{kInf, 0.5}, {2.0, kInf}}) {
        for (double dt : {0.5, 3.0}) {
            EXPECT_NEAR(async_covariance(m, {li, lj}, dt), oracle::spectral_covariance(as_oracle(m), li, lj, dt, 1e-7),
                        3e-7);
        }
    }
}

TEST(AsyncTheory, NumericRouteAgreesWithClosedForm) {
    const CorrelationModel m{0.2, 1.0, 1.5, 0.5};
    const AsyncKernel k{1.2, 0.5};
    for (double dt : {0.5, 2.0, 10.0}) {
        const double numeric =
            async_covariance_numeric([&](double w) { return spectrum_eval(m, w); }, k, dt, 1.5);
        EXPECT_NEAR(numeric, async_covariance(m, k, dt), 1e-5 * std::max(1.0, dt));
    }
}

TEST(AsyncTheory, ContinuousAcrossDtEqualsLag) {
    const CorrelationModel m{0.3, 2.0, 0.8, 0.5};
    const AsyncKernel k{1.3, 0.6};
    const double below = async_covariance(m, k, 2.0 - 1e-9);
    const double at = async_covariance(m, k, 2.0);
    const double above = async_covariance(m, k, 2.0 + 1e-9);
    EXPECT_NEAR(below, at, 1e-8);
    EXPECT_NEAR(above, at, 1e-8);
}

TEST(AsyncTheory, ContinuousAcrossRemovableSingularity) {
    // lambda xi = 1 for xi = 0.5 at lambda = 2; points on and around it against the oracle.
    const CorrelationModel m{0.0, 0.7, 0.5, 1.0};
    for (double dt : {0.3, 2.0}) {
        for (double rel : {0.0, 1e-9, -1e-7, 4e-4, -1e-3, 3e-3}) {
            const double l = 2.0 * (1.0 + rel);
            const double at = async_covariance(m, {l, 0.8}, dt);
            EXPECT_NEAR(at, oracle::spectral_covariance(as_oracle(m), l, 0.8, dt, 1e-10), 1e-8) << rel;
            EXPECT_NEAR(async_covariance(m, {0.8, l}, dt), oracle::spectral_covariance(as_oracle(m), 0.8, l, dt, 1e-10),
                        1e-8)
                << rel;
        }
    }
}

TEST(AsyncTheory, DeltaCovarianceAlwaysSuppressed) {
    const auto m = CorrelationModel::brownian(0.5);
    for (double l : {0.05, 0.5, 5.0}) {
        for (double dt : {0.01, 0.3, 3.0, 30.0, 300.0}) {
            EXPECT_LE(async_covariance(m, {l, 2.0 * l}, dt), sync_covariance(m, dt) + 1e-14);
        }
    }
}

TEST(AsyncTheory, EqualRatesBrownianEppsCurve) {
    // rho~ = c (1 + (e^{-lambda dt} - 1) / (lambda dt)) for equal rates and a delta kernel.
    const double c = 0.5, lambda = 1.0;
    const ModelPair pair(CorrelationModel::brownian(c), CorrelationModel::brownian(1.0), CorrelationModel::brownian(1.0));
    for (double dt : {0.1, 0.5, 1.0, 5.0, 50.0}) {
        const double x = lambda * dt;
        EXPECT_NEAR(async_rho(pair, {lambda, lambda}, dt), c * (1.0 + std::expm1(-x) / x), 1e-13);
    }
}

TEST(AsyncTheory, BrownianVarianceIsUnchangedBySampling) {
    for (double lambda : {0.1, 1.0, 10.0}) {
        for (double dt : {0.5, 7.0}) {
            EXPECT_NEAR(async_variance(CorrelationModel::brownian(1.3), lambda, dt), 1.3 * dt, 1e-14 * dt);
        }
    }
}

TEST(AsyncTheory, VarianceMatchesAgeIntegral) {
    for (auto [a, b, xi] : {std::tuple{1.0, -0.4, 0.8}, {0.5, 0.5, 3.0}, {1.0, 0.3, 1.0}}) {
        const CorrelationModel m{a, 0.0, xi, b};
        for (double lambda : {0.3, 1.0, 1.25}) {
            for (double dt : {0.2, 1.0, 6.0}) {
                EXPECT_NEAR(async_variance(m, lambda, dt), variance_oracle(a, b, xi, lambda, dt), 1e-11)
                    << a << " " << b << " " << xi << " " << lambda << " " << dt;
            }
        }
    }
}

TEST(AsyncTheory, AutocorrIntegratesToVariance) {
    // Var(dt) = w0 dt + 2 int_0^dt (dt - s) r(s) ds with w0 the delta weight, r the regular part.
    const CorrelationModel m{1.0, 0.0, 0.6, -0.5};
    for (double lambda : {0.5, 1.0 / 0.6, 3.0}) {
        for (double dt : {0.4, 2.5}) {
            const double w0 = async_autocorr(m, lambda, 0.0).delta_part;
            auto f = [&](double s) { return (dt - s) * async_autocorr(m, lambda, s).regular_part; };
            EXPECT_NEAR(w0 * dt + 2.0 * oracle::gk(f, 0.0, dt), variance_oracle(1.0, -0.5, 0.6, lambda, dt), 1e-11);
        }
    }
    EXPECT_EQ(async_autocorr(m, 1.0, 0.5).delta_part, 0.0);
    EXPECT_DOUBLE_EQ(async_autocorr_delta_weight(m, 1.0), 1.0 - 0.5 / 1.6);
}

TEST(AsyncTheory, BinnedCorrelationIsWindowAverage) {
    const CorrelationModel m{0.4, 1.0, 0.5, 0.3};
    const AsyncKernel k{1.0, 0.2};
    for (double tau : {-2.0, 1.0}) {
        auto f = [&](double v) { return (1.0 - std::abs(v)) * sampled_kernel_oracle(m, 1.0, 0.2, tau + v); };
        const double expected = oracle::gk_split(f, {-1.0, -0.5, 0.0, 0.5, 1.0});
        EXPECT_NEAR(async_cross_corr_binned(m, k, tau, 1.0), expected, 1e-9) << tau;
    }
    // Synchronous delta kernel: the hat function.
    EXPECT_DOUBLE_EQ(async_cross_corr_binned(CorrelationModel::brownian(1.0, 0.5), {kInf, kInf}, 0.0, 1.0), 0.5);
}

TEST(AsyncTheory, AsymmetrySignFollowsKernelPhase) {
    // For a symmetric cross kernel c~(tau) - c~(-tau) = (2/pi) int_0^inf S Im K sin(w tau) dw, so
    // with Im K of one sign on w > 0 the asymmetry takes that sign. lambda_i > lambda_j gives
    // Im K < 0: the sampled kernel leans to negative lags, i.e. the faster series leads.
    const CorrelationModel m{0.0, 0.0, 1.0, 1.0};
    for (auto [li, lj] : {std::pair{2.0, 0.2}, {0.2, 2.0}}) {
        const AsyncKernel k{li, lj};
        const double phase_sign = std::signbit(lorentz_kernel(k, 0.5).imag()) ? -1.0 : 1.0;
        for (double w : {0.01, 1.0, 100.0}) EXPECT_EQ(std::signbit(lorentz_kernel(k, w).imag()), phase_sign < 0.0);
        for (double tau : {0.5, 2.0, 6.0}) {
            const double asym = async_cross_corr(m, k, tau).regular_part - async_cross_corr(m, k, -tau).regular_part;
            EXPECT_GT(asym * phase_sign, 0.0) << li << " " << tau;
        }
    }
}

TEST(AsyncTheory, DiscreteKernelMatchesGeometricAgeSeries) {
    const std::size_t T = 64;
    for (auto [Li, Lj] : {std::pair{1.0, 1.0}, {0.05, 2.0}, {kInf, 0.3}}) {
        for (std::size_t n : {0u, 1u, 5u, 31u, 63u}) {
            const double w = 2.0 * oracle::pi * n / T;
            auto series = [&](double L, double sign) {
                if (std::isinf(L)) return std::complex<double>(1.0);
                const double p = 1.0 - std::exp(-L), q = std::exp(-L);
                std::complex<double> acc = 0.0;
                double qk = 1.0;
                for (int k = 0; k < 4000 && qk > 1e-18; ++k, qk *= q) acc += p * qk * std::polar(1.0, sign * w * k);
                return acc;
            };
            const auto expected = series(Li, 1.0) * series(Lj, -1.0);
            EXPECT_NEAR(std::abs(discrete_kernel(Li, Lj, n, T) - expected), 0.0, 1e-12) << Li << " " << Lj << " " << n;
        }
    }
    EXPECT_EQ(discrete_kernel(0.3, 0.7, 0, 10), std::complex<double>(1.0, 0.0));
}

TEST(AsyncTheory, RejectsInvalidRates) {
    EXPECT_THROW(async_covariance(CorrelationModel::brownian(1.0), {0.0, 1.0}, 1.0), std::invalid_argument);
    EXPECT_THROW(async_variance(CorrelationModel::brownian(1.0), -1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(lorentz_kernel({std::nan(""), 1.0}, 1.0), std::invalid_argument);
}
