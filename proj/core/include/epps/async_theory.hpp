#pragma once

// Predictions for series observed through independent Poisson sampling and the
// previous-tick prescription.
//
// Convention. Spectra are S(w) = int c(s) e^{i w s} ds with c(t - t') = <dX^i_t dX^j_t'>.
// If U_i ~ Exp(lambda_i) is the age of the last observation of asset i, the sampled
// cross-kernel is c~(s) = E c(s - (U_i - U_j)), so the sampled spectrum is multiplied by
//
//   K(w) = E[e^{i w U_i}] E[e^{-i w U_j}] = lambda_i lambda_j / ((lambda_i - i w)(lambda_j + i w)).
//
// In real space c~ = c * p with p(s) = k e^{-lambda_i s} (s > 0), k e^{lambda_j s} (s < 0),
// k = lambda_i lambda_j / (lambda_i + lambda_j). The faster-sampled series leads.
//
// An infinite rate (std::numeric_limits<double>::infinity()) means "observed continuously"
// and every function reduces to its synchronous counterpart.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>

#include "epps/kernels.hpp"

namespace epps {

inline constexpr double kSynchronous = std::numeric_limits<double>::infinity();

struct AsyncKernel {
    double lambda_i = kSynchronous;  ///< sampling rate of asset i [1/s]
    double lambda_j = kSynchronous;  ///< sampling rate of asset j [1/s]

    void validate() const;
    bool synchronous() const;
};

/// u = 1 + lambda xi, v = -1 + lambda xi for both rates.
struct ClosedFormCoefs {
    double u_i = 0.0;
    double v_i = 0.0;
    double u_j = 0.0;
    double v_j = 0.0;
};
ClosedFormCoefs closed_form_coefs(const AsyncKernel& k, double width);

/// Multiplicative spectral factor K(w) induced by the sampling.
std::complex<double> lorentz_kernel(const AsyncKernel& k, double omega);

/// Density of the sampling shift U_i - U_j (the real-space form of K). Requires at least one
/// finite rate.
double sampling_shift_density(const AsyncKernel& k, double s);

/// Sampled cross-kernel c~(tau) = (c * p)(tau), closed form. The delta part survives only
/// when both rates are infinite.
KernelValue async_cross_corr(const CorrelationModel& model, const AsyncKernel& k, double tau);

/// (1/bin) int (bin - |v|)_+ c~(tau + v) dv: what a correlogram of `bin`-second increments,
/// normalised per unit time, measures at lag tau.
double async_cross_corr_binned(const CorrelationModel& model, const AsyncKernel& k, double tau,
                               double bin);

/// Printed residue formula for the unit lag+exponential kernel e^{-|s - tau|/xi}/(2 xi)
/// (xi = 0 gives the lagged delta), tau >= 0, in the symbol order of its derivation, where the
/// rate attached to the i + i w pole is `lambda_1`. Finite rates only. Removable singularities
/// at lambda xi = 1 are bridged by local interpolation.
double residue_closed_form(double dt, double tau, double width, double lambda_1, double lambda_2);

/// Expected covariance of previous-tick returns over a window dt.
double async_covariance(const CorrelationModel& model, const AsyncKernel& k, double dt);

/// Generic-spectrum route: (2/pi) int_0^inf Re[S K] (1 - cos w dt) / w^2 dw, integrated panel by
/// panel up to w_max = 50 max(lambda, 1/time_scale, 1/dt).
double async_covariance_numeric(const std::function<std::complex<double>(double)>& spectrum,
                                const AsyncKernel& k, double dt, double time_scale);

/// Expected variance of previous-tick returns of one asset sampled at rate lambda.
double async_variance(const CorrelationModel& auto_model, double lambda, double dt);

/// Delta weight of the sampled auto-kernel.
double async_autocorr_delta_weight(const CorrelationModel& auto_model, double lambda);

/// Sampled auto-kernel; delta part reported at tau == 0 only.
KernelValue async_autocorr(const CorrelationModel& auto_model, double lambda, double tau);

/// Finite-length discrete analogue of K for per-step sampling probability 1 - e^{-Lambda}.
std::complex<double> discrete_kernel(double Lambda_i, double Lambda_j, std::size_t n, std::size_t T);

/// Pearson coefficient of sampled returns.
double async_rho(const ModelPair& pair, const AsyncKernel& k, double dt);

}  // namespace epps
