#pragma once

// Synchronous correlation models.
//
// A model is the lagged kernel
//
//   c(s) = a * delta(s - L) + b * exp(-|s - L| / xi) / (2 xi)
//
// with s = t - t' and c(t - t') dt dt' = <dX^i_t dX^j_t'>. Its spectrum is
//
//   S(w) = int c(s) e^{i w s} ds = (a + b / (1 + w^2 xi^2)) e^{i w L}.
//
// A zero width collapses the exponential into the delta.

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace epps {

struct CorrelationModel {
    double delta_weight = 0.0;  ///< a: mass of the delta component
    double lag = 0.0;           ///< L [s]: center of both components
    double width = 0.0;         ///< xi [s]: exponential decay constant, 0 = pure delta
    double exp_weight = 0.0;    ///< b: mass of the exponential component (sign free)

    static CorrelationModel brownian(double weight, double lag = 0.0) {
        return {weight, lag, 0.0, 0.0};
    }
    static CorrelationModel exponential(double weight, double width, double lag = 0.0) {
        return {0.0, lag, width, weight};
    }

    /// Total delta mass once a zero-width exponential is folded in.
    double effective_delta() const { return width > 0.0 ? delta_weight : delta_weight + exp_weight; }
    /// Exponential mass that is genuinely regular (0 when width == 0).
    double regular_weight() const { return width > 0.0 ? exp_weight : 0.0; }
    /// Integral of the kernel over the real line.
    double total_mass() const { return delta_weight + exp_weight; }

    void validate() const;
    /// Throws unless usable as an auto-kernel (lag 0, nonnegative spectrum).
    void validate_auto() const;
};

struct KernelValue {
    double delta_part = 0.0;
    double regular_part = 0.0;
};

/// Delta coefficient (nonzero only at tau == lag) and regular density at tau.
KernelValue kernel_eval(const CorrelationModel& model, double tau);

std::complex<double> spectrum_eval(const CorrelationModel& model, double omega);

/// int (step - |v|)_+ c(x + v) dv, i.e. H(x + step) + H(x - step) - 2 H(x) with H the
/// second antiderivative of the kernel. With x = 0 this is the covariance over a window of
/// length `step`; with step = h and x = k h it is the covariance of grid increments at lag k.
double kernel_second_difference(const CorrelationModel& model, double x, double step);

/// C_dt = int_0^dt int_0^dt c(t - t') dt dt'.
double sync_covariance(const CorrelationModel& model, double dt);

/// Same integral for an arbitrary regular kernel, by adaptive Gauss-Kronrod quadrature.
double sync_covariance_numeric(const std::function<double(double)>& regular_kernel, double dt,
                               std::span<const double> breakpoints = {});

class ModelPair {
public:
    /// Validates the auto kernels and checks |rho| <= 1 on a log-spaced grid of 64 dt values.
    ModelPair(CorrelationModel cross, CorrelationModel auto_i, CorrelationModel auto_j);

    const CorrelationModel& cross() const { return cross_; }
    const CorrelationModel& auto_i() const { return auto_i_; }
    const CorrelationModel& auto_j() const { return auto_j_; }

    /// Longest time scale present in the pair (max of widths and |lag|, at least 1 s).
    double time_scale() const;

private:
    CorrelationModel cross_;
    CorrelationModel auto_i_;
    CorrelationModel auto_j_;
};

/// Pearson coefficient C^ij / sqrt(C^ii C^jj) at window dt.
double sync_rho(const ModelPair& pair, double dt);

/// rho_dt -> C^ij / sqrt(C^ii C^jj) with C the integrated kernels, when all are finite.
double sync_rho_limit_long(const ModelPair& pair);

}  // namespace epps
