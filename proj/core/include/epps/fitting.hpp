#pragma once

// Least-squares fits of correlograms to the four model families:
//
//   cross_raw    c e^{-|tau - tau0| / xi}
//   cross_async  (c e^{-|. - tau0| / xi} * p)(tau), p the sampling-shift density
//   auto_raw     a [tau = 0] - b e^{-|tau| / xi} / (2 xi)
//   auto_async   (a - b / (1 + lambda xi)) [tau = 0] - b lambda^2 (e^{-|tau|/xi} - e^{-lambda|tau|}) /
//                (2 xi (lambda + 1/xi) (lambda - 1/xi))
//
// Parameters are (c, tau0, xi) for cross families and (a, b, xi) for auto families; the
// solver works in log xi. Correlogram bins are point evaluations of the model; the tau = 0 bin
// of an auto-correlogram carries the delta mass.

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>

#include "epps/errors.hpp"
#include "epps/estimation.hpp"

namespace epps {

enum class FitFamily { cross_raw, cross_async, auto_raw, auto_async };

std::string_view family_name(FitFamily f);
FitFamily parse_family(std::string_view name);
bool is_auto_family(FitFamily f);

struct FitResult {
    FitFamily family = FitFamily::cross_raw;
    std::array<double, 3> params{};  ///< (c, tau0, xi) or (a, b, xi)
    std::array<double, 3> stderr{};
    double chi2 = 0.0;
    std::size_t n_points = 0;
    std::size_t iterations = 0;
    bool weighted = false;
    bool degenerate = false;  ///< amplitude t-stat < 2 or width at its search bound: shape unidentified
    double lambda_i = std::numeric_limits<double>::infinity();
    double lambda_j = std::numeric_limits<double>::infinity();
};

/// Thrown when the optimiser fails; carries the best iterate.
class FitError : public NumericalError {
public:
    FitError(const std::string& what, FitResult best) : NumericalError(what), best_(best) {}
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

struct FitOptions {
    std::size_t max_iterations = 200;
    double step_tolerance = 1e-10;
    double chi2_tolerance = 1e-12;  ///< relative chi2 decrease below which an accepted step ends the fit
    /// Absolute chi2 decrease, in units of the per-point variance, below which a step is
    /// statistically negligible and ends the fit.
    double chi2_abs_tolerance = 1e-8;
    std::size_t min_days_for_weights = 5;
    bool use_weights = true;
};

/// Model value and gradient with respect to the natural parameters at lag tau.
struct ModelPoint {
    double value = 0.0;
    std::array<double, 3> gradient{};
};
/// For auto_async the rate is lambda_i. Infinite rates reduce async families to raw ones.
ModelPoint eval_family(FitFamily family, const std::array<double, 3>& params, double tau,
                       double lambda_i = std::numeric_limits<double>::infinity(),
                       double lambda_j = std::numeric_limits<double>::infinity());

/// General entry point: fits `family` starting from `init` (natural parameters).
FitResult fit_family(const Correlogram& cg, FitFamily family, const std::array<double, 3>& init,
                     double lambda_i, double lambda_j, const FitOptions& options = {});

FitResult fit_cross_raw(const Correlogram& cg, const FitOptions& options = {});
FitResult fit_cross_async(const Correlogram& cg, double lambda_i, double lambda_j,
                          const FitOptions& options = {});
FitResult fit_auto_raw(const Correlogram& cg, const FitOptions& options = {});
FitResult fit_auto_async(const Correlogram& cg, double lambda, const FitOptions& options = {});

/// chi2_raw / chi2_async - 1. Throws NumericalError if chi2_async is zero.
double chi2_ratio(const FitResult& raw, const FitResult& async);

}  // namespace epps
