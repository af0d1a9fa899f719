#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace epps::numerics {

/// (1 - e^{-x}) / x, continuous at x = 0.
double phi1(double x);
/// d/dx phi1(x).
double phi1_prime(double x);

/// (e^{-a y} - e^{-b y}) / (b - a) for y >= 0, finite as b -> a (limit y e^{-a y}).
double exp_difference_quotient(double a, double b, double y);

/// Adaptive 31-point Gauss-Kronrod on [a, b], split at the given interior breakpoints.
/// Throws NumericalError if the error estimate exceeds `abs_tol` on any piece.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10,
                 std::span<const double> breakpoints = {});

/// Evaluates f(x) but replaces points within `h` of a removable singularity x0 by cubic
/// interpolation through f(x0 +- h), f(x0 +- 2h).
double across_removable_singularity(const std::function<double(double)>& f, double x, double x0,
                                    double h);

/// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

}  // namespace epps::numerics
