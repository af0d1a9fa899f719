#include "epps/numerics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "epps/errors.hpp"

namespace epps::numerics {

double phi1(double x) {
    if (std::abs(x) < 1e-5) {
        return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    }
    return -std::expm1(-x) / x;
}

double phi1_prime(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return -0.5 + x / 3.0 - x2 / 8.0 + x2 * x / 30.0 - x2 * x2 / 144.0;
    }
    return (std::exp(-x) * (1.0 + x) - 1.0) / (x * x);
}

double exp_difference_quotient(double a, double b, double y) {
    const double m = std::min(a, b);
    return std::exp(-m * y) * y * phi1(std::abs(b - a) * y);
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 std::span<const double> breakpoints) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> knots{a};
    for (double p : breakpoints) {
        if (p > a && p < b) knots.push_back(p);
    }
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());

    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = knots[k];
        const double hi = knots[k + 1];
        if (hi <= lo) continue;
        double error = 0.0;
        double l1 = 0.0;
        const double value = GK::integrate(f, lo, hi, 15, 1e-12, &error, &l1);
        if (!std::isfinite(value) || (error > abs_tol && error > 1e-9 * l1)) {
            throw NumericalError("quadrature did not converge on [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "], error estimate " +
                                 std::to_string(error));
        }
        total += value;
    }
    return sign * total;
}

double across_removable_singularity(const std::function<double(double)>& f, double x, double x0,
                                    double h) {
    if (std::abs(x - x0) >= h) return f(x);
    const std::array<double, 4> nodes{x0 - 2.0 * h, x0 - h, x0 + h, x0 + 2.0 * h};
    std::array<double, 4> values{};
    for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = f(nodes[k]);
    double result = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        double basis = 1.0;
        for (std::size_t m = 0; m < nodes.size(); ++m) {
            if (m != k) basis *= (x - nodes[m]) / (nodes[k] - nodes[m]);
        }
        result += basis * values[k];
    }
    return result;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace epps::numerics
