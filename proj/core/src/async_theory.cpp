#include "epps/async_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "epps/errors.hpp"
#include "epps/numerics.hpp"

namespace epps {

namespace {

using cd = std::complex<double>;
using numerics::exp_difference_quotient;

bool is_inf(double x) { return std::isinf(x); }

void check_rate(double lambda, const char* what) {
    if (std::isnan(lambda) || !(lambda > 0.0)) {
        throw std::invalid_argument(std::string(what) + ": sampling rate must be > 0");
    }
}

// int_0^inf e^{-mu s} g(y - s) ds for g(u) = e^{-alpha |u|} / 2 (the unit exponential kernel
// times 1/alpha = xi, so callers multiply by alpha).
double half_line_exp(double mu, double alpha, double y) {
    if (y >= 0.0) {
        return 0.5 * (exp_difference_quotient(mu, alpha, y) + std::exp(-mu * y) / (mu + alpha));
    }
    return 0.5 * std::exp(alpha * y) / (mu + alpha);
}

// e^{-lambda_i s} for s > 0 and e^{lambda_j s} for s < 0, weighted by kappa; an infinite rate
// removes its side.
double shift_density(double li, double lj, double s) {
    if (is_inf(li) && is_inf(lj)) {
        throw std::invalid_argument("sampling_shift_density: both rates infinite (pure delta)");
    }
    if (is_inf(li)) return s < 0.0 ? lj * std::exp(lj * s) : (s == 0.0 ? 0.5 * lj : 0.0);
    if (is_inf(lj)) return s > 0.0 ? li * std::exp(-li * s) : (s == 0.0 ? 0.5 * li : 0.0);
    const double kappa = li * lj / (li + lj);
    return s >= 0.0 ? kappa * std::exp(-li * s) : kappa * std::exp(lj * s);
}

// Regular part of the convolution of the unit exponential kernel (centered at 0) with p.
double shifted_exp(double li, double lj, double width, double y) {
    const double alpha = 1.0 / width;
    if (is_inf(li)) return lj * alpha * half_line_exp(lj, alpha, -y);
    if (is_inf(lj)) return li * alpha * half_line_exp(li, alpha, y);
    const double kappa = li * lj / (li + lj);
    return kappa * alpha * (half_line_exp(li, alpha, y) + half_line_exp(lj, alpha, -y));
}

// e^{-tau/xi} (cosh(dt/xi) - 1) for dt < tau, without overflow.
double damped_cosh_minus_one(double dt, double tau, double rate) {
    return 0.5 * (std::exp(rate * (dt - tau)) + std::exp(-rate * (dt + tau))) - std::exp(-rate * tau);
}

double residue_raw(double D, double tau, double xi, double l1, double l2) {
    const double u1 = 1.0 + l1 * xi;
    const double v1 = -1.0 + l1 * xi;
    const double u2 = 1.0 + l2 * xi;
    const double v2 = -1.0 + l2 * xi;
    const double xi3 = l1 * l2 * xi * xi * xi;
    const double l12 = l1 + l2;
    if (D > tau) {
        double out = D - tau + 1.0 / l1 - 1.0 / l2;
        if (xi > 0.0) {
            out += xi3 * (std::exp(-(D - tau) / xi) / (2.0 * u1 * v2) - std::exp(-tau / xi) / (v1 * u2) +
                          std::exp(-(D + tau) / xi) / (2.0 * v1 * u2));
        }
        out += l2 * std::exp(-l1 * tau) / (l1 * l12 * u1 * v1) * (2.0 - std::exp(-l1 * D));
        out -= l1 * std::exp(-l2 * (D - tau)) / (l2 * l12 * u2 * v2);
        return out;
    }
    double out = 0.0;
    if (xi > 0.0) out += xi3 / (v1 * u2) * damped_cosh_minus_one(D, tau, 1.0 / xi);
    out -= 2.0 * l2 / (l1 * l12 * u1 * v1) * damped_cosh_minus_one(D, tau, l1);
    return out;
}

}  // namespace

void AsyncKernel::validate() const {
    check_rate(lambda_i, "AsyncKernel lambda_i");
    check_rate(lambda_j, "AsyncKernel lambda_j");
}

bool AsyncKernel::synchronous() const { return is_inf(lambda_i) && is_inf(lambda_j); }

ClosedFormCoefs closed_form_coefs(const AsyncKernel& k, double width) {
    k.validate();
    if (is_inf(k.lambda_i) || is_inf(k.lambda_j)) {
        throw std::invalid_argument("closed_form_coefs: rates must be finite");
    }
    return {1.0 + k.lambda_i * width, -1.0 + k.lambda_i * width, 1.0 + k.lambda_j * width,
            -1.0 + k.lambda_j * width};
}

cd lorentz_kernel(const AsyncKernel& k, double omega) {
    k.validate();
    const cd fi = is_inf(k.lambda_i) ? cd(1.0) : k.lambda_i / cd(k.lambda_i, -omega);
    const cd fj = is_inf(k.lambda_j) ? cd(1.0) : k.lambda_j / cd(k.lambda_j, omega);
    return fi * fj;
}

double sampling_shift_density(const AsyncKernel& k, double s) {
    k.validate();
    return shift_density(k.lambda_i, k.lambda_j, s);
}

KernelValue async_cross_corr(const CorrelationModel& model, const AsyncKernel& k, double tau) {
    model.validate();
    k.validate();
    if (k.synchronous()) return kernel_eval(model, tau);
    const double y = tau - model.lag;
    KernelValue out;
    out.regular_part = model.effective_delta() * shift_density(k.lambda_i, k.lambda_j, y);
    if (model.regular_weight() != 0.0) {
        out.regular_part += model.regular_weight() * shifted_exp(k.lambda_i, k.lambda_j, model.width, y);
    }
    return out;
}

double async_cross_corr_binned(const CorrelationModel& model, const AsyncKernel& k, double tau,
                               double bin) {
    if (!(bin > 0.0)) throw std::invalid_argument("async_cross_corr_binned: bin must be > 0");
    model.validate();
    k.validate();
    if (k.synchronous()) return kernel_second_difference(model, tau, bin) / bin;
    const std::vector<double> knots{tau, model.lag};
    const double integral = numerics::integrate(
        [&](double x) { return (bin - std::abs(x - tau)) * async_cross_corr(model, k, x).regular_part; },
        tau - bin, tau + bin, 1e-12, knots);
    return integral / bin;
}

double residue_closed_form(double dt, double tau, double width, double lambda_1, double lambda_2) {
    if (!(dt >= 0.0) || !(tau >= 0.0) || !(width >= 0.0)) {
        throw std::invalid_argument("residue_closed_form: need dt, tau, width >= 0");
    }
    check_rate(lambda_1, "residue_closed_form lambda_1");
    check_rate(lambda_2, "residue_closed_form lambda_2");
    if (is_inf(lambda_1) || is_inf(lambda_2)) {
        throw std::invalid_argument("residue_closed_form: rates must be finite");
    }
    if (width == 0.0) return residue_raw(dt, tau, 0.0, lambda_1, lambda_2);
    // v = lambda xi - 1 vanishes at lambda = 1/xi; interpolate over |v| < 1e-3.
    const double x0 = 1.0 / width;
    const double h = 1e-3 / width;
    auto in_l2 = [&](double l1) {
        return numerics::across_removable_singularity(
            [&](double l2) { return residue_raw(dt, tau, width, l1, l2); }, lambda_2, x0, h);
    };
    return numerics::across_removable_singularity(in_l2, lambda_1, x0, h);
}

double async_covariance(const CorrelationModel& model, const AsyncKernel& k, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("async_covariance: dt must be >= 0");
    model.validate();
    k.validate();
    if (k.synchronous()) return sync_covariance(model, dt);
    if (dt == 0.0) return 0.0;

    if (is_inf(k.lambda_i) || is_inf(k.lambda_j)) {
        // One-sided shift: integrate the closed-form sampled kernel against the window.
        const std::vector<double> knots{0.0, model.lag};
        return numerics::integrate(
            [&](double s) { return (dt - std::abs(s)) * async_cross_corr(model, k, s).regular_part; },
            -dt, dt, 1e-12, knots);
    }

    // The residue formula attaches its first rate to the pole on the positive-lag side of the
    // sampled kernel, which under K(w) above is asset j. Negative lags use C^ij = C^ji.
    const double tau = std::abs(model.lag);
    const double l1 = model.lag >= 0.0 ? k.lambda_j : k.lambda_i;
    const double l2 = model.lag >= 0.0 ? k.lambda_i : k.lambda_j;
    double out = 0.0;
    if (model.effective_delta() != 0.0) {
        out += model.effective_delta() * residue_closed_form(dt, tau, 0.0, l1, l2);
    }
    if (model.regular_weight() != 0.0) {
        out += model.regular_weight() * residue_closed_form(dt, tau, model.width, l1, l2);
    }
    return out;
}

double async_covariance_numeric(const std::function<cd(double)>& spectrum, const AsyncKernel& k,
                                double dt, double time_scale) {
    if (!(dt > 0.0)) throw std::invalid_argument("async_covariance_numeric: dt must be > 0");
    if (!(time_scale > 0.0)) throw std::invalid_argument("async_covariance_numeric: time_scale must be > 0");
    k.validate();
    double rate = std::max(1.0 / time_scale, 1.0 / dt);
    if (!is_inf(k.lambda_i)) rate = std::max(rate, k.lambda_i);
    if (!is_inf(k.lambda_j)) rate = std::max(rate, k.lambda_j);
    const double w_max = 50.0 * rate;
    const double panel = std::numbers::pi / (dt + time_scale);
    const auto n_panels = static_cast<std::size_t>(std::ceil(w_max / panel));

    auto integrand = [&](double w) {
        if (w == 0.0) return spectrum(0.0).real() * dt * dt / 2.0;
        const double s = std::sin(0.5 * w * dt);
        const double g = 2.0 * s * s / (w * w);
        return (spectrum(w) * lorentz_kernel(k, w)).real() * g;
    };
    std::vector<double> pieces(n_panels);
    for (std::size_t p = 0; p < n_panels; ++p) {
        pieces[p] = numerics::integrate(integrand, p * panel, (p + 1) * panel, 1e-13);
    }
    return 2.0 / std::numbers::pi * numerics::pairwise_sum(pieces);
}

double async_variance(const CorrelationModel& auto_model, double lambda, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("async_variance: dt must be >= 0");
    auto_model.validate_auto();
    check_rate(lambda, "async_variance");
    if (is_inf(lambda)) return sync_covariance(auto_model, dt);
    double out = auto_model.effective_delta() * dt;
    if (auto_model.regular_weight() != 0.0) {
        const double xi = auto_model.width;
        const double alpha = 1.0 / xi;
        const double body = dt + xi * std::expm1(-dt / xi) +
                            exp_difference_quotient(alpha, lambda, dt) / (xi * (lambda + alpha));
        out += auto_model.regular_weight() * body;
    }
    return out;
}

double async_autocorr_delta_weight(const CorrelationModel& auto_model, double lambda) {
    auto_model.validate_auto();
    check_rate(lambda, "async_autocorr");
    if (is_inf(lambda)) return auto_model.effective_delta();
    return auto_model.effective_delta() + auto_model.regular_weight() / (1.0 + lambda * auto_model.width);
}

KernelValue async_autocorr(const CorrelationModel& auto_model, double lambda, double tau) {
    auto_model.validate_auto();
    check_rate(lambda, "async_autocorr");
    if (is_inf(lambda)) return kernel_eval(auto_model, tau);
    KernelValue out;
    if (tau == 0.0) out.delta_part = async_autocorr_delta_weight(auto_model, lambda);
    if (auto_model.regular_weight() != 0.0) {
        const double xi = auto_model.width;
        const double alpha = 1.0 / xi;
        out.regular_part = auto_model.regular_weight() * lambda * lambda *
                           exp_difference_quotient(alpha, lambda, std::abs(tau)) /
                           (2.0 * xi * (lambda + alpha));
    }
    return out;
}

cd discrete_kernel(double Lambda_i, double Lambda_j, std::size_t n, std::size_t T) {
    if (T < 2) throw std::invalid_argument("discrete_kernel: T must be >= 2");
    if (n >= T) throw std::invalid_argument("discrete_kernel: n must be < T");
    check_rate(Lambda_i, "discrete_kernel Lambda_i");
    check_rate(Lambda_j, "discrete_kernel Lambda_j");
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(T);
    // (1 - e^{-L}) / (1 - e^{-L + i s w}), with 1 - e^{-L + i x} = -expm1(-L) e^{ix} - expm1(ix)
    // and expm1(ix) = -2 sin^2(x/2) + i sin x, so no cancellation near w = 0.
    auto factor = [omega](double L, double sign) -> cd {
        if (is_inf(L)) return 1.0;
        const double x = sign * omega;
        const double p = -std::expm1(-L);
        const double sh = std::sin(x / 2.0);
        const cd expm1_ix(-2.0 * sh * sh, std::sin(x));
        const cd denom = p * std::polar(1.0, x) - expm1_ix;
        return p / denom;
    };
    return factor(Lambda_i, 1.0) * factor(Lambda_j, -1.0);
}

double async_rho(const ModelPair& pair, const AsyncKernel& k, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("async_rho: dt must be > 0");
    k.validate();
    const double vi = async_variance(pair.auto_i(), k.lambda_i, dt);
    const double vj = async_variance(pair.auto_j(), k.lambda_j, dt);
    if (!(vi > 0.0) || !(vj > 0.0)) {
        throw NumericalError("async_rho: degenerate variance at dt = " + std::to_string(dt));
    }
    return async_covariance(pair.cross(), k, dt) / std::sqrt(vi * vj);
}

}  // namespace epps
