#include "epps/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epps/errors.hpp"
#include "epps/numerics.hpp"

namespace epps {

namespace {

double hat(double y, double step) { return std::max(0.0, step - std::abs(y)); }

// Second difference of (xi/2) e^{-|x|/xi} + (x)_+, in units of xi: u = |y|/xi, w = step/xi.
double unit_exp_second_difference(double u, double w) {
    if (u >= w) {
        const double em = std::expm1(-w);
        return 0.5 * std::exp(-(u - w)) * em * em;
    }
    if (w < 1e-4) {
        const double w2 = w * w;
        const double u2 = u * u;
        return w2 / 2.0 + (u2 * u - 3.0 * w * u2 - w2 * w) / 6.0 + (w2 * w2 + 6.0 * u2 * w2) / 24.0;
    }
    return (w - u) + 0.5 * (std::exp(-w - u) + std::exp(u - w) - 2.0 * std::exp(-u));
}

}  // namespace

void CorrelationModel::validate() const {
    if (!std::isfinite(delta_weight) || !std::isfinite(exp_weight) || !std::isfinite(lag) ||
        !std::isfinite(width)) {
        throw std::invalid_argument("correlation model has non-finite parameters");
    }
    if (width < 0.0) throw std::invalid_argument("correlation model width must be >= 0");
}

void CorrelationModel::validate_auto() const {
    validate();
    if (lag != 0.0) throw std::invalid_argument("auto-kernel must have zero lag");
    // S(w) runs monotonically from a + b (w = 0) to a (w -> inf).
    const double at_zero = delta_weight + exp_weight;
    const double at_inf = width > 0.0 ? delta_weight : at_zero;
    if (at_zero < 0.0 || at_inf < 0.0) {
        throw std::invalid_argument("auto-kernel spectrum is negative somewhere");
    }
    if (std::max(at_zero, at_inf) <= 0.0) {
        throw std::invalid_argument("auto-kernel has zero spectrum");
    }
}

KernelValue kernel_eval(const CorrelationModel& model, double tau) {
    KernelValue out;
    if (tau == model.lag) out.delta_part = model.effective_delta();
    if (model.width > 0.0) {
        out.regular_part =
            model.exp_weight * std::exp(-std::abs(tau - model.lag) / model.width) / (2.0 * model.width);
    }
    return out;
}

std::complex<double> spectrum_eval(const CorrelationModel& model, double omega) {
    const double wx = omega * model.width;
    const double magnitude = model.delta_weight + model.exp_weight / (1.0 + wx * wx);
    return std::polar(1.0, omega * model.lag) * magnitude;
}

double kernel_second_difference(const CorrelationModel& model, double x, double step) {
    const double y = x - model.lag;
    double out = model.effective_delta() * hat(y, step);
    if (model.width > 0.0 && model.exp_weight != 0.0) {
        const double xi = model.width;
        out += model.exp_weight * xi * unit_exp_second_difference(std::abs(y) / xi, step / xi);
    }
    return out;
}

double sync_covariance(const CorrelationModel& model, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("sync_covariance: dt must be >= 0");
    return kernel_second_difference(model, 0.0, dt);
}

double sync_covariance_numeric(const std::function<double(double)>& regular_kernel, double dt,
                               std::span<const double> breakpoints) {
    if (!(dt >= 0.0)) throw std::invalid_argument("sync_covariance_numeric: dt must be >= 0");
    if (dt == 0.0) return 0.0;
    std::vector<double> knots(breakpoints.begin(), breakpoints.end());
    knots.push_back(0.0);
    return numerics::integrate([&](double s) { return (dt - std::abs(s)) * regular_kernel(s); },
                               -dt, dt, 1e-10, knots);
}

ModelPair::ModelPair(CorrelationModel cross, CorrelationModel auto_i, CorrelationModel auto_j)
    : cross_(cross), auto_i_(auto_i), auto_j_(auto_j) {
    cross_.validate();
    auto_i_.validate_auto();
    auto_j_.validate_auto();

    const double scale = time_scale();
    constexpr int kGrid = 64;
    const double lo = std::log(1e-3 * scale);
    const double hi = std::log(1e3 * scale);
    for (int k = 0; k < kGrid; ++k) {
        const double dt = std::exp(lo + (hi - lo) * k / (kGrid - 1));
        const double rho = sync_rho(*this, dt);
        if (std::abs(rho) > 1.0 + 1e-9) {
            throw std::invalid_argument("model pair gives |rho| = " + std::to_string(std::abs(rho)) +
                                        " > 1 at dt = " + std::to_string(dt));
        }
    }
}

double ModelPair::time_scale() const {
    const double s = std::max({cross_.width, auto_i_.width, auto_j_.width, std::abs(cross_.lag)});
    return s > 0.0 ? s : 1.0;
}

double sync_rho(const ModelPair& pair, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("sync_rho: dt must be > 0");
    const double vi = sync_covariance(pair.auto_i(), dt);
    const double vj = sync_covariance(pair.auto_j(), dt);
    if (!(vi > 0.0) || !(vj > 0.0)) {
        throw NumericalError("sync_rho: degenerate variance at dt = " + std::to_string(dt));
    }
    return sync_covariance(pair.cross(), dt) / std::sqrt(vi * vj);
}

double sync_rho_limit_long(const ModelPair& pair) {
    const double mi = pair.auto_i().total_mass();
    const double mj = pair.auto_j().total_mass();
    if (!(mi > 0.0) || !(mj > 0.0)) {
        throw NumericalError("sync_rho_limit_long: auto-kernel has zero integrated mass");
    }
    return pair.cross().total_mass() / std::sqrt(mi * mj);
}

}  // namespace epps
