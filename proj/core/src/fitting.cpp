#include "epps/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "epps/numerics.hpp"

namespace epps {

namespace {

using Params = std::array<double, 3>;
using numerics::exp_difference_quotient;
using numerics::phi1;
using numerics::phi1_prime;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// D(y) = int_0^y e^{-mu s} e^{-alpha (y - s)} ds and its alpha derivative, y >= 0.
double d_alpha_of_D(double mu, double alpha, double y) {
    const double y2 = y * y;
    if (alpha >= mu) return std::exp(-mu * y) * y2 * phi1_prime((alpha - mu) * y);
    const double x = (mu - alpha) * y;
    return -std::exp(-alpha * y) * y2 * (phi1(x) + phi1_prime(x));
}

// J(mu, y) = int_0^inf e^{-mu s} e^{-alpha |y - s|} ds with y- and alpha-derivatives.
struct HalfLine {
    double value, d_y, d_alpha;
};

HalfLine half_line(double mu, double alpha, double y) {
    const double inv = 1.0 / (mu + alpha);
    if (y < 0.0) {
        const double j = std::exp(alpha * y) * inv;
        return {j, alpha * j, y * j - j * inv};
    }
    const double D = exp_difference_quotient(mu, alpha, y);
    const double em = std::exp(-mu * y);
    return {D + em * inv, alpha * em * inv - alpha * D, d_alpha_of_D(mu, alpha, y) - em * inv * inv};
}

ModelPoint cross_raw_point(const Params& p, double tau) {
    const auto [c, tau0, xi] = p;
    const double alpha = 1.0 / xi;
    const double y = tau - tau0;
    const double e = std::exp(-alpha * std::abs(y));
    const double sgn = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
    return {c * e, {e, c * e * alpha * sgn, c * e * std::abs(y) * alpha * alpha}};
}

ModelPoint cross_async_point(const Params& p, double tau, double li, double lj) {
    if (std::isinf(li) && std::isinf(lj)) return cross_raw_point(p, tau);
    const auto [c, tau0, xi] = p;
    const double alpha = 1.0 / xi;
    const double y = tau - tau0;
    double g = 0.0, g_y = 0.0, g_alpha = 0.0;
    auto add = [&](double weight, double mu, double yy, double sign) {
        const auto h = half_line(mu, alpha, yy);
        g += weight * h.value;
        g_y += weight * sign * h.d_y;
        g_alpha += weight * h.d_alpha;
    };
    if (std::isinf(li)) {
        add(lj, lj, -y, -1.0);
    } else if (std::isinf(lj)) {
        add(li, li, y, 1.0);
    } else {
        const double kappa = li * lj / (li + lj);
        add(kappa, li, y, 1.0);
        add(kappa, lj, -y, -1.0);
    }
    return {c * g, {g, -c * g_y, -c * g_alpha * alpha * alpha}};
}

ModelPoint auto_raw_point(const Params& p, double tau) {
    const auto [a, b, xi] = p;
    const double alpha = 1.0 / xi;
    const double at = alpha * std::abs(tau);
    const double e = std::exp(-at);
    const double is_zero = tau == 0.0 ? 1.0 : 0.0;
    const double r = -0.5 * b * alpha * e;
    const double r_alpha = -0.5 * b * (e - at * e);
    return {a * is_zero + r, {is_zero, -0.5 * alpha * e, -alpha * alpha * r_alpha}};
}

ModelPoint auto_async_point(const Params& p, double tau, double lambda) {
    if (std::isinf(lambda)) return auto_raw_point(p, tau);
    const auto [a, b, xi] = p;
    const double alpha = 1.0 / xi;
    const double y = std::abs(tau);
    const double is_zero = tau == 0.0 ? 1.0 : 0.0;
    const double s = lambda + alpha;
    const double D = exp_difference_quotient(alpha, lambda, y);
    const double D_alpha = d_alpha_of_D(lambda, alpha, y);
    const double l2 = lambda * lambda;

    const double value = is_zero * (a - b * alpha / s) - 0.5 * b * l2 * alpha * D / s;
    const double d_b = -is_zero * alpha / s - 0.5 * l2 * alpha * D / s;
    const double d_alpha = -is_zero * b * lambda / (s * s) - 0.5 * b * l2 * (lambda * D / (s * s) + alpha * D_alpha / s);
    return {value, {is_zero, d_b, -alpha * alpha * d_alpha}};
}

struct Points {
    std::vector<double> tau, y, w;
    bool weighted = false;
    double log_xi_min = -kInf;  ///< width search range: narrower or wider shapes are unidentified
    double log_xi_max = kInf;
};

Points collect(const Correlogram& cg, const FitOptions& opt) {
    Points pts;
    bool can_weight = opt.use_weights && cg.n_days >= opt.min_days_for_weights &&
                      cg.stderr.size() == cg.values.size();
    std::vector<double> se;
    for (std::size_t k = 0; k < cg.values.size() && can_weight; ++k) {
        if (!std::isfinite(cg.values[k])) continue;
        if (!std::isfinite(cg.stderr[k])) can_weight = false;
        se.push_back(cg.stderr[k]);
    }
    // Bins pinned by the normalisation (the zero-lag auto bin) show almost no spread across days;
    // a floor at a tenth of the median keeps their weight finite.
    double floor = 0.0;
    if (can_weight && !se.empty()) {
        std::nth_element(se.begin(), se.begin() + static_cast<std::ptrdiff_t>(se.size() / 2), se.end());
        floor = 0.1 * se[se.size() / 2];
        if (!(floor > 0.0)) can_weight = false;
    }
    for (std::size_t k = 0; k < cg.values.size(); ++k) {
        if (!std::isfinite(cg.values[k])) continue;
        pts.tau.push_back(cg.lag_grid[k]);
        pts.y.push_back(cg.values[k]);
        const double s = can_weight ? std::max(cg.stderr[k], floor) : 1.0;
        pts.w.push_back(1.0 / (s * s));
    }
    pts.weighted = can_weight;
    if (pts.y.size() < 10) throw std::invalid_argument("fit: need at least 10 lag points");
    const auto [lo, hi] = std::minmax_element(pts.tau.begin(), pts.tau.end());
    double step = kInf;
    for (std::size_t k = 1; k < pts.tau.size(); ++k) step = std::min(step, std::abs(pts.tau[k] - pts.tau[k - 1]));
    if (!std::isfinite(step) || step <= 0.0) step = 1.0;
    pts.log_xi_min = std::log(0.05 * step);
    pts.log_xi_max = std::log(20.0 * std::max(*hi - *lo, step));
    return pts;
}

std::size_t amplitude_index(FitFamily f) { return is_auto_family(f) ? 1 : 0; }

// Amplitudes by weighted linear least squares with the shape held fixed.
Params linear_amplitudes(FitFamily family, const Points& pts, double tau0, double xi, double li, double lj) {
    if (!is_auto_family(family)) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < pts.y.size(); ++k) {
            const double g = eval_family(family, {1.0, tau0, xi}, pts.tau[k], li, lj).value;
            num += pts.w[k] * g * pts.y[k];
            den += pts.w[k] * g * g;
        }
        return {den > 0.0 ? num / den : 0.0, tau0, xi};
    }
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < pts.y.size(); ++k) {
        const double ga = eval_family(family, {1.0, 0.0, xi}, pts.tau[k], li, lj).value;
        const double gb = eval_family(family, {0.0, 1.0, xi}, pts.tau[k], li, lj).value;
        const Eigen::Vector2d g(ga, gb);
        A += pts.w[k] * g * g.transpose();
        rhs += pts.w[k] * pts.y[k] * g;
    }
    const Eigen::Vector2d sol = A.fullPivLu().solve(rhs);
    return {sol[0], sol[1], xi};
}

double chi2_at(FitFamily family, const Points& pts, const Params& p, double li, double lj) {
    double chi2 = 0.0;
    for (std::size_t k = 0; k < pts.y.size(); ++k) {
        const double r = pts.y[k] - eval_family(family, p, pts.tau[k], li, lj).value;
        chi2 += pts.w[k] * r * r;
    }
    return chi2;
}

// Coarse scan over shapes (tau0 over the lag grid for cross families, xi over a log grid).
Params scan_init(FitFamily family, const Points& pts, double li, double lj) {
    const auto [lo, hi] = std::minmax_element(pts.tau.begin(), pts.tau.end());
    double step = kInf;
    for (std::size_t k = 1; k < pts.tau.size(); ++k) step = std::min(step, std::abs(pts.tau[k] - pts.tau[k - 1]));
    if (!std::isfinite(step) || step <= 0.0) step = 1.0;
    const double span = std::max(*hi - *lo, step);
    std::vector<double> tau0s{0.0};
    if (!is_auto_family(family)) tau0s = pts.tau;
    Params best{};
    double best_chi2 = kInf;
    constexpr int kXi = 24;
    for (int m = 0; m < kXi; ++m) {
        const double xi = 0.25 * step * std::pow(2.0 * span / (0.25 * step), m / (kXi - 1.0));
        for (double t0 : tau0s) {
            const Params p = linear_amplitudes(family, pts, t0, xi, li, lj);
            const double c2 = chi2_at(family, pts, p, li, lj);
            if (c2 < best_chi2) {
                best_chi2 = c2;
                best = p;
            }
        }
    }
    return best;
}

FitResult solve(FitFamily family, const Points& pts, const Params& init, double li, double lj,
                const FitOptions& opt) {
    if (!(init[2] > 0.0) || !std::isfinite(init[2])) throw std::invalid_argument("fit: initial xi must be > 0");
    const std::size_t n = pts.y.size();
    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd r(n);

    auto to_natural = [](const Eigen::Vector3d& th) { return Params{th[0], th[1], std::exp(th[2])}; };
    auto evaluate = [&](const Eigen::Vector3d& th, bool with_jacobian) {
        const Params p = to_natural(th);
        double chi2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto mp = eval_family(family, p, pts.tau[k], li, lj);
            const double sw = std::sqrt(pts.w[k]);
            r[k] = sw * (pts.y[k] - mp.value);
            chi2 += r[k] * r[k];
            if (with_jacobian) {
                J(k, 0) = sw * mp.gradient[0];
                J(k, 1) = sw * mp.gradient[1];
                J(k, 2) = sw * mp.gradient[2] * p[2];
            }
        }
        return chi2;
    };

    // Weighted Jacobian in (p0, p1, log xi) at an arbitrary point.
    auto jacobian_at = [&](const Eigen::Vector3d& th) {
        const Params p = to_natural(th);
        Eigen::MatrixXd Jt(n, 3);
        for (std::size_t k = 0; k < n; ++k) {
            const auto mp = eval_family(family, p, pts.tau[k], li, lj);
            const double sw = std::sqrt(pts.w[k]);
            Jt(k, 0) = sw * mp.gradient[0];
            Jt(k, 1) = sw * mp.gradient[1];
            Jt(k, 2) = sw * mp.gradient[2] * p[2];
        }
        return Jt;
    };
    // Hessian of chi2 / 2: J'J minus the residual-weighted model curvature, the latter from
    // central differences of the analytic Jacobian. Gauss-Newton alone converges only linearly,
    // and slowly, when a weakly identified width leaves residual curvature comparable to J'J.
    auto newton_hessian = [&](const Eigen::Vector3d& th, const Eigen::Matrix3d& A) {
        Eigen::Matrix3d H = A;
        for (int i = 0; i < 3; ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(th[i]));
            Eigen::Vector3d up = th, dn = th;
            up[i] += h;
            dn[i] -= h;
            const Eigen::MatrixXd dJ = (jacobian_at(up) - jacobian_at(dn)) / (2.0 * h);
            H.col(i) -= dJ.transpose() * r;
        }
        return Eigen::Matrix3d(0.5 * (H + H.transpose()));
    };

    auto clamp = [&](Eigen::Vector3d th) {
        th[2] = std::clamp(th[2], pts.log_xi_min, pts.log_xi_max);
        return th;
    };
    Eigen::Vector3d theta = clamp({init[0], init[1], std::log(init[2])});
    double chi2 = evaluate(theta, true);
    if (!std::isfinite(chi2)) throw NumericalError("fit: model not finite at the initial point");
    double mu = 1e-3;
    std::size_t iter = 0;
    bool converged = chi2 == 0.0;

    FitResult res;
    res.family = family;
    res.n_points = n;
    res.weighted = pts.weighted;
    res.lambda_i = li;
    res.lambda_j = lj;

    while (!converged) {
        if (iter >= opt.max_iterations) {
            res.params = to_natural(theta);
            res.chi2 = chi2;
            res.iterations = iter;
            res.stderr = {kNaN, kNaN, kNaN};
            throw FitError("fit: no convergence after " + std::to_string(iter) + " iterations", res);
        }
        ++iter;
        const Eigen::Matrix3d A = J.transpose() * J;
        const Eigen::Vector3d g = J.transpose() * r;
        const Eigen::Matrix3d H = newton_hessian(theta, A);
        const Eigen::LDLT<Eigen::Matrix3d> h_ldlt(H);
        const bool newton = h_ldlt.info() == Eigen::Success && h_ldlt.isPositive() && h_ldlt.vectorD().minCoeff() > 0.0;
        bool accepted = false;
        while (!accepted) {
            Eigen::Matrix3d Ad = newton ? H : A;
            for (int i = 0; i < 3; ++i) Ad(i, i) += mu * std::max(A(i, i), 1e-300);
            const Eigen::Vector3d trial = clamp(theta + Ad.ldlt().solve(g));
            const Eigen::Vector3d delta = trial - theta;
            const double trial_chi2 = delta.allFinite() ? evaluate(trial, false) : kInf;
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
                accepted = true;
                const bool small = (delta.array().abs() <= opt.step_tolerance * (theta.array().abs() + opt.step_tolerance)).all();
                // Weighted chi2 is in units of the point variance; unweighted chi2 is scaled by its mean.
                const double unit = pts.weighted ? 1.0 : chi2 / static_cast<double>(n);
                const double gain = chi2 - trial_chi2;
                const bool flat = gain <= opt.chi2_tolerance * chi2 || gain <= opt.chi2_abs_tolerance * unit;
                theta = trial;
                chi2 = evaluate(theta, true);
                mu = std::max(mu / 3.0, 1e-15);
                if (small || flat || chi2 == 0.0) converged = true;
            } else {
                mu *= 4.0;
                if (mu > 1e16) {
                    // No descent direction left: theta is stationary to working precision.
                    accepted = true;
                    converged = true;
                }
            }
        }
    }

    res.params = to_natural(theta);
    res.chi2 = chi2;
    res.iterations = iter;
    // At a width bound xi is unidentified: its column is dropped from the covariance.
    const double margin = 1e-6;
    const bool at_bound = theta[2] <= pts.log_xi_min + margin || theta[2] >= pts.log_xi_max - margin;
    const int m = at_bound ? 2 : 3;
    const Eigen::MatrixXd Jm = J.leftCols(m);
    const Eigen::MatrixXd A = Jm.transpose() * Jm;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    res.stderr = {kInf, kInf, kInf};
    if (lu.isInvertible()) {
        Eigen::MatrixXd cov = lu.inverse();
        if (!pts.weighted) cov *= chi2 / static_cast<double>(n - static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) res.stderr[i] = std::sqrt(std::max(cov(i, i), 0.0));
        if (!at_bound) res.stderr[2] *= res.params[2];
    }
    if (at_bound) {
        res.degenerate = true;
        res.params[2] = kNaN;
        res.stderr[2] = kNaN;
    }
    const std::size_t amp = amplitude_index(family);
    const double t_stat = std::abs(res.params[amp]) / res.stderr[amp];
    if (!(t_stat >= 2.0)) {
        res.degenerate = true;
        if (!is_auto_family(family)) res.params[1] = res.stderr[1] = kNaN;
        res.params[2] = res.stderr[2] = kNaN;
    }
    return res;
}

FitResult solve_with_fallback(FitFamily family, const Points& pts, const Params& init, double li, double lj,
                              const FitOptions& opt) {
    bool usable = std::isfinite(init[0]) && std::isfinite(init[1]) && init[2] > 0.0 && std::isfinite(init[2]);
    if (usable) {
        try {
            return solve(family, pts, init, li, lj, opt);
        } catch (const FitError&) {
        }
    }
    return solve(family, pts, scan_init(family, pts, li, lj), li, lj, opt);
}

Params peak_init(const Points& pts) {
    std::size_t peak = 0;
    for (std::size_t k = 1; k < pts.y.size(); ++k) {
        if (std::abs(pts.y[k]) > std::abs(pts.y[peak])) peak = k;
    }
    const double height = pts.y[peak];
    auto half_distance = [&](int dir) {
        auto k = static_cast<std::ptrdiff_t>(peak);
        const auto last = static_cast<std::ptrdiff_t>(pts.y.size()) - 1;
        while (k + dir >= 0 && k + dir <= last) {
            const auto next = k + dir;
            if (std::abs(pts.y[next]) < 0.5 * std::abs(height)) {
                const double f = (std::abs(pts.y[k]) - 0.5 * std::abs(height)) /
                                 std::max(std::abs(pts.y[k]) - std::abs(pts.y[next]), 1e-300);
                return std::abs(pts.tau[k] - pts.tau[peak]) + f * std::abs(pts.tau[next] - pts.tau[k]);
            }
            k = next;
        }
        return std::abs(pts.tau[k] - pts.tau[peak]);
    };
    double step = 1.0;
    if (pts.tau.size() > 1) step = std::abs(pts.tau[1] - pts.tau[0]);
    const double hw = 0.5 * (half_distance(-1) + half_distance(1));
    return {height, pts.tau[peak], std::max(hw / std::log(2.0), 0.5 * step)};
}

}  // namespace

std::string_view family_name(FitFamily f) {
    switch (f) {
        case FitFamily::cross_raw: return "cross_raw";
        case FitFamily::cross_async: return "cross_async";
        case FitFamily::auto_raw: return "auto_raw";
        case FitFamily::auto_async: return "auto_async";
    }
    return "unknown";
}

FitFamily parse_family(std::string_view name) {
    for (auto f : {FitFamily::cross_raw, FitFamily::cross_async, FitFamily::auto_raw, FitFamily::auto_async}) {
        if (family_name(f) == name) return f;
    }
    throw std::invalid_argument("unknown fit family '" + std::string(name) + "'");
}

bool is_auto_family(FitFamily f) { return f == FitFamily::auto_raw || f == FitFamily::auto_async; }

ModelPoint eval_family(FitFamily family, const Params& params, double tau, double lambda_i, double lambda_j) {
    switch (family) {
        case FitFamily::cross_raw: return cross_raw_point(params, tau);
        case FitFamily::cross_async: return cross_async_point(params, tau, lambda_i, lambda_j);
        case FitFamily::auto_raw: return auto_raw_point(params, tau);
        case FitFamily::auto_async: return auto_async_point(params, tau, lambda_i);
    }
    throw std::invalid_argument("eval_family: unknown family");
}

FitResult fit_family(const Correlogram& cg, FitFamily family, const Params& init, double lambda_i,
                     double lambda_j, const FitOptions& options) {
    const Points pts = collect(cg, options);
    return solve(family, pts, init, lambda_i, lambda_j, options);
}

FitResult fit_cross_raw(const Correlogram& cg, const FitOptions& options) {
    const Points pts = collect(cg, options);
    return solve_with_fallback(FitFamily::cross_raw, pts, peak_init(pts), kInf, kInf, options);
}

FitResult fit_cross_async(const Correlogram& cg, double lambda_i, double lambda_j, const FitOptions& options) {
    if (!(lambda_i > 0.0) || !(lambda_j > 0.0)) throw std::invalid_argument("fit_cross_async: rates must be > 0");
    const Points pts = collect(cg, options);
    FitResult raw;
    try {
        raw = solve_with_fallback(FitFamily::cross_raw, pts, peak_init(pts), kInf, kInf, options);
    } catch (const FitError& e) {
        raw = e.best();
    }
    Params init{kNaN, kNaN, kNaN};
    if (!raw.degenerate && raw.params[2] > 0.0) {
        init = linear_amplitudes(FitFamily::cross_async, pts, raw.params[1], raw.params[2], lambda_i, lambda_j);
    }
    return solve_with_fallback(FitFamily::cross_async, pts, init, lambda_i, lambda_j, options);
}

FitResult fit_auto_raw(const Correlogram& cg, const FitOptions& options) {
    const Points pts = collect(cg, options);
    // xi from the decay of the first two regular bins on the positive side, when usable.
    std::size_t zero = 0;
    for (std::size_t k = 0; k < pts.tau.size(); ++k) {
        if (pts.tau[k] == 0.0) zero = k;
    }
    double xi = kNaN;
    if (zero + 2 < pts.y.size()) {
        const double v1 = pts.y[zero + 1], v2 = pts.y[zero + 2];
        const double dt = pts.tau[zero + 2] - pts.tau[zero + 1];
        if (v1 * v2 > 0.0 && std::abs(v1) > std::abs(v2)) xi = dt / std::log(v1 / v2);
    }
    Params init{kNaN, kNaN, kNaN};
    if (xi > 0.0 && std::isfinite(xi)) init = linear_amplitudes(FitFamily::auto_raw, pts, 0.0, xi, kInf, kInf);
    return solve_with_fallback(FitFamily::auto_raw, pts, init, kInf, kInf, options);
}

FitResult fit_auto_async(const Correlogram& cg, double lambda, const FitOptions& options) {
    if (!(lambda > 0.0)) throw std::invalid_argument("fit_auto_async: rate must be > 0");
    const Points pts = collect(cg, options);
    FitResult raw;
    try {
        raw = fit_auto_raw(cg, options);
    } catch (const FitError& e) {
        raw = e.best();
    }
    Params init{kNaN, kNaN, kNaN};
    if (raw.params[2] > 0.0 && std::isfinite(raw.params[2])) {
        init = linear_amplitudes(FitFamily::auto_async, pts, 0.0, raw.params[2], lambda, lambda);
    }
    FitResult out = solve_with_fallback(FitFamily::auto_async, pts, init, lambda, lambda, options);
    out.lambda_j = lambda;
    return out;
}

double chi2_ratio(const FitResult& raw, const FitResult& async) {
    if (!(async.chi2 > 0.0)) throw NumericalError("chi2_ratio: async chi2 is zero");
    if (raw.n_points != async.n_points) throw std::invalid_argument("chi2_ratio: fits use different lag grids");
    return raw.chi2 / async.chi2 - 1.0;
}

}  // namespace epps
