#pragma once

// Nonlinear least-squares fit of the simplified three-parameter impedance
// model to a measured sweep.  Damped (Levenberg-Marquardt style) iteration
// with an analytic Jacobian, searching in log-parameter space so the
// positivity constraints hold by construction.  Multi-start over log-spaced
// initial capacitance guesses guards against the R_E / re_zs_eff trade-off
// valley.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mlaris/core.hpp"
#include "mlaris/transducer.hpp"

namespace mlaris {

struct FitOptions {
    int max_iterations = 200;   // per start
    int multistart = 5;
    double step_tolerance = 1e-12;
    double cost_tolerance = 1e-15;
};

struct FitResult {
    PztCircuitParams params;
    double residual = 0.0;           // sum of squared complex residuals, ohms^2
    double relative_residual = 0.0;  // sqrt(residual / sum |Z_meas|^2)
    int iterations = 0;
    bool converged = false;
};

struct FitError : std::runtime_error {
    FitResult best;
    explicit FitError(FitResult b)
        : std::runtime_error("fit did not converge within the iteration budget"),
          best(std::move(b)) {}
};

namespace detail {

inline double fit_cost(const ImpedanceSweep& sweep, const std::array<double, 3>& theta) {
    const double r_e = std::exp(theta[0]);
    const double c_e = std::exp(theta[1]);
    const double re = std::exp(theta[2]);
    double cost = 0.0;
    for (const auto& p : sweep.entries) {
        const double wc = angular_frequency(p.freq_hz) * c_e;
        const double re_model = 1.0 / (r_e * wc * wc) + re;
        const double im_model = -1.0 / wc;
        const double dr = re_model - p.z.real();
        const double di = im_model - p.z.imag();
        cost += dr * dr + di * di;
    }
    return cost;
}

// Solve the 3x3 normal equations by Gaussian elimination with partial
// pivoting.  Returns false on a (near-)singular system.
inline bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b,
                   std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double m = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

inline FitResult fit_single_start(const ImpedanceSweep& sweep, std::array<double, 3> theta,
                                  const FitOptions& opt) {
    double lambda = 1e-3;
    double cost = fit_cost(sweep, theta);
    int iter = 0;
    bool converged = false;

    for (; iter < opt.max_iterations && !converged; ++iter) {
        const double r_e = std::exp(theta[0]);
        const double c_e = std::exp(theta[1]);
        const double re = std::exp(theta[2]);

        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (const auto& p : sweep.entries) {
            const double wc = angular_frequency(p.freq_hz) * c_e;
            const double loss = 1.0 / (r_e * wc * wc);
            const double rres = loss + re - p.z.real();
            const double ires = -1.0 / wc - p.z.imag();
            // d/d(log params) of the real and imaginary model parts
            const std::array<double, 3> jr{-loss, -2.0 * loss, re};
            const std::array<double, 3> ji{0.0, 1.0 / wc, 0.0};
            for (int a = 0; a < 3; ++a) {
                jtr[a] += jr[a] * rres + ji[a] * ires;
                for (int b = 0; b < 3; ++b) jtj[a][b] += jr[a] * jr[b] + ji[a] * ji[b];
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            auto damped = jtj;
            for (int a = 0; a < 3; ++a)
                damped[a][a] += lambda * std::max(jtj[a][a], 1e-30);
            std::array<double, 3> delta{};
            std::array<double, 3> rhs{-jtr[0], -jtr[1], -jtr[2]};
            if (!solve3(damped, rhs, delta)) {
                lambda *= 10.0;
                continue;
            }
            const std::array<double, 3> trial{theta[0] + delta[0], theta[1] + delta[1],
                                              theta[2] + delta[2]};
            const double trial_cost = fit_cost(sweep, trial);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double step = std::max({std::abs(delta[0]), std::abs(delta[1]),
                                              std::abs(delta[2])});
                const double drop = cost - trial_cost;
                theta = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (step < opt.step_tolerance || drop <= opt.cost_tolerance * std::max(cost, 1e-300))
                    converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            // No downhill step found at any damping: stationary point.
            converged = true;
        }
    }

    FitResult out;
    out.params.r_e = std::exp(theta[0]);
    out.params.c_e = std::exp(theta[1]);
    out.params.re_zs_eff = std::exp(theta[2]);
    out.residual = cost;
    out.iterations = iter;
    out.converged = converged;
    return out;
}

}  // namespace detail

inline FitResult fit_params(const ImpedanceSweep& sweep, const FitOptions& opt = {}) {
    sweep.validate();
    require(opt.max_iterations >= 1, "fit: max_iterations must be >= 1");
    require(opt.multistart >= 1, "fit: multistart must be >= 1");

    // Seed guesses from the sweep itself: the highest frequency pins C_E
    // (capacitive reactance) and approximately re_zs_eff; the lowest
    // frequency carries the dielectric-loss term.
    const auto& lo = sweep.entries.front();
    const auto& hi = sweep.entries.back();
    const double w_hi = angular_frequency(hi.freq_hz);
    const double w_lo = angular_frequency(lo.freq_hz);
    double c0 = hi.z.imag() < 0.0 ? -1.0 / (w_hi * hi.z.imag()) : 1e-8;
    c0 = std::clamp(c0, 1e-15, 1e-2);
    const double re0 = std::clamp(hi.z.real(), 1e-3, 1e9);

    double meas_norm = 0.0;
    for (const auto& p : sweep.entries) meas_norm += std::norm(p.z);

    FitResult best;
    best.residual = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int s = 0; s < opt.multistart; ++s) {
        // log-spaced capacitance guesses across two decades centred on c0
        const double frac = opt.multistart == 1
                                ? 0.5
                                : static_cast<double>(s) / (opt.multistart - 1);
        const double c_guess = c0 * std::pow(10.0, 2.0 * (frac - 0.5));
        const double excess = std::max(lo.z.real() - re0, 1e-3);
        const double r_guess =
            std::clamp(1.0 / (excess * w_lo * w_lo * c_guess * c_guess), 1.0, 1e12);
        const std::array<double, 3> theta0{std::log(r_guess), std::log(c_guess),
                                           std::log(re0)};
        FitResult r = detail::fit_single_start(sweep, theta0, opt);
        if (!any || r.residual < best.residual ||
            (r.residual == best.residual && r.converged && !best.converged)) {
            best = r;
            any = true;
        }
    }
    best.relative_residual = std::sqrt(best.residual / std::max(meas_norm, 1e-300));
    if (!best.converged) throw FitError(best);
    return best;
}

}  // namespace mlaris
