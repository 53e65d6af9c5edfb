// SPDX-License-Identifier: Apache-2.0
//
// dfb - differential CSI feedback analysis and simulation library
// Copyright (C) 2026 The dfb authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "dfb/ratedist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "dfb/error.hpp"

namespace dfb {
namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_alpha(double alpha, const char *what) {
    if (!(std::abs(alpha) <= 1.0))
        throw DomainError(std::string(what) + ": |alpha| must be <= 1");
}

// 1 - 2^(-y) for y >= 0 without cancellation near 0.
double one_minus_inv_pow2(double y) { return -std::expm1(-y * kLn2); }

// S - (s^2 / S) (1 - 1/g) a^2 / (1 - r^2 a^2 / g), the scaled form of the interval curve
// that stays finite when g = 2^(C_fb T / n) overflows.
double interval_curve(const ChannelParams &p, double exponent, double alpha) {
    const double s = p.sigma_h2;
    const double big_s = p.sigma_hhat2;
    const double r = p.ratio();
    const double a2 = alpha * alpha;
    const double g_inv = std::exp2(-exponent);
    const double num = one_minus_inv_pow2(exponent) * a2;
    const double den = 1.0 - r * r * a2 * g_inv;
    return big_s - (s * s / big_s) * num / den;
}

} // namespace

// ---------------------------------------------------------------------------------------------
// Budget
// ---------------------------------------------------------------------------------------------

int interval_from_budget(double r_bits, double c_fb) {
    if (!(c_fb > 0.0) || !std::isfinite(c_fb))
        throw DomainError("interval_from_budget: c_fb must be positive");
    if (!(r_bits >= 0.0) || !std::isfinite(r_bits))
        throw DomainError("interval_from_budget: r_bits must be >= 0");
    const double q = r_bits / c_fb;
    const double nearest = std::round(q);
    // R and C_fb usually come from decimal input; 0.3 / 0.1 must give 3, not 4.
    if (std::abs(q - nearest) <= 1e-12 * std::max(1.0, q))
        return static_cast<int>(nearest);
    return static_cast<int>(std::ceil(q));
}

FeedbackBudget FeedbackBudget::from_rate(double r_bits, double c_fb) {
    return FeedbackBudget{c_fb, r_bits, interval_from_budget(r_bits, c_fb)};
}

FeedbackBudget FeedbackBudget::from_interval(int t_blocks, double c_fb) {
    if (t_blocks < 1)
        throw ConfigError("FeedbackBudget: interval must be >= 1 block");
    if (!(c_fb > 0.0))
        throw ConfigError("FeedbackBudget: c_fb must be positive");
    return FeedbackBudget{c_fb, c_fb * t_blocks, t_blocks};
}

void FeedbackBudget::validate() const {
    if (!(c_fb > 0.0) || !std::isfinite(c_fb))
        throw ConfigError("FeedbackBudget: c_fb must be positive");
    if (!(r_bits >= 0.0))
        throw ConfigError("FeedbackBudget: r_bits must be >= 0");
    if (t_blocks < 1)
        throw ConfigError("FeedbackBudget: interval must be >= 1 block");
    if (r_bits > c_fb * t_blocks * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "FeedbackBudget: R = " << r_bits << " bits every T = " << t_blocks
            << " blocks exceeds C_fb = " << c_fb << " bits/block";
        throw ConfigError(msg.str());
    }
}

DistortionPoint DistortionPoint::from_per_entry(double d, const ChannelParams &params) {
    if (!(d >= 0.0))
        throw DomainError("DistortionPoint: d must be >= 0");
    return DistortionPoint{d, d * params.n_r * params.n_t};
}

// ---------------------------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------------------------

double mi_lower_bound(const ChannelParams &params, double alpha, double d) {
    require_alpha(alpha, "mi_lower_bound");
    if (!(d > 0.0))
        throw DomainError("mi_lower_bound: distortion must be > 0");
    const double s = params.sigma_h2;
    const double e = params.estimation_error_variance();
    const double r = params.ratio();
    const double a2 = alpha * alpha;
    return std::log2(a2 * r * r + (1.0 - a2) * s / d + e * (1.0 + a2 * r) / d);
}

double min_feedback_rate(const ChannelParams &params, double alpha, double d) {
    return params.entries() * std::max(mi_lower_bound(params, alpha, d), 0.0);
}

double distortion_from_rate(const ChannelParams &params, double alpha, double r_bits) {
    require_alpha(alpha, "distortion_from_rate");
    if (!(r_bits >= 0.0))
        throw DomainError("distortion_from_rate: r_bits must be >= 0");
    const double big_s = params.sigma_hhat2;
    const double r = params.ratio();
    const double a2r2 = alpha * alpha * r * r;
    const double g = std::exp2(r_bits / params.entries());
    const double den = g - a2r2;
    if (!(den > 0.0))
        throw SolverError("distortion_from_rate: non-positive denominator");
    return (big_s - a2r2 * big_s) / den;
}

double causal_distortion(const ChannelParams &params, double alpha, double r_bits) {
    const double s = params.sigma_h2;
    const double big_s = params.sigma_hhat2;
    const double r = params.ratio();
    const double a2 = alpha * alpha;
    return a2 * r * r * distortion_from_rate(params, alpha, r_bits) + a2 * s * (big_s - s) / big_s +
           (1.0 - a2) * s + (big_s - s);
}

double distortion_vs_interval(const ChannelParams &params, double c_fb, double t_blocks) {
    if (!(t_blocks > 0.0))
        throw DomainError("distortion_vs_interval: interval must be > 0");
    if (!(c_fb > 0.0))
        throw DomainError("distortion_vs_interval: c_fb must be > 0");
    const double alpha = autocorrelation(params, t_blocks);
    return interval_curve(params, c_fb * t_blocks / params.entries(), alpha);
}

double interval_exponent(const ChannelParams &params, double c_fb) {
    return c_fb / (2.0 * std::numbers::pi * params.entries() * params.f_d * params.t_block);
}

double distortion_at_x(const ChannelParams &params, double c_fb, double x) {
    if (!(x > 0.0))
        throw DomainError("distortion_at_x: x must be > 0");
    const double k = interval_exponent(params, c_fb);
    return interval_curve(params, k * x, bessel_j0(x));
}

double distortion_derivative(const ChannelParams &params, double c_fb, double x) {
    if (!(x > 0.0))
        throw DomainError("distortion_derivative: x must be > 0");
    const double k = interval_exponent(params, c_fb);
    const double c = params.sigma_h2 * params.sigma_h2 / params.sigma_hhat2;
    const double r2 = params.ratio() * params.ratio();
    const double j0 = bessel_j0(x);
    const double j1 = bessel_j1(x);
    // g c J0 [2 (g - 1) J1 - k ln2 (J0 - r^2 J0^3)] / (g - r^2 J0^2)^2, numerator and
    // denominator divided by g^2.
    const double g_inv = std::exp2(-k * x);
    const double bracket = 2.0 * one_minus_inv_pow2(k * x) * j1 - k * kLn2 * (j0 - r2 * j0 * j0 * j0) * g_inv;
    const double den = 1.0 - r2 * j0 * j0 * g_inv;
    return c * j0 * bracket / (den * den);
}

IntervalOptimum optimal_interval(const ChannelParams &params, double c_fb) {
    params.validate();
    if (!(c_fb > 0.0))
        throw DomainError("optimal_interval: c_fb must be > 0");

    constexpr double lo_edge = 1e-8;
    constexpr double hi_edge = 1.5;
    constexpr int scan_points = 3000;

    double lo = lo_edge;
    double f_lo = distortion_derivative(params, c_fb, lo);
    double hi = 0.0;
    bool bracketed = false;
    if (f_lo < 0.0) {
        for (int i = 1; i <= scan_points; ++i) {
            const double x = lo_edge + (hi_edge - lo_edge) * i / scan_points;
            const double f = distortion_derivative(params, c_fb, x);
            if (f >= 0.0) {
                hi = x;
                bracketed = true;
                break;
            }
            lo = x;
            f_lo = f;
        }
    }
    if (!bracketed) {
        std::ostringstream msg;
        msg << "optimal_interval: derivative has no sign change on (1e-8, 1.5] for c_fb=" << c_fb
            << " sigma_h2=" << params.sigma_h2 << " sigma_hhat2=" << params.sigma_hhat2 << " f_d=" << params.f_d
            << " t_block=" << params.t_block << " n_r=" << params.n_r << " n_t=" << params.n_t;
        throw SolverError(msg.str());
    }

    while (hi - lo >= 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (distortion_derivative(params, c_fb, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }

    IntervalOptimum opt;
    opt.k = interval_exponent(params, c_fb);
    opt.x_opt = 0.5 * (lo + hi);
    opt.t_opt_real = opt.x_opt / (2.0 * std::numbers::pi * params.f_d * params.t_block);
    opt.d_min = distortion_at_x(params, c_fb, opt.x_opt);

    const int below = static_cast<int>(std::floor(opt.t_opt_real));
    const int above = static_cast<int>(std::ceil(opt.t_opt_real));
    if (below < 1) {
        opt.t_opt_int = std::max(above, 1);
    } else {
        const double d_below = distortion_vs_interval(params, c_fb, below);
        const double d_above = distortion_vs_interval(params, c_fb, above);
        opt.t_opt_int = (d_above < d_below) ? above : below;
    }
    return opt;
}

// ---------------------------------------------------------------------------------------------
// Gaussian test channel
// ---------------------------------------------------------------------------------------------

double gaussian_mi_oracle(const ChannelParams &params, double alpha, double d) {
    require_alpha(alpha, "gaussian_mi_oracle");
    const double big_s = params.sigma_hhat2;
    if (!(d > 0.0))
        throw DomainError("gaussian_mi_oracle: distortion must be > 0");
    if (d > big_s)
        throw DomainError("gaussian_mi_oracle: distortion exceeds the estimate variance");

    const double s = params.sigma_h2;
    const double e = params.estimation_error_variance();
    const double r = params.ratio();

    // Independent components: h_bar_prev, e_prev, psi_prev, w_n, h_e_n, test-channel noise.
    Eigen::Matrix<double, 6, 1> var;
    var << big_s - d, d, params.psi_variance(), s, e, 0.0;

    // h_hat_n = a r h_bar_prev + a r e_prev + a psi_prev + sqrt(1 - a^2) w_n + h_e_n
    Eigen::Matrix<double, 1, 6> row_prev = Eigen::Matrix<double, 1, 6>::Zero();
    row_prev(0) = 1.0;
    Eigen::Matrix<double, 1, 6> row_hat;
    row_hat << alpha * r, alpha * r, alpha, std::sqrt(std::max(0.0, 1.0 - alpha * alpha)), 1.0, 0.0;

    auto cov = [&](const Eigen::Matrix<double, 1, 6> &a, const Eigen::Matrix<double, 1, 6> &b) {
        return (a.array() * var.transpose().array() * b.array()).sum();
    };

    const double var_prev = cov(row_prev, row_prev);
    const double cross = cov(row_hat, row_prev);
    const double beta = var_prev > 0.0 ? cross / var_prev : 0.0;
    const double cond_var = cov(row_hat, row_hat) - beta * cross; // Var(h_hat_n | h_bar_prev)
    if (cond_var <= d)
        return 0.0; // the predictor alone meets the distortion target

    // Backward test channel: h_bar_n = mu + c (h_hat_n - mu) + noise, c = (V - d) / V,
    // Var(noise) = c d, so that h_hat_n - h_bar_n ~ CN(0, d) independent of h_bar_n.
    const double c = (cond_var - d) / cond_var;
    var(5) = c * d;
    Eigen::Matrix<double, 1, 6> row_bar = beta * row_prev + c * (row_hat - beta * row_prev);
    row_bar(5) = 1.0;

    if (var_prev > 0.0) {
        Eigen::Matrix3d full;
        const std::array<const Eigen::Matrix<double, 1, 6> *, 3> rows = {&row_prev, &row_hat, &row_bar};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                full(i, j) = cov(*rows[i], *rows[j]);
        Eigen::Matrix2d hat_prev;
        hat_prev << full(1, 1), full(1, 0), full(0, 1), full(0, 0);
        Eigen::Matrix2d bar_prev;
        bar_prev << full(2, 2), full(2, 0), full(0, 2), full(0, 0);
        // I(X; Y | Z) = log2 det S_xz det S_yz / (det S_z det S_xyz) for complex Gaussians.
        return std::log2(hat_prev.determinant()) + std::log2(bar_prev.determinant()) -
               std::log2(full(0, 0)) - std::log2(full.determinant());
    }
    Eigen::Matrix2d joint;
    joint << cov(row_hat, row_hat), cov(row_hat, row_bar), cov(row_bar, row_hat), cov(row_bar, row_bar);
    return std::log2(joint(0, 0)) + std::log2(joint(1, 1)) - std::log2(joint.determinant());
}

ComplexMatrix gaussian_quantize_with(const ComplexMatrix &h_hat, double d, const ChannelParams &params,
                                     const ComplexMatrix &unit_noise) {
    if (!(d >= 0.0))
        throw DomainError("gaussian_quantize: distortion must be >= 0");
    const double big_s = params.sigma_hhat2;
    if (d >= big_s)
        return ComplexMatrix::Zero(h_hat.rows(), h_hat.cols());
    const double keep = 1.0 - d / big_s;
    return keep * h_hat + std::sqrt(d * keep) * unit_noise;
}

ComplexMatrix gaussian_quantize(const ComplexMatrix &h_hat, double d, const ChannelParams &params,
                                RngStream &stream) {
    const ComplexMatrix noise = sample_complex_gaussian(static_cast<int>(h_hat.rows()),
                                                        static_cast<int>(h_hat.cols()), 1.0, stream);
    return gaussian_quantize_with(h_hat, d, params, noise);
}

} // namespace dfb
