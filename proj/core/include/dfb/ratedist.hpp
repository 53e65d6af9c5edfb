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

// Rate-distortion relations for differential CSI feedback over AR(1) fading.
//
// Notation used throughout (all per complex channel entry):
//   s = sigma_h2, S = sigma_hhat2, e = S - s, r = s / S, a = alpha, n = n_r * n_t,
//   g = 2^(R / n) with R the bits per feedback event.
//
// Conditional mutual-information bound per entry, given the previous quantized channel:
//   I >= log2[ a^2 r^2 + (1 - a^2) s / d + e (1 + a^2 r) / d ]
// Distortion reachable with R bits:        d(R) = S (1 - a^2 r^2) / (g - a^2 r^2)
// Distortion seen one interval later:      d_c  = S (1 - a^2 r^2) g / (g - a^2 r^2)
// With R = C_fb T and a = J0(2 pi f_d T t_block), d_c(T) tends to S at both T -> 0 and T -> inf
// and dips below S in between; the dip is located by bisection on the x = 2 pi f_d T t_block axis.
// All logarithms are base 2.

#pragma once

#include "dfb/channel.hpp"
#include "dfb/mathcore.hpp"

namespace dfb {

/// Feedback accounting: R bits every T blocks over a link carrying c_fb bits per block.
struct FeedbackBudget {
    double c_fb = 1.0;   ///< feedback capacity [bits / block]
    double r_bits = 1.0; ///< bits per feedback event
    int t_blocks = 1;    ///< feedback interval [blocks]

    /// T = ceil(R / C_fb).
    static FeedbackBudget from_rate(double r_bits, double c_fb);

    /// R = C_fb T, the full budget of an interval.
    static FeedbackBudget from_interval(int t_blocks, double c_fb);

    /// Throws ConfigError when R / T > C_fb.
    void validate() const;
};

/// Least integer >= r_bits / c_fb. Exact multiples map to the quotient.
int interval_from_budget(double r_bits, double c_fb);

struct DistortionPoint {
    double d = 0.0;     ///< per-entry distortion
    double big_d = 0.0; ///< total distortion d * n_r * n_t

    static DistortionPoint from_per_entry(double d, const ChannelParams &params);
};

struct IntervalOptimum {
    double x_opt = 0.0;      ///< 2 pi f_d tau at the optimum
    double t_opt_real = 0.0; ///< continuous optimal interval [blocks]
    int t_opt_int = 1;       ///< best neighbouring integer interval
    double d_min = 0.0;      ///< distortion at x_opt
    double k = 0.0;          ///< C_fb / (2 pi n_r n_t f_d t_block)
};

/// Lower bound on I(h_hat_n; h_bar_n | h_bar_{n-1}) in bits per complex entry. May be negative.
double mi_lower_bound(const ChannelParams &params, double alpha, double d);

/// n_r n_t max(mi_lower_bound, 0).
double min_feedback_rate(const ChannelParams &params, double alpha, double d);

/// Inverse of min_feedback_rate on its non-clamped branch.
double distortion_from_rate(const ChannelParams &params, double alpha, double r_bits);

/// Effective distortion after one feedback interval of channel ageing (term-by-term form).
double causal_distortion(const ChannelParams &params, double alpha, double r_bits);

/// Effective distortion as a function of the interval T with R = C_fb T.
double distortion_vs_interval(const ChannelParams &params, double c_fb, double t_blocks);

/// Same curve on the x = 2 pi f_d T t_block axis.
double distortion_at_x(const ChannelParams &params, double c_fb, double x);

/// Closed-form derivative of distortion_at_x with respect to x.
double distortion_derivative(const ChannelParams &params, double c_fb, double x);

/// Exponent constant k = C_fb / (2 pi n_r n_t f_d t_block).
double interval_exponent(const ChannelParams &params, double c_fb);

/// Minimiser of the distortion curve: first sign change of the derivative on (1e-8, 1.5],
/// refined by bisection to |dx| < 1e-10. Throws SolverError if the derivative never changes sign.
IntervalOptimum optimal_interval(const ChannelParams &params, double c_fb);

/// Mutual information of the scalar jointly Gaussian test channel, computed from the covariance of
/// (h_bar_{n-1}, h_hat_n, h_bar_n). Independent route to mi_lower_bound. Requires 0 < d <= S.
double gaussian_mi_oracle(const ChannelParams &params, double alpha, double d);

/// Gaussian test-channel quantization of an estimate: returns H_bar with H_hat = H_bar + E,
/// E ~ CN(0, d) independent of H_bar and Var(H_bar) = S - d. Distortions d >= S give H_bar = 0.
/// Always consumes one n_r x n_t block of normals from the stream.
ComplexMatrix gaussian_quantize(const ComplexMatrix &h_hat, double d, const ChannelParams &params,
                                RngStream &stream);

/// gaussian_quantize with the CN(0, 1) noise supplied by the caller, so several distortions can
/// share one draw.
ComplexMatrix gaussian_quantize_with(const ComplexMatrix &h_hat, double d, const ChannelParams &params,
                                     const ComplexMatrix &unit_noise);

} // namespace dfb
