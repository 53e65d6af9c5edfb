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

// Time-correlated flat Rayleigh MIMO block fading.
//
// The true channel follows a first-order autoregression H_n = a H_{n-1} + sqrt(1 - a^2) W_n with
// W_n ~ CN(0, sigma_h2) i.i.d. and a = J0(2 pi f_d tau). The receiver observes an ML estimate
// H_hat = H + H_e with H_e ~ CN(0, sigma_hhat2 - sigma_h2) independent of H. Conditioned on the
// estimate, H = r H_hat + Psi with r = sigma_h2 / sigma_hhat2 and Psi independent of H_hat.

#pragma once

#include <cstddef>
#include <vector>

#include "dfb/mathcore.hpp"

namespace dfb {

struct ChannelParams {
    int n_t = 2;               ///< transmit antennas
    int n_r = 2;               ///< receive antennas
    double sigma_h2 = 1.0;     ///< per-entry variance of the true channel
    double sigma_hhat2 = 1.2;  ///< per-entry variance of the channel estimate
    double f_d = 9.26;         ///< maximum Doppler frequency [Hz]
    double t_block = 1e-3;     ///< fading block duration [s]

    /// Throws DomainError when any invariant is violated.
    void validate() const;

    /// r = sigma_h2 / sigma_hhat2.
    double ratio() const { return sigma_h2 / sigma_hhat2; }

    /// sigma_e2 = sigma_hhat2 - sigma_h2.
    double estimation_error_variance() const { return sigma_hhat2 - sigma_h2; }

    /// Var(Psi) = sigma_h2 (sigma_hhat2 - sigma_h2) / sigma_hhat2.
    double psi_variance() const { return sigma_h2 * (sigma_hhat2 - sigma_h2) / sigma_hhat2; }

    /// n_r * n_t, the number of complex entries per channel matrix.
    int entries() const { return n_r * n_t; }
};

/// alpha = J0(2 pi f_d lag t_block). May be negative for long lags.
double autocorrelation(const ChannelParams &params, double lag_blocks);

/// Draw from the stationary law CN(0, sigma_h2).
ComplexMatrix initial_channel(const ChannelParams &params, RngStream &stream);

/// One AR(1) step: alpha h_prev + sqrt(1 - alpha^2) W, W ~ CN(0, sigma_h2).
ComplexMatrix advance(const ComplexMatrix &h_prev, double alpha, const ChannelParams &params, RngStream &stream);

/// H_hat = H + H_e, H_e ~ CN(0, sigma_hhat2 - sigma_h2). Exact copy when the variances agree.
ComplexMatrix estimate(const ComplexMatrix &h, const ChannelParams &params, RngStream &stream);

struct RegressionParts {
    ComplexMatrix mean_part; ///< (sigma_h2 / sigma_hhat2) H_hat
    double psi_variance;     ///< per-entry variance of Psi = H - mean_part
};

/// Conditional law of H given H_hat: CN(mean_part, psi_variance) entrywise.
RegressionParts regression_decompose(const ComplexMatrix &h_hat, const ChannelParams &params);

struct BlockChannel {
    ComplexMatrix h;
    ComplexMatrix h_hat;
};

struct ChannelTrajectory {
    ChannelParams params;
    std::vector<BlockChannel> blocks;
};

/// Consecutive blocks with one-block AR(1) steps, starting from the stationary law.
ChannelTrajectory generate_trajectory(const ChannelParams &params, std::size_t n_blocks, RngStream &stream);

/// Estimation error variance of a least-squares estimate from orthogonal pilots occupying a
/// fraction pilot_fraction of an l_block-symbol block at per-symbol power amplitude2:
/// sigma_e2 = n_t * noise_variance / (pilot_fraction * l_block * amplitude2).
/// This is a modelling convenience; experiments normally set sigma_hhat2 directly.
double pilot_estimation_error_variance(int n_t, double noise_variance, double pilot_fraction, int l_block,
                                       double amplitude2);

} // namespace dfb
