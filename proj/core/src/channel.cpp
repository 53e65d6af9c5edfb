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

#include "dfb/channel.hpp"

#include <cmath>
#include <numbers>

#include "dfb/error.hpp"

namespace dfb {

void ChannelParams::validate() const {
    if (n_t < 1 || n_r < 1)
        throw DomainError("ChannelParams: antenna counts must be >= 1");
    if (!(sigma_h2 > 0.0) || !std::isfinite(sigma_h2))
        throw DomainError("ChannelParams: sigma_h2 must be positive");
    if (!(sigma_hhat2 >= sigma_h2) || !std::isfinite(sigma_hhat2))
        throw DomainError("ChannelParams: sigma_hhat2 must be >= sigma_h2");
    if (!(f_d > 0.0) || !std::isfinite(f_d))
        throw DomainError("ChannelParams: f_d must be positive");
    if (!(t_block > 0.0) || !std::isfinite(t_block))
        throw DomainError("ChannelParams: t_block must be positive");
}

double autocorrelation(const ChannelParams &params, double lag_blocks) {
    if (!(lag_blocks >= 0.0))
        throw DomainError("autocorrelation: lag must be >= 0");
    return bessel_j0(2.0 * std::numbers::pi * params.f_d * lag_blocks * params.t_block);
}

ComplexMatrix initial_channel(const ChannelParams &params, RngStream &stream) {
    return sample_complex_gaussian(params.n_r, params.n_t, params.sigma_h2, stream);
}

ComplexMatrix advance(const ComplexMatrix &h_prev, double alpha, const ChannelParams &params, RngStream &stream) {
    if (!(std::abs(alpha) <= 1.0))
        throw DomainError("advance: |alpha| must be <= 1");
    if (h_prev.rows() != params.n_r || h_prev.cols() != params.n_t)
        throw DomainError("advance: channel shape does not match n_r x n_t");
    ComplexMatrix next = alpha * h_prev;
    const double innovation = 1.0 - alpha * alpha;
    if (innovation > 0.0) {
        ComplexMatrix w = sample_complex_gaussian(params.n_r, params.n_t, params.sigma_h2, stream);
        next += std::sqrt(innovation) * w;
    }
    return next;
}

ComplexMatrix estimate(const ComplexMatrix &h, const ChannelParams &params, RngStream &stream) {
    ComplexMatrix h_hat = h;
    add_complex_gaussian(h_hat, params.estimation_error_variance(), stream);
    return h_hat;
}

RegressionParts regression_decompose(const ComplexMatrix &h_hat, const ChannelParams &params) {
    if (!(params.sigma_hhat2 > 0.0))
        throw DomainError("regression_decompose: sigma_hhat2 must be positive");
    return RegressionParts{params.ratio() * h_hat, params.psi_variance()};
}

ChannelTrajectory generate_trajectory(const ChannelParams &params, std::size_t n_blocks, RngStream &stream) {
    params.validate();
    ChannelTrajectory traj{params, {}};
    traj.blocks.reserve(n_blocks);
    const double alpha = autocorrelation(params, 1.0);
    ComplexMatrix h;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        h = (b == 0) ? initial_channel(params, stream) : advance(h, alpha, params, stream);
        ComplexMatrix h_hat = estimate(h, params, stream);
        traj.blocks.push_back({h, std::move(h_hat)});
    }
    return traj;
}

double pilot_estimation_error_variance(int n_t, double noise_variance, double pilot_fraction, int l_block,
                                       double amplitude2) {
    if (n_t < 1 || !(noise_variance >= 0.0) || !(pilot_fraction > 0.0) || l_block < 1 || !(amplitude2 > 0.0))
        throw DomainError("pilot_estimation_error_variance: invalid arguments");
    return n_t * noise_variance / (pilot_fraction * l_block * amplitude2);
}

} // namespace dfb
