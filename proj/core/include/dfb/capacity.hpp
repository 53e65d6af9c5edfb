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

// Closed-loop capacity with a water-filling precoder built from fed-back CSI.
//
// The transmitter decomposes its channel knowledge H_bar = U Sigma V^H and water-fills over the
// singular values; the receiver sees J = H_hat V Z. Residual estimation error acts as extra noise:
//
//   F = (sigma_0^2 / A^2 + n_t sigma_psi^2) I + (1 - r)^2 J J^H,  sigma_psi^2 = r (S - s)
//   C = (L - n_t) / L * log2 det(I + J J^H F^-1)
//
// F is the exact conditional expectation of J_e J_e^H given H_hat under H_e = (1 - r) H_hat - Psi.
//
// SNR convention: SNR = n_t A^2 sigma_h2 / sigma_0^2, so A^2 = SNR sigma_0^2 / (n_t sigma_h2).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dfb/channel.hpp"
#include "dfb/mathcore.hpp"
#include "dfb/ratedist.hpp"

namespace dfb {

struct PowerAllocation {
    std::vector<double> z2; ///< per-eigenmode power weights, length n_t, sum n_t
    double mu = 0.0;        ///< water level
    double amplitude2 = 0.0;

    int active_modes() const;
};

/// Water-filling over descending singular values. Modes beyond gammas.size() (rank deficiency)
/// receive zero power. Throws DomainError if every gamma is zero.
PowerAllocation waterfill(std::span<const double> gammas, double amplitude2, int n_t);

struct CapacityConfig {
    ChannelParams params;
    double snr_db = 0.0;
    int l_block = 100;           ///< symbols per block, including n_t pilot symbols
    double noise_variance = 1.0; ///< sigma_0^2

    void validate() const;
    double amplitude2() const;
    double pilot_factor() const { return static_cast<double>(l_block - params.n_t) / l_block; }
};

struct Precoder {
    ComplexMatrix vz; ///< V diag(z), n_t x n_t
    PowerAllocation allocation;
    bool isotropic = false; ///< no usable CSI: V = I, equal power
};

/// SVD + water-filling on H_bar. An all-zero H_bar yields the isotropic precoder.
Precoder make_precoder(const ComplexMatrix &h_bar, const CapacityConfig &cfg);

Precoder isotropic_precoder(const CapacityConfig &cfg);

/// F for a given J = H_hat V Z.
ComplexMatrix interference_covariance(const ComplexMatrix &j, const CapacityConfig &cfg);

/// Per-block capacity [bits/s/Hz] with a prepared precoder.
double block_capacity(const ComplexMatrix &h_hat, const Precoder &precoder, const CapacityConfig &cfg);

/// Per-block capacity with the precoder derived from h_bar.
double block_capacity(const ComplexMatrix &h_hat, const ComplexMatrix &h_bar, const CapacityConfig &cfg);

enum class CapacityMode {
    /// Quantize once per feedback epoch, age the channel block by block.
    simulated,
    /// Quantize the current block with the caller's effective distortion, no ageing.
    analytic,
};

struct ErgodicOptions {
    CapacityMode mode = CapacityMode::simulated;
    /// CSI quantized at block e reaches the transmitter after the R bits have been sent, i.e. it
    /// drives blocks [e + T, e + 2T). When false it drives [e, e + T).
    bool causal = true;
    unsigned workers = 1;
    bool keep_samples = false;
};

struct ErgodicResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    std::vector<double> per_trial; ///< filled when keep_samples is set
};

/// Monte Carlo ergodic capacity. Trial i uses RngStream(seed, i) only, so results do not depend on
/// the worker count and trials are common random numbers across intervals and distortions.
/// In simulated mode a trial quantizes H_hat at the epoch with E ~ CN(0, d), holds the precoder for
/// T blocks and averages the block capacities over that window. In analytic mode a trial is a
/// single block quantized with distortion d.
ErgodicResult ergodic_capacity(const CapacityConfig &cfg, const FeedbackBudget &budget, double d, std::size_t trials,
                               std::uint64_t seed, const ErgodicOptions &options = {});

/// ergodic_capacity for several distortions at one interval T. Every distortion sees the same
/// channel draws and quantization noise, and entry k equals ergodic_capacity with distortions[k].
std::vector<ErgodicResult> ergodic_capacity_sweep(const CapacityConfig &cfg, int t_blocks,
                                                  std::span<const double> distortions, std::size_t trials,
                                                  std::uint64_t seed, const ErgodicOptions &options = {});

} // namespace dfb
