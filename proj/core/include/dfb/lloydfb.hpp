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

// Differential feedback with Lloyd-trained matrix codebooks.
//
// At every feedback epoch (block index k T) the receiver forms H_d = H_hat - H_bar, sends the index
// of the nearest codeword C_d and updates H_bar += C_d. The transmitter applies the same update
// when the index arrives one interval later, so blocks [(k + 1) T, (k + 2) T) are precoded from the
// reconstruction made at epoch k. Before the first index arrives the transmitter has no CSI and
// uses the isotropic precoder. Both sides start from H_bar = 0.
//
// Session channel: epoch channels H_{kT} follow AR(1) steps with alpha(T). Block kT + j (j > 0) is
// precoded from the reconstruction of epoch k - 1 and is drawn from H_{(k-1)T} with alpha(T + j),
// so its correlation with the channel behind its CSI is J0(2 pi f_d (T + j) t_block), as in
// ergodic_capacity. Blocks of the first interval branch off H_0 with alpha(j).

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfb/capacity.hpp"
#include "dfb/channel.hpp"
#include "dfb/mathcore.hpp"
#include "dfb/ratedist.hpp"

namespace dfb {

inline constexpr int kMaxCodebookBits = 16;

struct TrainingMeta {
    int t_blocks = 1;
    ChannelParams params;
    std::size_t training_size = 0;
    double final_distortion = 0.0; ///< per-entry mean squared error on the training set
    int iterations = 0;
    bool fixed_point = false; ///< the last partition step left every assignment unchanged
};

struct Codebook {
    int rate_bits = 0;
    int n_r = 0;
    int n_t = 0;
    std::vector<ComplexMatrix> entries;
    TrainingMeta meta;

    std::size_t size() const { return entries.size(); }

    /// Throws DomainError unless there are exactly 2^R finite, pairwise distinct n_r x n_t entries.
    void validate() const;
};

struct LloydOptions {
    int max_iters = 200;
    double rel_tol = 1e-4;
    std::uint64_t seed = 1;
};

struct LloydResult {
    Codebook codebook;
    std::vector<double> distortion_history; ///< per-entry training distortion after every partition
};

/// Lloyd iterations on matrix samples, starting from 2^R distinct training samples. Stops when the
/// relative improvement drops below rel_tol, when no assignment changes, or after max_iters.
/// Empty cells are refilled by splitting the cell with the largest total distortion. Throws
/// SolverError if the training distortion ever increases.
LloydResult train_codebook(std::span<const ComplexMatrix> samples, int rate_bits, const LloydOptions &options = {});

struct Quantized {
    std::size_t index = 0;
    const ComplexMatrix *codeword = nullptr;
};

/// Nearest codeword in squared Frobenius distance, lowest index on ties.
Quantized quantize(const ComplexMatrix &h_d, const Codebook &cb);

/// Mean per-entry squared error ||x - C(x)||_F^2 / (n_r n_t) over samples.
double codebook_distortion(std::span<const ComplexMatrix> samples, const Codebook &cb);

struct SessionRecord {
    std::size_t block = 0;
    ComplexMatrix h;
    ComplexMatrix h_hat;
    ComplexMatrix h_bar_tx;              ///< transmitter reconstruction used to precode this block
    std::optional<std::size_t> index;    ///< codeword index sent at this block (epochs only)
    std::optional<double> epoch_error;   ///< ||H_hat - H_bar_rx||^2 / (n_r n_t) right after quantizing
    double tx_error = 0.0;               ///< ||H_hat - H_bar_tx||^2 / (n_r n_t)
    double capacity = 0.0;
};

struct SessionTrace {
    FeedbackBudget budget;
    std::vector<SessionRecord> records;
    std::vector<ComplexMatrix> h_bar_rx; ///< receiver reconstruction after each epoch
    std::vector<ComplexMatrix> h_bar_tx; ///< transmitter reconstruction after each delivery
};

/// Full per-block trace. budget.r_bits must equal cb.rate_bits, budget.t_blocks the codebook's
/// training interval, and R <= C_fb T (ConfigError otherwise). n_blocks >= T.
SessionTrace run_feedback_session(const CapacityConfig &cfg, const FeedbackBudget &budget, const Codebook &cb,
                                  std::size_t n_blocks, std::uint64_t seed);

struct SessionSummary {
    double capacity = 0.0;    ///< mean block capacity after warm-up
    double epoch_error = 0.0; ///< mean epoch quantization error after warm-up
    std::size_t blocks = 0;
    std::size_t epochs = 0;
};

/// Streaming session statistics without the per-block trace. Epochs below warmup_epochs and the
/// blocks they precode are excluded. Trial i uses RngStream(seed, i).
SessionSummary summarize_feedback_session(const CapacityConfig &cfg, const FeedbackBudget &budget,
                                          const Codebook &cb, std::size_t n_epochs, std::size_t warmup_epochs,
                                          std::uint64_t seed, std::uint64_t trial);

/// H_d samples from the Gaussian test-channel model: H_bar_prev quantizes H_hat one interval
/// earlier with distortion_from_rate(alpha(T), R); H_d = H_hat - H_bar_prev.
std::vector<ComplexMatrix> open_loop_differentials(const ChannelParams &params, int t_blocks, int rate_bits,
                                                   std::size_t count, std::uint64_t seed);

/// H_d samples observed at the epochs of closed-loop sessions driven by cb, after warm-up.
std::vector<ComplexMatrix> closed_loop_differentials(const ChannelParams &params, int t_blocks, const Codebook &cb,
                                                     std::size_t count, std::size_t warmup_epochs,
                                                     std::uint64_t seed);

struct BootstrapOptions {
    LloydOptions lloyd;
    int rounds = 3;                   ///< closed-loop retraining rounds after the open-loop start
    std::size_t samples_per_cell = 100;
    std::size_t warmup_epochs = 5;
    /// Train on every sample and its negation. H_d is circularly symmetric, and a zero-mean
    /// training set keeps the count-weighted codeword mean at zero, so the accumulated H_bar does
    /// not drift along a common codeword offset.
    bool mirror = true;
};

/// Open-loop training followed by `rounds` closed-loop retrains on H_d drawn with the current
/// codebook. Every round's Lloyd history is appended to `histories` when given.
Codebook train_differential_codebook(const ChannelParams &params, int t_blocks, int rate_bits,
                                     const BootstrapOptions &options,
                                     std::vector<std::vector<double>> *histories = nullptr);

/// Text serialization, see docs/codebook-format.md.
void write_codebook(const Codebook &cb, const std::string &path);
Codebook read_codebook(const std::string &path);
std::string codebook_to_string(const Codebook &cb);
Codebook codebook_from_string(const std::string &text);

/// 64-bit FNV-1a over a canonical rendering of the channel parameters.
std::uint64_t params_hash(const ChannelParams &params);

} // namespace dfb
