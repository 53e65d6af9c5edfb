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

#include "dfb/lloydfb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dfb/error.hpp"

namespace dfb {

namespace {

using RealMatrix = Eigen::MatrixXd;

// Row-major entries, real part before imaginary part.
void flatten_into(const ComplexMatrix &m, double *out) {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out[k++] = m(i, j).real();
            out[k++] = m(i, j).imag();
        }
}

ComplexMatrix unflatten(const double *in, int rows, int cols) {
    ComplexMatrix m(rows, cols);
    Eigen::Index k = 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            m(i, j) = Complex(in[k], in[k + 1]);
            k += 2;
        }
    return m;
}

// Exact squared distance between column a of x and column b of c.
inline double exact_distance(const RealMatrix &x, Eigen::Index a, const RealMatrix &c, Eigen::Index b) {
    return (x.col(a) - c.col(b)).squaredNorm();
}

// Nearest-centroid partition. Distances are screened with the GEMM expansion
// |x|^2 + |c|^2 - 2 x.c and every candidate within rounding range of the minimum is re-scored
// exactly, so the result equals an exhaustive scan with lowest-index tie breaking.
double assign(const RealMatrix &x, const RealMatrix &c, std::vector<std::size_t> &labels,
              std::vector<double> *point_dist = nullptr) {
    const Eigen::Index n = x.cols();
    const Eigen::Index k = c.cols();
    const Eigen::VectorXd cn = c.colwise().squaredNorm().transpose();
    const double cmax = cn.maxCoeff();
    constexpr Eigen::Index kBlock = 512;
    RealMatrix g;
    CompensatedSum total;
    labels.resize(static_cast<std::size_t>(n));
    if (point_dist)
        point_dist->resize(static_cast<std::size_t>(n));
    for (Eigen::Index start = 0; start < n; start += kBlock) {
        const Eigen::Index len = std::min(kBlock, n - start);
        g.noalias() = c.transpose() * x.middleCols(start, len);
        for (Eigen::Index b = 0; b < len; ++b) {
            const Eigen::Index col = start + b;
            const double xn = x.col(col).squaredNorm();
            double best_approx = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < k; ++i)
                best_approx = std::min(best_approx, xn + cn(i) - 2.0 * g(i, b));
            const double slack = 1e-9 * (xn + cmax) + 1e-300;
            double best = std::numeric_limits<double>::infinity();
            Eigen::Index best_i = 0;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (xn + cn(i) - 2.0 * g(i, b) > best_approx + slack)
                    continue;
                const double dist = exact_distance(x, col, c, i);
                if (dist < best) {
                    best = dist;
                    best_i = i;
                }
            }
            labels[static_cast<std::size_t>(col)] = static_cast<std::size_t>(best_i);
            if (point_dist)
                (*point_dist)[static_cast<std::size_t>(col)] = best;
            total.add(best);
        }
    }
    return total.value();
}

void mirror_samples(std::vector<ComplexMatrix> &samples) {
    const std::size_t n = samples.size();
    samples.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i)
        samples.push_back(-samples[i]);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    RngStream s(seed, tag);
    return s.next_u64();
}

void check_shape(const ComplexMatrix &m, int rows, int cols, const char *what) {
    if (m.rows() != rows || m.cols() != cols)
        throw DomainError(std::string(what) + ": matrix shape mismatch");
}

} // namespace

void Codebook::validate() const {
    if (rate_bits < 1 || rate_bits > kMaxCodebookBits)
        throw DomainError("codebook: rate_bits must be in [1, 16]");
    if (n_r < 1 || n_t < 1)
        throw DomainError("codebook: antenna counts must be positive");
    if (entries.size() != (std::size_t{1} << rate_bits))
        throw DomainError("codebook: entry count must be 2^rate_bits");
    for (const auto &e : entries) {
        check_shape(e, n_r, n_t, "codebook");
        require_finite(e, "codebook");
    }
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i] == entries[j])
                throw DomainError("codebook: duplicate codewords " + std::to_string(i) + " and " + std::to_string(j));
}

LloydResult train_codebook(std::span<const ComplexMatrix> samples, int rate_bits, const LloydOptions &options) {
    if (rate_bits < 1 || rate_bits > kMaxCodebookBits)
        throw ConfigError("train_codebook: rate_bits must be in [1, 16]");
    if (options.max_iters < 1 || !(options.rel_tol >= 0.0))
        throw ConfigError("train_codebook: max_iters must be >= 1 and rel_tol >= 0");
    const std::size_t k = std::size_t{1} << rate_bits;
    if (samples.size() < k)
        throw DomainError("train_codebook: training set is smaller than the codebook");

    const int rows = static_cast<int>(samples.front().rows());
    const int cols = static_cast<int>(samples.front().cols());
    const Eigen::Index dim = 2 * rows * cols;
    const auto n = static_cast<Eigen::Index>(samples.size());
    const double per_entry = static_cast<double>(samples.size()) * rows * cols;

    RealMatrix x(dim, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        check_shape(samples[i], rows, cols, "train_codebook");
        require_finite(samples[i], "train_codebook");
        flatten_into(samples[i], x.col(i).data());
    }

    // Initial codewords: 2^R distinct samples chosen uniformly (partial Fisher-Yates).
    RngStream stream(options.seed, 0);
    std::vector<std::size_t> perm(samples.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(stream.next_below(perm.size() - i));
        std::swap(perm[i], perm[j]);
    }
    RealMatrix c(dim, static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i)
        c.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(perm[i]));

    LloydResult result;
    std::vector<std::size_t> labels, next_labels;
    std::vector<double> point_dist;
    double prev = assign(x, c, labels, &point_dist);
    result.distortion_history.push_back(prev / per_entry);

    TrainingMeta meta;
    std::vector<std::size_t> counts(k);
    std::vector<double> cell_sse(k);
    for (int it = 1; it <= options.max_iters; ++it) {
        // Centroid step.
        RealMatrix sums = RealMatrix::Zero(dim, static_cast<Eigen::Index>(k));
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::size_t l = labels[static_cast<std::size_t>(i)];
            sums.col(static_cast<Eigen::Index>(l)) += x.col(i);
            ++counts[l];
        }
        for (std::size_t j = 0; j < k; ++j)
            if (counts[j] > 0)
                c.col(static_cast<Eigen::Index>(j)) = sums.col(static_cast<Eigen::Index>(j)) / static_cast<double>(counts[j]);

        // Empty cells: split the cell with the largest total distortion about its new centroid.
        bool repaired = false;
        if (std::find(counts.begin(), counts.end(), std::size_t{0}) != counts.end()) {
            std::fill(cell_sse.begin(), cell_sse.end(), 0.0);
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t l = labels[static_cast<std::size_t>(i)];
                cell_sse[l] += exact_distance(x, i, c, static_cast<Eigen::Index>(l));
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (counts[j] > 0)
                    continue;
                std::size_t donor = k;
                for (std::size_t m = 0; m < k; ++m)
                    if (counts[m] >= 2 && (donor == k || cell_sse[m] > cell_sse[donor]))
                        donor = m;
                if (donor == k)
                    throw SolverError("train_codebook: no cell can be split to fill an empty cell");
                const double spread =
                    1e-3 * std::sqrt(cell_sse[donor] / (static_cast<double>(counts[donor]) * static_cast<double>(dim)));
                for (Eigen::Index r = 0; r < dim; ++r)
                    c(r, static_cast<Eigen::Index>(j)) =
                        c(r, static_cast<Eigen::Index>(donor)) + std::max(spread, 1e-12) * stream.next_normal();
                cell_sse[donor] *= 0.5;
                counts[j] = 1; // placeholder so the donor search skips it
                repaired = true;
            }
        }

        // Partition step.
        const double cur = assign(x, c, next_labels, &point_dist);
        if (cur > prev * (1.0 + 1e-12) + 1e-300)
            throw SolverError("train_codebook: training distortion increased from " + std::to_string(prev / per_entry) +
                              " to " + std::to_string(cur / per_entry) + " at iteration " + std::to_string(it));
        result.distortion_history.push_back(cur / per_entry);
        meta.iterations = it;
        const bool unchanged = next_labels == labels;
        labels.swap(next_labels);
        if (unchanged && !repaired) {
            meta.fixed_point = true;
            prev = cur;
            break;
        }
        const double improvement = prev - cur;
        prev = cur;
        if (!repaired && improvement <= options.rel_tol * cur)
            break;
    }

    Codebook &cb = result.codebook;
    cb.rate_bits = rate_bits;
    cb.n_r = rows;
    cb.n_t = cols;
    cb.entries.reserve(k);
    for (std::size_t j = 0; j < k; ++j)
        cb.entries.push_back(unflatten(c.col(static_cast<Eigen::Index>(j)).data(), rows, cols));
    meta.training_size = samples.size();
    meta.final_distortion = prev / per_entry;
    cb.meta = meta;
    cb.validate();
    return result;
}

Quantized quantize(const ComplexMatrix &h_d, const Codebook &cb) {
    if (cb.entries.empty())
        throw DomainError("quantize: empty codebook");
    check_shape(h_d, cb.n_r, cb.n_t, "quantize");
    Quantized q;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb.entries.size(); ++i) {
        const double dist = (h_d - cb.entries[i]).squaredNorm();
        if (dist < best) {
            best = dist;
            q.index = i;
        }
    }
    q.codeword = &cb.entries[q.index];
    return q;
}

double codebook_distortion(std::span<const ComplexMatrix> samples, const Codebook &cb) {
    if (samples.empty())
        throw DomainError("codebook_distortion: no samples");
    CompensatedSum acc;
    for (const auto &s : samples)
        acc.add((s - *quantize(s, cb).codeword).squaredNorm());
    return acc.value() / (static_cast<double>(samples.size()) * cb.n_r * cb.n_t);
}

// ---------------------------------------------------------------------------------------------
// Feedback sessions
// ---------------------------------------------------------------------------------------------

namespace {

void check_session(const CapacityConfig &cfg, const FeedbackBudget &budget, const Codebook &cb) {
    cfg.validate();
    budget.validate();
    if (budget.r_bits != static_cast<double>(cb.rate_bits))
        throw ConfigError("feedback session: budget bits per event differ from the codebook rate");
    if (budget.t_blocks != cb.meta.t_blocks)
        throw ConfigError("feedback session: codebook was trained for interval " + std::to_string(cb.meta.t_blocks) +
                          ", session uses " + std::to_string(budget.t_blocks));
    if (cb.n_r != cfg.params.n_r || cb.n_t != cfg.params.n_t)
        throw ConfigError("feedback session: codebook shape does not match the antenna configuration");
    if (cb.entries.size() != (std::size_t{1} << cb.rate_bits))
        throw ConfigError("feedback session: codebook entry count must be 2^rate_bits");
}

struct BlockView {
    std::size_t epoch;
    int offset; // block within the interval
    const ComplexMatrix &h;
    const ComplexMatrix &h_hat;
    const ComplexMatrix &h_bar_tx;
    const Precoder &precoder;
    std::optional<std::size_t> index;
    std::optional<double> epoch_error;
    const ComplexMatrix &h_bar_rx;
};

// Drives the receiver/transmitter pair for n_epochs intervals and hands every block to visit().
template <class Visit>
void drive_session(const CapacityConfig &cfg, int t, const Codebook &cb, std::size_t n_epochs, RngStream &stream,
                   Visit &&visit) {
    const ChannelParams &prm = cfg.params;
    const double inv_entries = 1.0 / prm.entries();
    std::vector<double> alphas(2 * static_cast<std::size_t>(t));
    for (int j = 0; j < 2 * t; ++j)
        alphas[static_cast<std::size_t>(j)] = autocorrelation(prm, j);

    ComplexMatrix h_epoch, h_prev_epoch;
    ComplexMatrix h_bar_rx = ComplexMatrix::Zero(prm.n_r, prm.n_t);
    ComplexMatrix h_bar_tx = h_bar_rx;
    ComplexMatrix pending = h_bar_rx; // reconstruction travelling over the feedback link
    Precoder precoder = isotropic_precoder(cfg);

    for (std::size_t k = 0; k < n_epochs; ++k) {
        if (k > 0)
            h_prev_epoch = h_epoch;
        h_epoch = k == 0 ? initial_channel(prm, stream) : advance(h_prev_epoch, alphas[t], prm, stream);
        const ComplexMatrix h_hat_epoch = estimate(h_epoch, prm, stream);

        if (k > 0) {
            // Index sent at the previous epoch arrives now.
            h_bar_tx = pending;
            precoder = make_precoder(h_bar_tx, cfg);
        }

        const ComplexMatrix h_d = h_hat_epoch - h_bar_rx;
        const Quantized q = quantize(h_d, cb);
        h_bar_rx += *q.codeword;
        pending = h_bar_rx;
        const double epoch_error = (h_hat_epoch - h_bar_rx).squaredNorm() * inv_entries;

        visit(BlockView{k, 0, h_epoch, h_hat_epoch, h_bar_tx, precoder, q.index, epoch_error, h_bar_rx});
        // Blocks precoded from epoch k - 1 branch off that epoch's channel at lag T + j.
        const ComplexMatrix &base = k == 0 ? h_epoch : h_prev_epoch;
        const std::size_t lag0 = k == 0 ? 0 : static_cast<std::size_t>(t);
        for (int j = 1; j < t; ++j) {
            const ComplexMatrix h = advance(base, alphas[lag0 + static_cast<std::size_t>(j)], prm, stream);
            const ComplexMatrix h_hat = estimate(h, prm, stream);
            visit(BlockView{k, j, h, h_hat, h_bar_tx, precoder, std::nullopt, std::nullopt, h_bar_rx});
        }
    }
}

} // namespace

SessionTrace run_feedback_session(const CapacityConfig &cfg, const FeedbackBudget &budget, const Codebook &cb,
                                  std::size_t n_blocks, std::uint64_t seed) {
    check_session(cfg, budget, cb);
    const auto t = static_cast<std::size_t>(budget.t_blocks);
    if (n_blocks < t)
        throw ConfigError("run_feedback_session: n_blocks must be >= T");
    const double inv_entries = 1.0 / cfg.params.entries();
    const std::size_t n_epochs = (n_blocks + t - 1) / t;

    SessionTrace trace;
    trace.budget = budget;
    trace.records.reserve(n_blocks);
    RngStream stream(seed, 0);
    drive_session(cfg, budget.t_blocks, cb, n_epochs, stream, [&](const BlockView &v) {
        const std::size_t block = v.epoch * t + static_cast<std::size_t>(v.offset);
        if (v.offset == 0) {
            trace.h_bar_rx.push_back(v.h_bar_rx);
            if (v.epoch > 0)
                trace.h_bar_tx.push_back(v.h_bar_tx);
        }
        if (block >= n_blocks)
            return;
        SessionRecord rec;
        rec.block = block;
        rec.h = v.h;
        rec.h_hat = v.h_hat;
        rec.h_bar_tx = v.h_bar_tx;
        rec.index = v.index;
        rec.epoch_error = v.epoch_error;
        rec.tx_error = (v.h_hat - v.h_bar_tx).squaredNorm() * inv_entries;
        rec.capacity = block_capacity(v.h_hat, v.precoder, cfg);
        trace.records.push_back(std::move(rec));
    });
    return trace;
}

SessionSummary summarize_feedback_session(const CapacityConfig &cfg, const FeedbackBudget &budget,
                                          const Codebook &cb, std::size_t n_epochs, std::size_t warmup_epochs,
                                          std::uint64_t seed, std::uint64_t trial) {
    check_session(cfg, budget, cb);
    if (n_epochs <= warmup_epochs)
        throw ConfigError("summarize_feedback_session: n_epochs must exceed warmup_epochs");
    CompensatedSum cap, err;
    SessionSummary out;
    RngStream stream(seed, trial);
    // Blocks of epoch k are precoded from the reconstruction of epoch k - 1, so they count once
    // that reconstruction is itself past warm-up.
    drive_session(cfg, budget.t_blocks, cb, n_epochs, stream, [&](const BlockView &v) {
        if (v.offset == 0 && v.epoch >= warmup_epochs) {
            err.add(*v.epoch_error);
            ++out.epochs;
        }
        if (v.epoch > warmup_epochs) {
            cap.add(block_capacity(v.h_hat, v.precoder, cfg));
            ++out.blocks;
        }
    });
    out.capacity = out.blocks ? cap.value() / static_cast<double>(out.blocks) : 0.0;
    out.epoch_error = out.epochs ? err.value() / static_cast<double>(out.epochs) : 0.0;
    return out;
}

std::vector<ComplexMatrix> open_loop_differentials(const ChannelParams &params, int t_blocks, int rate_bits,
                                                   std::size_t count, std::uint64_t seed) {
    params.validate();
    if (t_blocks < 1 || rate_bits < 0)
        throw DomainError("open_loop_differentials: need T >= 1 and R >= 0");
    const double alpha = autocorrelation(params, t_blocks);
    const double d = distortion_from_rate(params, alpha, rate_bits);
    std::vector<ComplexMatrix> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RngStream stream(seed, i);
        const ComplexMatrix h_prev = initial_channel(params, stream);
        const ComplexMatrix h_hat_prev = estimate(h_prev, params, stream);
        const ComplexMatrix h_bar_prev = gaussian_quantize(h_hat_prev, d, params, stream);
        const ComplexMatrix h = advance(h_prev, alpha, params, stream);
        out.push_back(estimate(h, params, stream) - h_bar_prev);
    }
    return out;
}

std::vector<ComplexMatrix> closed_loop_differentials(const ChannelParams &params, int t_blocks, const Codebook &cb,
                                                     std::size_t count, std::size_t warmup_epochs,
                                                     std::uint64_t seed) {
    params.validate();
    if (cb.n_r != params.n_r || cb.n_t != params.n_t)
        throw ConfigError("closed_loop_differentials: codebook shape does not match the antenna configuration");
    constexpr std::size_t kChains = 64;
    const std::size_t per_chain = (count + kChains - 1) / kChains;
    const double alpha = autocorrelation(params, t_blocks);
    std::vector<ComplexMatrix> out;
    out.reserve(per_chain * kChains);
    for (std::size_t chain = 0; chain < kChains && out.size() < count; ++chain) {
        RngStream stream(seed, chain);
        ComplexMatrix h = initial_channel(params, stream);
        ComplexMatrix h_bar = ComplexMatrix::Zero(params.n_r, params.n_t);
        for (std::size_t k = 0; k < warmup_epochs + per_chain; ++k) {
            if (k > 0)
                h = advance(h, alpha, params, stream);
            const ComplexMatrix h_d = estimate(h, params, stream) - h_bar;
            if (k >= warmup_epochs)
                out.push_back(h_d);
            h_bar += *quantize(h_d, cb).codeword;
        }
    }
    out.resize(count);
    return out;
}

Codebook train_differential_codebook(const ChannelParams &params, int t_blocks, int rate_bits,
                                     const BootstrapOptions &options, std::vector<std::vector<double>> *histories) {
    params.validate();
    if (t_blocks < 1)
        throw ConfigError("train_differential_codebook: T must be >= 1");
    if (rate_bits < 1 || rate_bits > kMaxCodebookBits)
        throw ConfigError("train_differential_codebook: rate_bits must be in [1, 16]");
    if (options.rounds < 0 || options.samples_per_cell < 100)
        throw ConfigError("train_differential_codebook: need rounds >= 0 and at least 100 samples per cell");
    const std::size_t n = options.samples_per_cell << rate_bits;
    const std::uint64_t seed = options.lloyd.seed;

    LloydOptions lloyd = options.lloyd;
    lloyd.seed = derive_seed(seed, 1000);
    auto samples = open_loop_differentials(params, t_blocks, rate_bits, n, derive_seed(seed, 0));
    if (options.mirror)
        mirror_samples(samples);
    LloydResult res = train_codebook(samples, rate_bits, lloyd);
    if (histories)
        histories->push_back(res.distortion_history);
    res.codebook.meta.t_blocks = t_blocks;
    for (int round = 1; round <= options.rounds; ++round) {
        samples = closed_loop_differentials(params, t_blocks, res.codebook, n, options.warmup_epochs,
                                            derive_seed(seed, static_cast<std::uint64_t>(round)));
        if (options.mirror)
            mirror_samples(samples);
        lloyd.seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(round));
        res = train_codebook(samples, rate_bits, lloyd);
        if (histories)
            histories->push_back(res.distortion_history);
    }
    res.codebook.meta.t_blocks = t_blocks;
    res.codebook.meta.params = params;
    return std::move(res.codebook);
}

} // namespace dfb
