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

#include "dfb/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "dfb/error.hpp"
#include "dfb/parallel.hpp"

namespace dfb {

int PowerAllocation::active_modes() const {
    return static_cast<int>(std::count_if(z2.begin(), z2.end(), [](double z) { return z > 0.0; }));
}

PowerAllocation waterfill(std::span<const double> gammas, double amplitude2, int n_t) {
    if (!(amplitude2 > 0.0))
        throw DomainError("waterfill: amplitude2 must be > 0");
    if (n_t < 1 || gammas.size() > static_cast<std::size_t>(n_t))
        throw DomainError("waterfill: need at most n_t singular values");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] >= 0.0) || !std::isfinite(gammas[i]))
            throw DomainError("waterfill: singular values must be finite and >= 0");
        if (i > 0 && gammas[i] > gammas[i - 1])
            throw DomainError("waterfill: singular values must be sorted descending");
    }

    std::size_t active = 0;
    while (active < gammas.size() && gammas[active] > 0.0)
        ++active;
    if (active == 0)
        throw DomainError("waterfill: all singular values are zero");

    std::vector<double> inv(active);
    for (std::size_t i = 0; i < active; ++i)
        inv[i] = 1.0 / (gammas[i] * gammas[i] * amplitude2);

    double mu = 0.0;
    for (;;) {
        double sum_inv = 0.0;
        for (std::size_t i = 0; i < active; ++i)
            sum_inv += inv[i];
        mu = (n_t + sum_inv) / static_cast<double>(active);
        // The weakest active mode has the largest 1/(gamma^2 A^2).
        if (mu - inv[active - 1] > 0.0 || active == 1)
            break;
        --active;
    }

    PowerAllocation out;
    out.amplitude2 = amplitude2;
    out.mu = mu;
    out.z2.assign(n_t, 0.0);
    for (std::size_t i = 0; i < active; ++i)
        out.z2[i] = mu - inv[i];
    return out;
}

void CapacityConfig::validate() const {
    params.validate();
    if (l_block <= params.n_t)
        throw DomainError("CapacityConfig: l_block must exceed n_t");
    if (!std::isfinite(snr_db))
        throw DomainError("CapacityConfig: snr_db must be finite");
    if (!(noise_variance > 0.0))
        throw DomainError("CapacityConfig: noise_variance must be > 0");
}

double CapacityConfig::amplitude2() const {
    return std::pow(10.0, snr_db / 10.0) * noise_variance / (params.n_t * params.sigma_h2);
}

Precoder isotropic_precoder(const CapacityConfig &cfg) {
    const int n_t = cfg.params.n_t;
    Precoder p;
    p.vz = ComplexMatrix::Identity(n_t, n_t);
    p.allocation.z2.assign(n_t, 1.0);
    p.allocation.amplitude2 = cfg.amplitude2();
    p.allocation.mu = 0.0;
    p.isotropic = true;
    return p;
}

Precoder make_precoder(const ComplexMatrix &h_bar, const CapacityConfig &cfg) {
    if (h_bar.rows() != cfg.params.n_r || h_bar.cols() != cfg.params.n_t)
        throw DomainError("make_precoder: H_bar shape does not match n_r x n_t");
    const SvdResult dec = svd(h_bar);
    if (dec.gammas.size() == 0 || !(dec.gammas(0) > 0.0))
        return isotropic_precoder(cfg);
    Precoder p;
    p.allocation = waterfill(std::span<const double>(dec.gammas.data(), static_cast<std::size_t>(dec.gammas.size())),
                             cfg.amplitude2(), cfg.params.n_t);
    RealVector z(cfg.params.n_t);
    for (int i = 0; i < cfg.params.n_t; ++i)
        z(i) = std::sqrt(p.allocation.z2[i]);
    p.vz = dec.v * z.asDiagonal();
    return p;
}

ComplexMatrix interference_covariance(const ComplexMatrix &j, const CapacityConfig &cfg) {
    const ChannelParams &prm = cfg.params;
    const double r = prm.ratio();
    const double psi2 = prm.psi_variance();
    const double floor = cfg.noise_variance / cfg.amplitude2() + prm.n_t * psi2;
    ComplexMatrix f = (1.0 - r) * (1.0 - r) * (j * j.adjoint());
    f.diagonal().array() += floor;
    return f;
}

double block_capacity(const ComplexMatrix &h_hat, const Precoder &precoder, const CapacityConfig &cfg) {
    if (h_hat.rows() != cfg.params.n_r || h_hat.cols() != cfg.params.n_t)
        throw DomainError("block_capacity: H_hat shape does not match n_r x n_t");
    const ComplexMatrix j = h_hat * precoder.vz;
    const ComplexMatrix gram = j * j.adjoint();
    const ComplexMatrix f = interference_covariance(j, cfg);
    // det(I + G F^-1) = det(F + G) / det(F), both Hermitian positive definite.
    const double value = log2_det_hermitian(f + gram) - log2_det_hermitian(f);
    return cfg.pilot_factor() * std::max(value, 0.0);
}

double block_capacity(const ComplexMatrix &h_hat, const ComplexMatrix &h_bar, const CapacityConfig &cfg) {
    return block_capacity(h_hat, make_precoder(h_bar, cfg), cfg);
}

namespace {

// log2 det(F + G) - log2 det(F) with G = J J^H and F = floor I + shrink2 G.
template <class Mat>
double capacity_kernel(const Mat &h_hat, const Mat &vz, double floor, double shrink2) {
    const Mat j = h_hat * vz;
    Mat gram = j * j.adjoint();
    if constexpr (Mat::RowsAtCompileTime == 2 && Mat::ColsAtCompileTime == 2) {
        const double g00 = gram(0, 0).real(), g11 = gram(1, 1).real();
        const double g01 = std::norm(gram(0, 1));
        const double f00 = floor + shrink2 * g00, f11 = floor + shrink2 * g11;
        const double det_f = f00 * f11 - shrink2 * shrink2 * g01;
        const double det_fg = (f00 + g00) * (f11 + g11) - (1.0 + shrink2) * (1.0 + shrink2) * g01;
        if (!(det_f > 0.0) || !(det_fg > 0.0))
            throw SolverError("block capacity: interference covariance is not positive definite");
        return std::log2(det_fg / det_f);
    } else {
        Mat f = shrink2 * gram;
        f.diagonal().array() += floor;
        gram += f;
        return log2_det_hermitian(gram) - log2_det_hermitian(f);
    }
}

struct SweepSetup {
    const CapacityConfig *cfg;
    std::span<const double> distortions;
    std::vector<double> alphas;
    int offset;
    double floor;
    double shrink2;
    double factor;
};

template <class Mat>
void run_trial(const SweepSetup &setup, std::uint64_t seed, std::size_t trial, double *out) {
    const ChannelParams &prm = setup.cfg->params;
    const double h_scale = std::sqrt(prm.sigma_h2 / 2.0);
    const double e_var = prm.estimation_error_variance();
    const double e_scale = std::sqrt(e_var / 2.0);
    const std::size_t n_d = setup.distortions.size();
    const auto rows = static_cast<Eigen::Index>(prm.n_r);
    const auto cols = static_cast<Eigen::Index>(prm.n_t);

    RngStream stream(seed, trial);
    // Draw order matches initial_channel, estimate, gaussian_quantize, then advance/estimate per block.
    Mat h0 = Mat::Zero(rows, cols);
    add_complex_gaussian_to(h0, h_scale, stream);
    Mat h_hat0 = h0;
    if (e_var > 0.0)
        add_complex_gaussian_to(h_hat0, e_scale, stream);
    ComplexMatrix unit_noise = ComplexMatrix::Zero(rows, cols);
    add_complex_gaussian_to(unit_noise, std::sqrt(0.5), stream);

    const ComplexMatrix h_hat0_dyn = h_hat0;
    std::vector<Mat> vz(n_d);
    for (std::size_t k = 0; k < n_d; ++k) {
        const ComplexMatrix h_bar = gaussian_quantize_with(h_hat0_dyn, setup.distortions[k], prm, unit_noise);
        vz[k] = make_precoder(h_bar, *setup.cfg).vz;
    }

    std::vector<CompensatedSum> acc(n_d);
    Mat w(rows, cols);
    Mat h_hat(rows, cols);
    const int window = static_cast<int>(setup.alphas.size());
    for (int j = 0; j < window; ++j) {
        if (setup.offset + j == 0) {
            h_hat = h_hat0;
        } else {
            const double a = setup.alphas[j];
            h_hat = a * h0;
            const double innovation = 1.0 - a * a;
            if (innovation > 0.0) {
                w.setZero();
                add_complex_gaussian_to(w, h_scale, stream);
                h_hat += std::sqrt(innovation) * w;
            }
            if (e_var > 0.0)
                add_complex_gaussian_to(h_hat, e_scale, stream);
        }
        for (std::size_t k = 0; k < n_d; ++k)
            acc[k].add(std::max(capacity_kernel(h_hat, vz[k], setup.floor, setup.shrink2), 0.0));
    }
    for (std::size_t k = 0; k < n_d; ++k)
        out[k] = setup.factor * acc[k].value() / window;
}

} // namespace

std::vector<ErgodicResult> ergodic_capacity_sweep(const CapacityConfig &cfg, int t_blocks,
                                                  std::span<const double> distortions, std::size_t trials,
                                                  std::uint64_t seed, const ErgodicOptions &options) {
    cfg.validate();
    if (t_blocks < 1)
        throw DomainError("ergodic_capacity: interval must be >= 1 block");
    if (trials < 1)
        throw DomainError("ergodic_capacity: trials must be >= 1");
    if (distortions.empty())
        throw DomainError("ergodic_capacity: no distortions given");
    for (double d : distortions)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw DomainError("ergodic_capacity: distortion must be finite and >= 0");

    const ChannelParams &prm = cfg.params;
    const bool simulated = options.mode == CapacityMode::simulated;
    const int window = simulated ? t_blocks : 1;

    SweepSetup setup{&cfg, distortions, std::vector<double>(window), (simulated && options.causal) ? t_blocks : 0,
                     cfg.noise_variance / cfg.amplitude2() + prm.n_t * prm.psi_variance(),
                     (1.0 - prm.ratio()) * (1.0 - prm.ratio()), cfg.pilot_factor()};
    for (int j = 0; j < window; ++j)
        setup.alphas[j] = autocorrelation(prm, setup.offset + j);

    const std::size_t n_d = distortions.size();
    std::vector<double> samples(trials * n_d);
    const bool two_by_two = prm.n_r == 2 && prm.n_t == 2;
    parallel_for(trials, options.workers, [&](std::size_t trial) {
        if (two_by_two)
            run_trial<Eigen::Matrix2cd>(setup, seed, trial, samples.data() + trial * n_d);
        else
            run_trial<ComplexMatrix>(setup, seed, trial, samples.data() + trial * n_d);
    });

    std::vector<ErgodicResult> out(n_d);
    std::vector<double> column(trials);
    for (std::size_t k = 0; k < n_d; ++k) {
        for (std::size_t i = 0; i < trials; ++i)
            column[i] = samples[i * n_d + k];
        const MeanStderr stats = mean_and_stderr(column);
        out[k].mean = stats.mean;
        out[k].std_error = stats.std_error;
        out[k].trials = trials;
        if (options.keep_samples)
            out[k].per_trial = column;
    }
    return out;
}

ErgodicResult ergodic_capacity(const CapacityConfig &cfg, const FeedbackBudget &budget, double d, std::size_t trials,
                               std::uint64_t seed, const ErgodicOptions &options) {
    budget.validate();
    const double ds[1] = {d};
    return std::move(ergodic_capacity_sweep(cfg, budget.t_blocks, ds, trials, seed, options).front());
}

} // namespace dfb
