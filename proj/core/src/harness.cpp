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

#include "dfb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "dfb/error.hpp"
#include "dfb/lloydfb.hpp"
#include "dfb/parallel.hpp"

#ifndef DFB_VERSION
#define DFB_VERSION "0.0.0"
#endif

namespace dfb {

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }

CsvTable start_table(const ExperimentConfig &cfg, std::vector<std::string> header) {
    CsvTable t;
    t.comments.push_back(std::string("dfb ") + DFB_VERSION);
    for (const auto &[k, v] : cfg.describe())
        t.comments.push_back(k + "=" + v);
    t.header = std::move(header);
    return t;
}

std::vector<int> integer_grid(const ExperimentConfig &cfg) {
    std::vector<int> out;
    for (double t : interval_grid(cfg)) {
        const int v = std::max(1, static_cast<int>(std::lround(t)));
        if (out.empty() || out.back() != v)
            out.push_back(v);
    }
    return out;
}

std::uint64_t job_seed(std::uint64_t seed, std::uint64_t tag) {
    RngStream s(seed, tag);
    return s.next_u64();
}

// ---------------------------------------------------------------------------------------------

CsvTable run_fig2(const ExperimentConfig &cfg) {
    const ChannelParams p = cfg.resolved_params();
    CsvTable t = start_table(cfg, {"t_blocks", "c_fb", "x", "alpha", "d_theory"});
    for (double c : cfg.c_fb) {
        try {
            const IntervalOptimum o = optimal_interval(p, c);
            t.comments.push_back("optimum c_fb=" + fmt(c) + " x_opt=" + fmt(o.x_opt) + " t_opt_real=" +
                                 fmt(o.t_opt_real) + " t_opt_int=" + fmt(o.t_opt_int) + " d_min=" + fmt(o.d_min));
        } catch (const SolverError &) {
            t.comments.push_back("optimum c_fb=" + fmt(c) + " none");
        }
    }
    for (double c : cfg.c_fb)
        for (double tb : interval_grid(cfg)) {
            const double x = 2.0 * std::numbers::pi * p.f_d * tb * p.t_block;
            t.add_row({fmt(tb), fmt(c), fmt(x), fmt(autocorrelation(p, tb)), fmt(distortion_vs_interval(p, c, tb))});
        }
    return t;
}

CsvTable run_fig3(const ExperimentConfig &cfg) {
    CsvTable t = start_table(cfg, {"alpha", "sigma_e2", "d", "r_min", "r_nondiff"});
    t.comments.push_back("r_nondiff: minimum rate at alpha = 0, i.e. memoryless quantization of the estimate");
    for (double e : cfg.sigma_e2_values)
        for (double d : cfg.d_values) {
            ChannelParams p = cfg.resolved_params();
            p.sigma_hhat2 = p.sigma_h2 + e;
            const double nondiff = min_feedback_rate(p, 0.0, d);
            for (int i = 0; i < cfg.alpha_points; ++i) {
                const double a = static_cast<double>(i) / (cfg.alpha_points - 1);
                t.add_row({fmt(a), fmt(e), fmt(d), fmt(min_feedback_rate(p, a, d)), fmt(nondiff)});
            }
        }
    return t;
}

void add_capacity_rows(CsvTable &t, const ExperimentConfig &cfg, int tb, bool explicit_d) {
    const CapacityConfig cap = cfg.capacity_config();
    const double a = autocorrelation(cap.params, tb);
    std::vector<double> ds;
    for (double c : cfg.c_fb) {
        const double reachable = distortion_from_rate(cap.params, a, c * tb);
        if (!(explicit_d && cfg.distortion)) {
            ds.push_back(reachable);
            continue;
        }
        // An explicit distortion must be reachable with the C_fb T bits of one interval.
        if (*cfg.distortion < reachable * (1.0 - 1e-12))
            throw ConfigError("capacity: distortion " + fmt(*cfg.distortion) + " needs " +
                              fmt(min_feedback_rate(cap.params, a, *cfg.distortion)) + " bits, budget is C_fb T = " +
                              fmt(c * tb));
        ds.push_back(*cfg.distortion);
    }
    ErgodicOptions opt;
    opt.mode = cfg.capacity_mode;
    opt.causal = cfg.causal;
    opt.workers = cfg.workers;
    const auto res = ergodic_capacity_sweep(cap, tb, ds, cfg.trials, cfg.seed, opt);
    for (std::size_t k = 0; k < ds.size(); ++k)
        t.add_row({fmt(tb), fmt(cfg.c_fb[k]), fmt(cfg.c_fb[k] * tb), fmt(ds[k]), fmt(res[k].mean),
                   fmt(res[k].std_error)});
}

const std::vector<std::string> kCapacityHeader = {"t_blocks", "c_fb", "r_bits", "d", "capacity", "stderr"};

CsvTable run_fig4(const ExperimentConfig &cfg) {
    CsvTable t = start_table(cfg, kCapacityHeader);
    for (int tb : integer_grid(cfg))
        add_capacity_rows(t, cfg, tb, false);
    return t;
}

CsvTable run_capacity(const ExperimentConfig &cfg) {
    CsvTable t = start_table(cfg, kCapacityHeader);
    add_capacity_rows(t, cfg, cfg.t_blocks, true);
    return t;
}

CsvTable run_rate(const ExperimentConfig &cfg) {
    const ChannelParams p = cfg.resolved_params();
    const double d = cfg.distortion.value_or(0.1);
    CsvTable t = start_table(cfg, {"alpha", "d", "mi_bound", "r_min", "r_nondiff"});
    t.add_row({fmt(cfg.alpha), fmt(d), fmt(mi_lower_bound(p, cfg.alpha, d)), fmt(min_feedback_rate(p, cfg.alpha, d)),
               fmt(min_feedback_rate(p, 0.0, d))});
    return t;
}

CsvTable run_distortion(const ExperimentConfig &cfg) {
    const ChannelParams p = cfg.resolved_params();
    CsvTable t = start_table(cfg, {"alpha", "r_bits", "d", "d_causal"});
    t.add_row({fmt(cfg.alpha), fmt(cfg.r_bits), fmt(distortion_from_rate(p, cfg.alpha, cfg.r_bits)),
               fmt(causal_distortion(p, cfg.alpha, cfg.r_bits))});
    return t;
}

CsvTable run_optimal_interval(const ExperimentConfig &cfg) {
    const ChannelParams p = cfg.resolved_params();
    CsvTable t = start_table(cfg, {"c_fb", "k", "x_opt", "t_opt_real", "t_opt_int", "d_min"});
    for (double c : cfg.c_fb) {
        const IntervalOptimum o = optimal_interval(p, c);
        t.add_row({fmt(c), fmt(o.k), fmt(o.x_opt), fmt(o.t_opt_real), fmt(o.t_opt_int), fmt(o.d_min)});
    }
    return t;
}

// ---------------------------------------------------------------------------------------------
// Lloyd scenarios
// ---------------------------------------------------------------------------------------------

const std::vector<std::string> kLloydHeader = {
    "t_blocks",      "c_fb",          "r_bits",           "capacity_theory",   "stderr_theory",
    "capacity_lloyd", "stderr_lloyd", "epoch_distortion", "heldout_distortion", "distortion_bound",
    "training_distortion", "lloyd_iterations", "history_monotone"};

struct LloydJob {
    int t_blocks;
    std::size_t c_index;
    int rate_bits;
    Codebook codebook;
    double heldout = 0.0;
    bool monotone = true;
};

bool histories_monotone(const std::vector<std::vector<double>> &histories) {
    for (const auto &h : histories)
        for (std::size_t i = 1; i < h.size(); ++i)
            if (h[i] > h[i - 1])
                return false;
    return true;
}

void prepare_job(const ExperimentConfig &cfg, LloydJob &job, const Codebook *preset) {
    const ChannelParams p = cfg.resolved_params();
    const std::uint64_t tag = (static_cast<std::uint64_t>(job.t_blocks) << 16) | job.c_index;
    if (preset) {
        job.codebook = *preset;
    } else {
        BootstrapOptions opt;
        opt.lloyd.max_iters = cfg.lloyd_max_iters;
        opt.lloyd.rel_tol = cfg.lloyd_rel_tol;
        opt.lloyd.seed = job_seed(cfg.seed, 0x1000000 + tag);
        opt.rounds = cfg.bootstrap_rounds;
        opt.samples_per_cell = cfg.samples_per_cell;
        opt.warmup_epochs = cfg.warmup_epochs;
        std::vector<std::vector<double>> histories;
        job.codebook = train_differential_codebook(p, job.t_blocks, job.rate_bits, opt, &histories);
        job.monotone = histories_monotone(histories);
    }
    const auto heldout = closed_loop_differentials(p, job.t_blocks, job.codebook, cfg.heldout_samples,
                                                   cfg.warmup_epochs, job_seed(cfg.seed, 0x2000000 + tag));
    job.heldout = codebook_distortion(heldout, job.codebook);
}

void add_lloyd_row(CsvTable &t, const ExperimentConfig &cfg, const LloydJob &job) {
    const CapacityConfig cap = cfg.capacity_config();
    const double c = cfg.c_fb[job.c_index];
    const FeedbackBudget budget{c, static_cast<double>(job.rate_bits), job.t_blocks};
    const std::uint64_t tag = (static_cast<std::uint64_t>(job.t_blocks) << 16) | job.c_index;
    const std::uint64_t session_seed = job_seed(cfg.seed, 0x3000000 + tag);

    std::vector<double> caps(cfg.trials), errs(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t i) {
        const SessionSummary s =
            summarize_feedback_session(cap, budget, job.codebook, cfg.session_epochs, cfg.warmup_epochs, session_seed, i);
        caps[i] = s.capacity;
        errs[i] = s.epoch_error;
    });
    const MeanStderr lloyd = mean_and_stderr(caps);
    const MeanStderr err = mean_and_stderr(errs);

    const double a = autocorrelation(cap.params, job.t_blocks);
    const double d_theory = distortion_from_rate(cap.params, a, c * job.t_blocks);
    ErgodicOptions opt;
    opt.workers = cfg.workers;
    opt.causal = cfg.causal;
    const double ds[1] = {d_theory};
    const ErgodicResult theory = ergodic_capacity_sweep(cap, job.t_blocks, ds, cfg.trials, cfg.seed, opt).front();

    t.add_row({fmt(job.t_blocks), fmt(c), fmt(job.rate_bits), fmt(theory.mean), fmt(theory.std_error), fmt(lloyd.mean),
               fmt(lloyd.std_error), fmt(err.mean), fmt(job.heldout),
               fmt(distortion_from_rate(cap.params, a, job.rate_bits)), fmt(job.codebook.meta.final_distortion),
               fmt(job.codebook.meta.iterations), fmt(job.monotone ? 1 : 0)});
}

void save_codebook(const ExperimentConfig &cfg, const LloydJob &job) {
    if (cfg.codebook_out.empty())
        return;
    std::filesystem::create_directories(cfg.codebook_out);
    const auto path = std::filesystem::path(cfg.codebook_out) /
                      ("codebook_T" + std::to_string(job.t_blocks) + "_R" + std::to_string(job.rate_bits) + "_c" +
                       std::to_string(job.c_index) + ".txt");
    write_codebook(job.codebook, path.string());
}

CsvTable run_lloyd(const ExperimentConfig &cfg, const std::vector<int> &intervals) {
    CsvTable t = start_table(cfg, kLloydHeader);
    std::optional<Codebook> preset;
    if (!cfg.codebook_in.empty()) {
        preset = read_codebook(cfg.codebook_in);
        if (params_hash(preset->meta.params) != params_hash(cfg.resolved_params()))
            throw ConfigError("lloyd-sim: codebook was trained for different channel parameters");
        if (cfg.c_fb.size() != 1 || intervals.size() != 1 || intervals.front() != preset->meta.t_blocks)
            throw ConfigError("lloyd-sim: a loaded codebook needs one c_fb and t_blocks equal to its interval");
    }

    std::vector<LloydJob> jobs;
    for (int tb : intervals)
        for (std::size_t ci = 0; ci < cfg.c_fb.size(); ++ci) {
            const int r = preset ? preset->rate_bits : lloyd_rate_bits(cfg.c_fb[ci], tb, cfg.max_rate_bits);
            if (r < 1)
                continue;
            if (r > cfg.c_fb[ci] * tb + 1e-9)
                throw ConfigError("lloyd-sim: codebook rate exceeds C_fb T");
            jobs.push_back(LloydJob{tb, ci, r, {}, 0.0, true});
        }
    if (jobs.empty())
        throw ConfigError("lloyd: no interval carries at least one bit per feedback event");

    // Codebooks for different intervals train concurrently; each job is deterministic on its own.
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) { prepare_job(cfg, jobs[j], preset ? &*preset : nullptr); });
    for (const auto &job : jobs) {
        save_codebook(cfg, job);
        add_lloyd_row(t, cfg, job);
    }
    return t;
}

} // namespace

std::vector<double> interval_grid(const ExperimentConfig &cfg) {
    std::vector<double> out;
    if (!cfg.t_list.empty()) {
        for (int t : cfg.t_list)
            out.push_back(t);
        return out;
    }
    if (cfg.t_points >= 2) {
        const double lo = std::log(cfg.t_min), hi = std::log(cfg.t_max);
        for (int i = 0; i < cfg.t_points; ++i)
            out.push_back(std::exp(lo + (hi - lo) * i / (cfg.t_points - 1)));
        return out;
    }
    for (double t = std::ceil(cfg.t_min); t <= cfg.t_max + 1e-9; t += 1.0)
        out.push_back(t);
    return out;
}

int lloyd_rate_bits(double c_fb, int t_blocks, int max_rate_bits) {
    const double budget = c_fb * t_blocks;
    const double nearest = std::round(budget);
    const int whole = std::abs(budget - nearest) <= 1e-9 * std::max(1.0, budget) ? static_cast<int>(nearest)
                                                                                  : static_cast<int>(std::floor(budget));
    return std::min(whole, max_rate_bits);
}

CsvTable run_scenario(const ExperimentConfig &cfg) {
    cfg.validate();
    switch (cfg.scenario) {
    case Scenario::fig2:
        return run_fig2(cfg);
    case Scenario::fig3:
        return run_fig3(cfg);
    case Scenario::fig4:
        return run_fig4(cfg);
    case Scenario::fig5:
        return run_lloyd(cfg, integer_grid(cfg));
    case Scenario::rate:
        return run_rate(cfg);
    case Scenario::distortion:
        return run_distortion(cfg);
    case Scenario::optimal_interval:
        return run_optimal_interval(cfg);
    case Scenario::capacity:
        return run_capacity(cfg);
    case Scenario::lloyd_sim:
        return run_lloyd(cfg, {cfg.t_blocks});
    }
    throw ConfigError("unknown scenario");
}

} // namespace dfb
