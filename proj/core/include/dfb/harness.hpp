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

// Experiment configuration and scenario runners. Every scenario returns a long-format CSV table
// whose columns depend on the scenario name only. All randomness derives from (seed, trial index),
// so tables are byte-identical for any worker count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfb/capacity.hpp"
#include "dfb/channel.hpp"
#include "dfb/csv.hpp"
#include "dfb/ratedist.hpp"

namespace dfb {

enum class Scenario { fig2, fig3, fig4, fig5, rate, distortion, optimal_interval, capacity, lloyd_sim };

std::string_view scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

struct ExperimentConfig {
    Scenario scenario = Scenario::fig2;
    ChannelParams params;
    double snr_db = 0.0;
    int l_block = 100;
    double noise_variance = 1.0;
    double pilot_fraction = 0.1;
    /// "direct": sigma_hhat2 as given. "pilot": sigma_hhat2 = sigma_h2 + pilot_estimation_error_variance.
    std::string estimation = "direct";

    std::vector<double> c_fb = {0.5, 1.0, 2.0, 4.0};

    // Interval sweep. An explicit t_list wins over the range.
    double t_min = 1.0;
    double t_max = 100.0;
    int t_points = 0;              ///< log spacing with this many points; 0 steps through integers
    std::vector<int> t_list;

    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;          ///< never affects results

    // Point queries (rate, distortion, capacity, lloyd-sim).
    double alpha = 0.9;
    std::optional<double> distortion; ///< rate / capacity; capacity derives it from R = C_fb T when unset
    double r_bits = 8.0;
    int t_blocks = 4;

    // fig3 grid.
    int alpha_points = 101;
    std::vector<double> d_values = {0.1, 0.2};
    std::vector<double> sigma_e2_values = {0.0, 0.05};

    // Capacity evaluation.
    CapacityMode capacity_mode = CapacityMode::simulated;
    bool causal = true;

    // Lloyd feedback.
    int lloyd_max_iters = 200;
    double lloyd_rel_tol = 1e-4;
    int bootstrap_rounds = 3;
    int max_rate_bits = 8;
    std::size_t samples_per_cell = 100;
    std::size_t session_epochs = 30;
    std::size_t warmup_epochs = 5;
    std::size_t heldout_samples = 20000;
    std::string codebook_in;  ///< lloyd-sim: load instead of training
    std::string codebook_out; ///< directory for trained codebooks, empty to skip

    /// Throws ConfigError on any invalid field.
    void validate() const;

    /// Channel parameters after applying the estimation model.
    ChannelParams resolved_params() const;

    CapacityConfig capacity_config() const;

    /// Resolved settings as key/value pairs in a fixed order (workers excluded).
    std::vector<std::pair<std::string, std::string>> describe() const;
};

/// Scenario defaults: fig2 uses a log-spaced interval grid, fig3 sigma_h2 = 1, fig5 C_fb = 0.5
/// with a sparse integer grid.
ExperimentConfig default_config(Scenario s);

/// Sets one key. Lists are comma separated. Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value);

/// Flat "key = value" text; '#' starts a comment, blank lines are ignored.
void apply_config_text(ExperimentConfig &cfg, const std::string &text);
void apply_config_file(ExperimentConfig &cfg, const std::string &path);

/// The interval grid a sweep scenario visits.
std::vector<double> interval_grid(const ExperimentConfig &cfg);

/// Codebook rate used by the Lloyd scenarios: min(floor(C_fb T), max_rate_bits).
int lloyd_rate_bits(double c_fb, int t_blocks, int max_rate_bits);

CsvTable run_scenario(const ExperimentConfig &cfg);

} // namespace dfb
