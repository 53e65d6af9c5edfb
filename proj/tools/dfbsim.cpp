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

// dfbsim: command line front end for the dfb scenarios.
//
// Settings are layered: scenario defaults, then --config, then every --set key=value in order,
// then the dedicated flags. Exit codes: 0 success, 2 usage or configuration error, 3 numerical
// failure.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfb/error.hpp"
#include "dfb/harness.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<unsigned> workers;
    std::string out;
    std::string config;
    std::vector<std::string> sets;
};

// Scenario-specific flags, stored as strings and forwarded through apply_setting so they share its
// parsing and validation.
struct Override {
    std::string key;
    std::string value;
};

void add_common(CLI::App *cmd, CommonFlags &flags) {
    cmd->add_option("--seed", flags.seed, "Master seed");
    cmd->add_option("--trials", flags.trials, "Monte Carlo trials per point");
    cmd->add_option("--workers", flags.workers, "Worker threads (results do not depend on it)");
    cmd->add_option("--out", flags.out, "Write the CSV here instead of stdout");
    cmd->add_option("--config", flags.config, "Flat key=value settings file")->check(CLI::ExistingFile);
    cmd->add_option("--set", flags.sets, "Override one setting, key=value (repeatable)");
}

void add_forward(CLI::App *cmd, std::vector<Override> &overrides, const std::string &flag, const std::string &key,
                 const std::string &help) {
    cmd->add_option_function<std::string>(
        flag, [&overrides, key](const std::string &v) { overrides.push_back({key, v}); }, help);
}

dfb::ExperimentConfig build_config(dfb::Scenario scenario, const CommonFlags &flags,
                                   const std::vector<Override> &overrides) {
    dfb::ExperimentConfig cfg = dfb::default_config(scenario);
    if (!flags.config.empty())
        dfb::apply_config_file(cfg, flags.config);
    for (const auto &s : flags.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw dfb::ConfigError("--set expects key=value, got '" + s + "'");
        dfb::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto &o : overrides)
        dfb::apply_setting(cfg, o.key, o.value);
    if (flags.seed)
        cfg.seed = *flags.seed;
    if (flags.trials)
        cfg.trials = *flags.trials;
    if (flags.workers)
        cfg.workers = *flags.workers;
    cfg.validate();
    return cfg;
}

void emit(const dfb::CsvTable &table, const std::string &out) {
    if (out.empty() || out == "-") {
        table.write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(out, std::ios::binary);
    if (!os)
        throw dfb::ConfigError("cannot open '" + out + "' for writing");
    table.write(os);
    if (!os)
        throw dfb::ConfigError("write to '" + out + "' failed");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Differential CSI feedback: rate-distortion, feedback interval and capacity experiments", "dfbsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DFB_VERSION);

    CommonFlags flags;
    std::vector<Override> overrides;

    auto *rate = app.add_subcommand("rate", "Minimum feedback rate for a target distortion");
    add_forward(rate, overrides, "--alpha", "alpha", "Block correlation between feedback events");
    add_forward(rate, overrides, "--d", "distortion", "Per-entry distortion");

    auto *distortion = app.add_subcommand("distortion", "Distortion reachable with R bits, and after ageing");
    add_forward(distortion, overrides, "--alpha", "alpha", "Block correlation between feedback events");
    add_forward(distortion, overrides, "--r-bits", "r_bits", "Bits per feedback event");

    auto *interval = app.add_subcommand("optimal-interval", "Distortion-minimising feedback interval");
    add_forward(interval, overrides, "--c-fb", "c_fb", "Feedback capacity list [bits/block]");

    auto *capacity = app.add_subcommand("capacity", "Ergodic capacity at one feedback interval");
    add_forward(capacity, overrides, "--t-blocks", "t_blocks", "Feedback interval [blocks]");
    add_forward(capacity, overrides, "--c-fb", "c_fb", "Feedback capacity list [bits/block]");
    add_forward(capacity, overrides, "--d", "distortion", "Per-entry distortion (default: from R = C_fb T)");
    add_forward(capacity, overrides, "--mode", "capacity_mode", "simulated or analytic");

    auto *lloyd = app.add_subcommand("lloyd-sim", "Train a differential codebook and run feedback sessions");
    add_forward(lloyd, overrides, "--t-blocks", "t_blocks", "Feedback interval [blocks]");
    add_forward(lloyd, overrides, "--c-fb", "c_fb", "Feedback capacity [bits/block]");
    add_forward(lloyd, overrides, "--codebook-in", "codebook_in", "Load a codebook instead of training");
    add_forward(lloyd, overrides, "--codebook-out", "codebook_out", "Directory for trained codebooks");

    auto *reproduce = app.add_subcommand("reproduce", "Regenerate the data behind one figure");
    std::string figure;
    reproduce->add_option("figure", figure, "fig2, fig3, fig4 or fig5")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));

    for (auto *cmd : {rate, distortion, interval, capacity, lloyd, reproduce})
        add_common(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    std::string name = app.get_subcommands().front()->get_name();
    if (name == "reproduce")
        name = figure;
    const auto scenario = dfb::parse_scenario(name);
    if (!scenario) {
        std::cerr << "dfbsim: unknown scenario '" << name << "'\n";
        return kExitUsage;
    }

    dfb::ExperimentConfig cfg;
    try {
        cfg = build_config(*scenario, flags, overrides);
    } catch (const std::exception &e) {
        std::cerr << "dfbsim: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        emit(dfb::run_scenario(cfg), flags.out);
    } catch (const dfb::ConfigError &e) {
        std::cerr << "dfbsim: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "dfbsim: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
