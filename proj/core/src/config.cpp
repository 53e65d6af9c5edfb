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

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dfb/error.hpp"
#include "dfb/harness.hpp"
#include "dfb/lloydfb.hpp"

namespace dfb {

namespace {

constexpr std::array<std::pair<Scenario, std::string_view>, 9> kScenarioNames = {{
    {Scenario::fig2, "fig2"},
    {Scenario::fig3, "fig3"},
    {Scenario::fig4, "fig4"},
    {Scenario::fig5, "fig5"},
    {Scenario::rate, "rate"},
    {Scenario::distortion, "distortion"},
    {Scenario::optimal_interval, "optimal-interval"},
    {Scenario::capacity, "capacity"},
    {Scenario::lloyd_sim, "lloyd-sim"},
}};

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ','))
        if (const std::string t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

template <class T>
T parse_number(const std::string &key, const std::string &text) {
    const std::string s = trim(text);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("config: invalid value '" + text + "' for key '" + key + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v))
            throw ConfigError("config: value for '" + key + "' must be finite");
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string &key, const std::string &value) {
    std::vector<T> out;
    for (const auto &item : split_list(value))
        out.push_back(parse_number<T>(key, item));
    if (out.empty())
        throw ConfigError("config: list for '" + key + "' is empty");
    return out;
}

bool parse_bool(const std::string &key, const std::string &value) {
    const std::string v = trim(value);
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    throw ConfigError("config: invalid boolean '" + value + "' for key '" + key + "'");
}

template <class T>
std::string join(const std::vector<T> &values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ';';
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig &, const std::string &, const std::string &)>;

const std::map<std::string, Setter> &setters() {
    static const std::map<std::string, Setter> table = {
        {"n_t", [](auto &c, auto &k, auto &v) { c.params.n_t = parse_number<int>(k, v); }},
        {"n_r", [](auto &c, auto &k, auto &v) { c.params.n_r = parse_number<int>(k, v); }},
        {"sigma_h2", [](auto &c, auto &k, auto &v) { c.params.sigma_h2 = parse_number<double>(k, v); }},
        {"sigma_hhat2", [](auto &c, auto &k, auto &v) { c.params.sigma_hhat2 = parse_number<double>(k, v); }},
        {"f_d", [](auto &c, auto &k, auto &v) { c.params.f_d = parse_number<double>(k, v); }},
        {"t_block", [](auto &c, auto &k, auto &v) { c.params.t_block = parse_number<double>(k, v); }},
        {"snr_db", [](auto &c, auto &k, auto &v) { c.snr_db = parse_number<double>(k, v); }},
        {"l_block", [](auto &c, auto &k, auto &v) { c.l_block = parse_number<int>(k, v); }},
        {"noise_variance", [](auto &c, auto &k, auto &v) { c.noise_variance = parse_number<double>(k, v); }},
        {"pilot_fraction", [](auto &c, auto &k, auto &v) { c.pilot_fraction = parse_number<double>(k, v); }},
        {"estimation",
         [](auto &c, auto &k, auto &v) {
             const std::string s = trim(v);
             if (s != "direct" && s != "pilot")
                 throw ConfigError("config: '" + k + "' must be direct or pilot");
             c.estimation = s;
         }},
        {"c_fb", [](auto &c, auto &k, auto &v) { c.c_fb = parse_list<double>(k, v); }},
        {"t_min", [](auto &c, auto &k, auto &v) { c.t_min = parse_number<double>(k, v); }},
        {"t_max", [](auto &c, auto &k, auto &v) { c.t_max = parse_number<double>(k, v); }},
        {"t_points", [](auto &c, auto &k, auto &v) { c.t_points = parse_number<int>(k, v); }},
        {"t_list", [](auto &c, auto &k, auto &v) { c.t_list = parse_list<int>(k, v); }},
        {"trials", [](auto &c, auto &k, auto &v) { c.trials = parse_number<std::size_t>(k, v); }},
        {"seed", [](auto &c, auto &k, auto &v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"workers", [](auto &c, auto &k, auto &v) { c.workers = parse_number<unsigned>(k, v); }},
        {"alpha", [](auto &c, auto &k, auto &v) { c.alpha = parse_number<double>(k, v); }},
        {"distortion", [](auto &c, auto &k, auto &v) { c.distortion = parse_number<double>(k, v); }},
        {"r_bits", [](auto &c, auto &k, auto &v) { c.r_bits = parse_number<double>(k, v); }},
        {"t_blocks", [](auto &c, auto &k, auto &v) { c.t_blocks = parse_number<int>(k, v); }},
        {"alpha_points", [](auto &c, auto &k, auto &v) { c.alpha_points = parse_number<int>(k, v); }},
        {"d_values", [](auto &c, auto &k, auto &v) { c.d_values = parse_list<double>(k, v); }},
        {"sigma_e2_values", [](auto &c, auto &k, auto &v) { c.sigma_e2_values = parse_list<double>(k, v); }},
        {"capacity_mode",
         [](auto &c, auto &k, auto &v) {
             const std::string s = trim(v);
             if (s == "simulated")
                 c.capacity_mode = CapacityMode::simulated;
             else if (s == "analytic")
                 c.capacity_mode = CapacityMode::analytic;
             else
                 throw ConfigError("config: '" + k + "' must be simulated or analytic");
         }},
        {"causal", [](auto &c, auto &k, auto &v) { c.causal = parse_bool(k, v); }},
        {"lloyd_max_iters", [](auto &c, auto &k, auto &v) { c.lloyd_max_iters = parse_number<int>(k, v); }},
        {"lloyd_rel_tol", [](auto &c, auto &k, auto &v) { c.lloyd_rel_tol = parse_number<double>(k, v); }},
        {"bootstrap_rounds", [](auto &c, auto &k, auto &v) { c.bootstrap_rounds = parse_number<int>(k, v); }},
        {"max_rate_bits", [](auto &c, auto &k, auto &v) { c.max_rate_bits = parse_number<int>(k, v); }},
        {"samples_per_cell",
         [](auto &c, auto &k, auto &v) { c.samples_per_cell = parse_number<std::size_t>(k, v); }},
        {"session_epochs", [](auto &c, auto &k, auto &v) { c.session_epochs = parse_number<std::size_t>(k, v); }},
        {"warmup_epochs", [](auto &c, auto &k, auto &v) { c.warmup_epochs = parse_number<std::size_t>(k, v); }},
        {"heldout_samples",
         [](auto &c, auto &k, auto &v) { c.heldout_samples = parse_number<std::size_t>(k, v); }},
        {"codebook_in", [](auto &c, auto &, auto &v) { c.codebook_in = trim(v); }},
        {"codebook_out", [](auto &c, auto &, auto &v) { c.codebook_out = trim(v); }},
    };
    return table;
}

} // namespace

std::string_view scenario_name(Scenario s) {
    for (const auto &[id, name] : kScenarioNames)
        if (id == s)
            return name;
    return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
    for (const auto &[id, n] : kScenarioNames)
        if (n == name)
            return id;
    return std::nullopt;
}

ExperimentConfig default_config(Scenario s) {
    ExperimentConfig cfg;
    cfg.scenario = s;
    switch (s) {
    case Scenario::fig2:
        cfg.t_min = 0.01;
        cfg.t_max = 1000.0;
        cfg.t_points = 241;
        break;
    case Scenario::fig3:
        cfg.params.sigma_h2 = 1.0;
        break;
    case Scenario::fig5:
        cfg.c_fb = {0.5};
        cfg.t_list = {2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 20, 24, 28, 32};
        cfg.trials = 2000;
        break;
    case Scenario::lloyd_sim:
        cfg.c_fb = {1.0};
        cfg.trials = 1000;
        break;
    default:
        break;
    }
    return cfg;
}

void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value) {
    const auto &table = setters();
    const auto it = table.find(trim(key));
    if (it == table.end())
        throw ConfigError("config: unknown key '" + key + "'");
    it->second(cfg, it->first, value);
}

void apply_config_text(ExperimentConfig &cfg, const std::string &text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not key=value");
        try {
            apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError &e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void apply_config_file(ExperimentConfig &cfg, const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

ChannelParams ExperimentConfig::resolved_params() const {
    ChannelParams p = params;
    if (estimation == "pilot") {
        const double a2 = std::pow(10.0, snr_db / 10.0) * noise_variance / (p.n_t * p.sigma_h2);
        p.sigma_hhat2 = p.sigma_h2 + pilot_estimation_error_variance(p.n_t, noise_variance, pilot_fraction, l_block, a2);
    }
    return p;
}

CapacityConfig ExperimentConfig::capacity_config() const {
    CapacityConfig c;
    c.params = resolved_params();
    c.snr_db = snr_db;
    c.l_block = l_block;
    c.noise_variance = noise_variance;
    return c;
}

void ExperimentConfig::validate() const {
    try {
        resolved_params().validate();
        capacity_config().validate();
    } catch (const DomainError &e) {
        throw ConfigError(e.what());
    }
    if (!(pilot_fraction > 0.0 && pilot_fraction <= 1.0))
        throw ConfigError("config: pilot_fraction must be in (0, 1]");
    if (c_fb.empty())
        throw ConfigError("config: c_fb list is empty");
    for (double c : c_fb)
        if (!(c > 0.0))
            throw ConfigError("config: every c_fb must be > 0");
    if (!(t_min > 0.0) || !(t_max >= t_min))
        throw ConfigError("config: need 0 < t_min <= t_max");
    if (t_points < 0 || t_points == 1)
        throw ConfigError("config: t_points must be 0 or >= 2");
    for (int t : t_list)
        if (t < 1)
            throw ConfigError("config: t_list entries must be >= 1");
    if (trials < 1)
        throw ConfigError("config: trials must be >= 1");
    if (!(std::abs(alpha) <= 1.0))
        throw ConfigError("config: |alpha| must be <= 1");
    if (distortion && !(*distortion > 0.0))
        throw ConfigError("config: distortion must be > 0");
    if (!(r_bits >= 0.0))
        throw ConfigError("config: r_bits must be >= 0");
    if (t_blocks < 1)
        throw ConfigError("config: t_blocks must be >= 1");
    if (alpha_points < 2)
        throw ConfigError("config: alpha_points must be >= 2");
    for (double d : d_values)
        if (!(d > 0.0))
            throw ConfigError("config: d_values must be > 0");
    for (double e : sigma_e2_values)
        if (!(e >= 0.0))
            throw ConfigError("config: sigma_e2_values must be >= 0");
    if (lloyd_max_iters < 1 || !(lloyd_rel_tol >= 0.0))
        throw ConfigError("config: lloyd_max_iters >= 1 and lloyd_rel_tol >= 0 required");
    if (bootstrap_rounds < 0)
        throw ConfigError("config: bootstrap_rounds must be >= 0");
    if (max_rate_bits < 1 || max_rate_bits > kMaxCodebookBits)
        throw ConfigError("config: max_rate_bits must be in [1, 16]");
    if (samples_per_cell < 100)
        throw ConfigError("config: samples_per_cell must be >= 100");
    if (session_epochs <= warmup_epochs + 1)
        throw ConfigError("config: session_epochs must exceed warmup_epochs + 1");
    if (heldout_samples < 1)
        throw ConfigError("config: heldout_samples must be >= 1");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::describe() const {
    const ChannelParams p = resolved_params();
    std::vector<std::pair<std::string, std::string>> out = {
        {"scenario", std::string(scenario_name(scenario))},
        {"seed", std::to_string(seed)},
        {"trials", std::to_string(trials)},
        {"n_t", std::to_string(p.n_t)},
        {"n_r", std::to_string(p.n_r)},
        {"sigma_h2", format_double(p.sigma_h2)},
        {"sigma_hhat2", format_double(p.sigma_hhat2)},
        {"f_d", format_double(p.f_d)},
        {"t_block", format_double(p.t_block)},
        {"snr_db", format_double(snr_db)},
        {"l_block", std::to_string(l_block)},
        {"noise_variance", format_double(noise_variance)},
        {"pilot_fraction", format_double(pilot_fraction)},
        {"estimation", estimation},
        {"c_fb", join(c_fb)},
        {"t_min", format_double(t_min)},
        {"t_max", format_double(t_max)},
        {"t_points", std::to_string(t_points)},
        {"t_list", join(t_list)},
        {"alpha", format_double(alpha)},
        {"distortion", distortion ? format_double(*distortion) : "derived"},
        {"r_bits", format_double(r_bits)},
        {"t_blocks", std::to_string(t_blocks)},
        {"alpha_points", std::to_string(alpha_points)},
        {"d_values", join(d_values)},
        {"sigma_e2_values", join(sigma_e2_values)},
        {"capacity_mode", capacity_mode == CapacityMode::simulated ? "simulated" : "analytic"},
        {"causal", causal ? "true" : "false"},
        {"lloyd_max_iters", std::to_string(lloyd_max_iters)},
        {"lloyd_rel_tol", format_double(lloyd_rel_tol)},
        {"bootstrap_rounds", std::to_string(bootstrap_rounds)},
        {"max_rate_bits", std::to_string(max_rate_bits)},
        {"samples_per_cell", std::to_string(samples_per_cell)},
        {"session_epochs", std::to_string(session_epochs)},
        {"warmup_epochs", std::to_string(warmup_epochs)},
        {"heldout_samples", std::to_string(heldout_samples)},
        {"codebook_in", codebook_in.empty() ? "none" : codebook_in},
    };
    return out;
}

} // namespace dfb
