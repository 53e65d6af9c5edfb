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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dfb/csv.hpp"
#include "dfb/error.hpp"
#include "dfb/harness.hpp"
#include "dfb/lloydfb.hpp"

namespace {

// Global locale with ',' as decimal separator and '.' grouping, built without system locale data.
struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

class ScopedCommaLocale {
public:
    ScopedCommaLocale() : old_(std::locale::global(std::locale(std::locale::classic(), new CommaDecimal))) {}
    ~ScopedCommaLocale() { std::locale::global(old_); }

private:
    std::locale old_;
};

using dfb::ExperimentConfig;
using dfb::Scenario;

TEST(Scenario, NamesRoundTrip) {
    for (Scenario s : {Scenario::fig2, Scenario::fig3, Scenario::fig4, Scenario::fig5, Scenario::rate,
                       Scenario::distortion, Scenario::optimal_interval, Scenario::capacity, Scenario::lloyd_sim})
        EXPECT_EQ(dfb::parse_scenario(dfb::scenario_name(s)), s);
    EXPECT_EQ(dfb::parse_scenario("optimal-interval"), Scenario::optimal_interval);
    EXPECT_EQ(dfb::parse_scenario("lloyd-sim"), Scenario::lloyd_sim);
    EXPECT_FALSE(dfb::parse_scenario("fig9").has_value());
}

TEST(Config, TextParsingWithCommentsAndLists) {
    ExperimentConfig cfg = dfb::default_config(Scenario::capacity);
    dfb::apply_config_text(cfg, "# header\n"
                                "seed = 7\n"
                                "  trials=123   # inline\n"
                                "\n"
                                "c_fb = 0.5, 2\n"
                                "t_list = 3,4,9\n"
                                "sigma_hhat2 = 1.5\n"
                                "capacity_mode = analytic\n"
                                "causal = false\n");
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.trials, 123u);
    EXPECT_EQ(cfg.c_fb, (std::vector<double>{0.5, 2.0}));
    EXPECT_EQ(cfg.t_list, (std::vector<int>{3, 4, 9}));
    EXPECT_DOUBLE_EQ(cfg.params.sigma_hhat2, 1.5);
    EXPECT_EQ(cfg.capacity_mode, dfb::CapacityMode::analytic);
    EXPECT_FALSE(cfg.causal);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RejectsUnknownKeysMalformedLinesAndBadValues) {
    ExperimentConfig cfg;
    EXPECT_THROW(dfb::apply_config_text(cfg, "nonsense = 1\n"), dfb::ConfigError);
    EXPECT_THROW(dfb::apply_config_text(cfg, "seed 7\n"), dfb::ConfigError);
    EXPECT_THROW(dfb::apply_setting(cfg, "trials", "many"), dfb::ConfigError);
    EXPECT_THROW(dfb::apply_setting(cfg, "alpha", "0.5x"), dfb::ConfigError);
    EXPECT_THROW(dfb::apply_setting(cfg, "causal", "maybe"), dfb::ConfigError);
    EXPECT_THROW(dfb::apply_config_file(cfg, "/nonexistent/dfb.cfg"), dfb::ConfigError);
}

TEST(Config, ValidateCatchesInconsistentValues) {
    ExperimentConfig cfg;
    cfg.params.sigma_hhat2 = 0.5;
    EXPECT_THROW(cfg.validate(), dfb::ConfigError);
    cfg = ExperimentConfig{};
    cfg.alpha = 1.5;
    EXPECT_THROW(cfg.validate(), dfb::ConfigError);
    cfg = ExperimentConfig{};
    cfg.session_epochs = 5;
    EXPECT_THROW(cfg.validate(), dfb::ConfigError);
    cfg = ExperimentConfig{};
    cfg.trials = 0;
    EXPECT_THROW(cfg.validate(), dfb::ConfigError);
}

TEST(Config, FileMatchesText) {
    const auto path = std::filesystem::temp_directory_path() / "dfb_harness_test.cfg";
    {
        std::ofstream os(path);
        os << "seed=11\nt_blocks=6\n";
    }
    ExperimentConfig a, b;
    dfb::apply_config_file(a, path.string());
    dfb::apply_config_text(b, "seed=11\nt_blocks=6\n");
    std::filesystem::remove(path);
    EXPECT_EQ(a.describe(), b.describe());
}

TEST(Config, PilotEstimationSetsEstimateVariance) {
    ExperimentConfig cfg;
    cfg.estimation = "pilot";
    cfg.snr_db = 10.0;
    const auto p = cfg.resolved_params();
    const double a2 = 10.0 * cfg.noise_variance / (2 * cfg.params.sigma_h2);
    EXPECT_NEAR(p.sigma_hhat2, 1.0 + 2.0 * 1.0 / (0.1 * 100 * a2), 1e-14);
}

TEST(Grid, IntervalGrids) {
    ExperimentConfig cfg;
    cfg.t_min = 1;
    cfg.t_max = 5;
    EXPECT_EQ(dfb::interval_grid(cfg), (std::vector<double>{1, 2, 3, 4, 5}));
    cfg.t_points = 3;
    cfg.t_max = 100;
    const auto g = dfb::interval_grid(cfg);
    ASSERT_EQ(g.size(), 3u);
    EXPECT_NEAR(g[1], 10.0, 1e-12);
    cfg.t_list = {2, 8};
    EXPECT_EQ(dfb::interval_grid(cfg), (std::vector<double>{2, 8}));
}

TEST(Grid, LloydRateIsWholeBudgetCappedAtMax) {
    EXPECT_EQ(dfb::lloyd_rate_bits(0.5, 2, 8), 1);
    EXPECT_EQ(dfb::lloyd_rate_bits(0.5, 3, 8), 1);
    EXPECT_EQ(dfb::lloyd_rate_bits(0.5, 7, 8), 3);
    EXPECT_EQ(dfb::lloyd_rate_bits(0.5, 32, 8), 8);
    EXPECT_EQ(dfb::lloyd_rate_bits(0.1, 30, 8), 3);
    EXPECT_EQ(dfb::lloyd_rate_bits(0.5, 1, 8), 0);
}

TEST(Csv, FormatAndParse) {
    EXPECT_EQ(dfb::format_double(0.1), "0.1");
    EXPECT_EQ(dfb::format_double(1.0), "1");
    EXPECT_EQ(dfb::format_double(-2.5e-20), "-2.5e-20");
    EXPECT_EQ(dfb::format_double(std::nan("")), "nan");
    EXPECT_EQ(dfb::format_double(-INFINITY), "-inf");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -1e308}) {
        const std::string text = dfb::format_double(v);
        double back = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        EXPECT_EQ(back, v) << text;
    }

    dfb::CsvTable t;
    t.comments = {"note"};
    t.header = {"a", "b"};
    t.add_row({"1", "0.5"});
    EXPECT_EQ(t.to_string(), "# note\na,b\n1,0.5\n");
    EXPECT_EQ(t.numeric_column("b"), std::vector<double>{0.5});
    EXPECT_THROW(t.add_row({"1"}), dfb::DomainError);
    EXPECT_THROW(t.column("c"), dfb::DomainError);
}

TEST(Csv, DecimalPointIndependentOfGlobalLocale) {
    ExperimentConfig cfg = dfb::default_config(Scenario::distortion);
    const std::string reference = dfb::run_scenario(cfg).to_string();
    ScopedCommaLocale comma;
    const std::string again = dfb::run_scenario(cfg).to_string();
    EXPECT_EQ(again, reference);
    EXPECT_NE(again.find("0.9"), std::string::npos);
    std::ostringstream probe;
    probe << 1234.5;
    EXPECT_EQ(probe.str(), "1.234,5") << "the comma locale must be active for this test to mean anything";
}

TEST(Scenarios, ColumnsAndCommentHeader) {
    struct Case {
        Scenario s;
        std::vector<std::string> header;
    };
    const std::vector<Case> cases = {
        {Scenario::rate, {"alpha", "d", "mi_bound", "r_min", "r_nondiff"}},
        {Scenario::distortion, {"alpha", "r_bits", "d", "d_causal"}},
        {Scenario::optimal_interval, {"c_fb", "k", "x_opt", "t_opt_real", "t_opt_int", "d_min"}},
    };
    for (const auto &c : cases) {
        const auto t = dfb::run_scenario(dfb::default_config(c.s));
        EXPECT_EQ(t.header, c.header);
        ASSERT_FALSE(t.comments.empty());
        EXPECT_EQ(t.comments.front().rfind("dfb ", 0), 0u);
        EXPECT_FALSE(t.rows.empty());
    }
}

TEST(Scenarios, RateAndDistortionRowsMatchLibrary) {
    auto cfg = dfb::default_config(Scenario::rate);
    cfg.alpha = 0.7;
    cfg.distortion = 0.2;
    const auto t = dfb::run_scenario(cfg);
    const auto p = cfg.resolved_params();
    EXPECT_EQ(t.numeric_column("r_min")[0], dfb::min_feedback_rate(p, 0.7, 0.2));
    EXPECT_EQ(t.numeric_column("r_nondiff")[0], dfb::min_feedback_rate(p, 0.0, 0.2));

    auto dc = dfb::default_config(Scenario::distortion);
    dc.alpha = 0.8;
    dc.r_bits = 6;
    const auto u = dfb::run_scenario(dc);
    EXPECT_EQ(u.numeric_column("d")[0], dfb::distortion_from_rate(dc.resolved_params(), 0.8, 6));
    EXPECT_EQ(u.numeric_column("d_causal")[0], dfb::causal_distortion(dc.resolved_params(), 0.8, 6));
}

TEST(Scenarios, CapacityRejectsUnreachableDistortion) {
    auto cfg = dfb::default_config(Scenario::capacity);
    cfg.c_fb = {1.0};
    cfg.t_blocks = 2;
    cfg.distortion = 0.01;
    cfg.trials = 5;
    EXPECT_THROW(dfb::run_scenario(cfg), dfb::ConfigError);
    cfg.distortion = 0.9;
    EXPECT_NO_THROW(dfb::run_scenario(cfg));
}

std::string run_with_workers(ExperimentConfig cfg, unsigned workers) {
    cfg.workers = workers;
    return dfb::run_scenario(cfg).to_string();
}

TEST(Determinism, WorkerCountDoesNotChangeOutput) {
    auto fig4 = dfb::default_config(Scenario::fig4);
    fig4.t_max = 6;
    fig4.trials = 200;
    EXPECT_EQ(run_with_workers(fig4, 1), run_with_workers(fig4, 4));

    auto lloyd = dfb::default_config(Scenario::fig5);
    lloyd.t_list = {2, 4, 6};
    lloyd.trials = 8;
    lloyd.session_epochs = 10;
    lloyd.warmup_epochs = 2;
    lloyd.heldout_samples = 500;
    lloyd.bootstrap_rounds = 1;
    EXPECT_EQ(run_with_workers(lloyd, 1), run_with_workers(lloyd, 3));
}

TEST(LloydScenario, CodebookExportAndReload) {
    const auto dir = std::filesystem::temp_directory_path() / "dfb_harness_codebooks";
    std::filesystem::remove_all(dir);
    auto cfg = dfb::default_config(Scenario::lloyd_sim);
    cfg.t_blocks = 3;
    cfg.trials = 4;
    cfg.session_epochs = 8;
    cfg.warmup_epochs = 2;
    cfg.heldout_samples = 300;
    cfg.bootstrap_rounds = 1;
    cfg.codebook_out = dir.string();
    const auto trained = dfb::run_scenario(cfg);
    const auto file = dir / "codebook_T3_R3_c0.txt";
    ASSERT_TRUE(std::filesystem::exists(file));
    const auto cb = dfb::read_codebook(file.string());
    EXPECT_EQ(cb.rate_bits, 3);
    EXPECT_EQ(cb.meta.t_blocks, 3);

    cfg.codebook_out.clear();
    cfg.codebook_in = file.string();
    const auto reloaded = dfb::run_scenario(cfg);
    EXPECT_EQ(reloaded.numeric_column("capacity_lloyd"), trained.numeric_column("capacity_lloyd"));

    cfg.params.f_d = 20.0;
    EXPECT_THROW(dfb::run_scenario(cfg), dfb::ConfigError);
    cfg.params.f_d = 9.26;
    cfg.t_blocks = 4;
    EXPECT_THROW(dfb::run_scenario(cfg), dfb::ConfigError);
    std::filesystem::remove_all(dir);
}

} // namespace
