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

#include <vector>

#include <benchmark/benchmark.h>

#include "dfb/capacity.hpp"
#include "dfb/lloydfb.hpp"
#include "dfb/mathcore.hpp"
#include "dfb/ratedist.hpp"

namespace {

dfb::CapacityConfig config() {
    dfb::CapacityConfig cfg;
    cfg.params = dfb::ChannelParams{};
    return cfg;
}

void BM_BesselJ0(benchmark::State &state) {
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dfb::bessel_j0(x));
        x += 0.37;
        if (x > 40.0)
            x = 0.0;
    }
}
BENCHMARK(BM_BesselJ0);

void BM_Normal(benchmark::State &state) {
    dfb::RngStream s(1, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(s.next_normal());
}
BENCHMARK(BM_Normal);

void BM_Svd(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    dfb::RngStream s(2, 0);
    const dfb::ComplexMatrix m = dfb::sample_complex_gaussian(n, n, 1.0, s);
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::svd(m));
}
BENCHMARK(BM_Svd)->Arg(2)->Arg(4)->Arg(8);

void BM_BlockCapacity(benchmark::State &state) {
    const auto cfg = config();
    dfb::RngStream s(3, 0);
    const dfb::ComplexMatrix h_hat = dfb::sample_complex_gaussian(2, 2, 1.2, s);
    const auto pre = dfb::make_precoder(dfb::sample_complex_gaussian(2, 2, 1.0, s), cfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::block_capacity(h_hat, pre, cfg));
}
BENCHMARK(BM_BlockCapacity);

void BM_ErgodicSweep(benchmark::State &state) {
    const auto cfg = config();
    const int t = static_cast<int>(state.range(0));
    const std::vector<double> ds = {0.3, 0.5, 0.7, 0.9};
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::ergodic_capacity_sweep(cfg, t, ds, 100, 1));
    state.SetItemsProcessed(state.iterations() * 100 * t);
}
BENCHMARK(BM_ErgodicSweep)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_OptimalInterval(benchmark::State &state) {
    const dfb::ChannelParams p;
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::optimal_interval(p, 1.0));
}
BENCHMARK(BM_OptimalInterval)->Unit(benchmark::kMicrosecond);

std::vector<dfb::ComplexMatrix> samples(std::size_t n) {
    dfb::RngStream s(4, 0);
    std::vector<dfb::ComplexMatrix> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(dfb::sample_complex_gaussian(2, 2, 1.0, s));
    return out;
}

void BM_TrainCodebook(benchmark::State &state) {
    const int r = static_cast<int>(state.range(0));
    const auto data = samples(std::size_t{100} << r);
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::train_codebook(data, r));
}
BENCHMARK(BM_TrainCodebook)->Arg(2)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Quantize(benchmark::State &state) {
    const int r = static_cast<int>(state.range(0));
    const auto cb = dfb::train_codebook(samples(std::size_t{100} << r), r, {5, 1e-2, 1}).codebook;
    const auto probes = samples(1024);
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::quantize(probes[i++ & 1023], cb));
}
BENCHMARK(BM_Quantize)->Arg(2)->Arg(5)->Arg(8);

void BM_FeedbackSession(benchmark::State &state) {
    const int t = 4;
    dfb::BootstrapOptions opt;
    opt.rounds = 1;
    const auto cb = dfb::train_differential_codebook(dfb::ChannelParams{}, t, 4, opt);
    const auto cfg = config();
    std::uint64_t trial = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(dfb::summarize_feedback_session(cfg, {1.0, 4.0, t}, cb, 30, 5, 9, trial++));
}
BENCHMARK(BM_FeedbackSession)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
