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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dfb/channel.hpp"
#include "dfb/error.hpp"

namespace {

using dfb::ChannelParams;
using dfb::Complex;
using dfb::ComplexMatrix;
using dfb::RngStream;

TEST(ChannelParams, DerivedQuantities) {
    ChannelParams p;
    p.sigma_h2 = 1.0;
    p.sigma_hhat2 = 1.2;
    EXPECT_DOUBLE_EQ(p.ratio(), 1.0 / 1.2);
    EXPECT_NEAR(p.estimation_error_variance(), 0.2, 1e-15);
    EXPECT_NEAR(p.psi_variance(), 1.0 / 6.0, 1e-15);
    EXPECT_EQ(p.entries(), 4);
}

TEST(ChannelParams, ValidationRejectsBadValues) {
    ChannelParams p;
    EXPECT_NO_THROW(p.validate());
    auto bad = p;
    bad.sigma_hhat2 = 0.9;
    EXPECT_THROW(bad.validate(), dfb::DomainError);
    bad = p;
    bad.n_t = 0;
    EXPECT_THROW(bad.validate(), dfb::DomainError);
    bad = p;
    bad.f_d = -1.0;
    EXPECT_THROW(bad.validate(), dfb::DomainError);
    bad = p;
    bad.t_block = 0.0;
    EXPECT_THROW(bad.validate(), dfb::DomainError);
    bad = p;
    bad.sigma_h2 = std::nan("");
    EXPECT_THROW(bad.validate(), dfb::DomainError);
}

TEST(Autocorrelation, IsJ0OfDopplerLag) {
    ChannelParams p;
    for (double lag : {0.0, 1.0, 4.5, 20.0, 100.0}) {
        const double x = 2.0 * std::numbers::pi * p.f_d * lag * p.t_block;
        EXPECT_NEAR(dfb::autocorrelation(p, lag), std::cyl_bessel_j(0.0, x), 1e-14);
    }
    EXPECT_EQ(dfb::autocorrelation(p, 0.0), 1.0);
    EXPECT_THROW(dfb::autocorrelation(p, -1.0), dfb::DomainError);
}

TEST(Advance, EndpointsOfAlpha) {
    ChannelParams p;
    RngStream s(1, 0);
    const ComplexMatrix h = dfb::initial_channel(p, s);
    RngStream a(2, 0), b(2, 0);
    EXPECT_EQ(dfb::advance(h, 1.0, p, a), h);
    EXPECT_EQ(a.next_u64(), b.next_u64()) << "alpha = 1 must not consume draws";
    EXPECT_THROW(dfb::advance(h, 1.01, p, a), dfb::DomainError);
    EXPECT_THROW(dfb::advance(ComplexMatrix::Zero(3, 2), 0.5, p, a), dfb::DomainError);
}

TEST(Advance, PreservesStationaryVarianceAndCorrelation) {
    ChannelParams p;
    p.sigma_h2 = 2.0;
    const double alpha = 0.6;
    const int n = 40000;
    double var = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        RngStream s(3, static_cast<std::uint64_t>(i));
        const ComplexMatrix h0 = dfb::initial_channel(p, s);
        const ComplexMatrix h1 = dfb::advance(h0, alpha, p, s);
        var += h1.squaredNorm() / 4.0;
        cross += (h1.cwiseProduct(h0.conjugate())).sum().real() / 4.0;
    }
    EXPECT_NEAR(var / n, 2.0, 4.0 * 2.0 / std::sqrt(4.0 * n));
    EXPECT_NEAR(cross / n / 2.0, alpha, 0.02);
}

TEST(Estimate, ExactWhenVariancesAgree) {
    ChannelParams p;
    p.sigma_hhat2 = p.sigma_h2;
    RngStream s(4, 0);
    const ComplexMatrix h = dfb::initial_channel(p, s);
    EXPECT_EQ(dfb::estimate(h, p, s), h);
}

TEST(Regression, PsiIsUncorrelatedWithEstimate) {
    ChannelParams p; // sigma_h2 = 1, sigma_hhat2 = 1.2
    const int n = 40000;
    double psi_power = 0.0, cross_re = 0.0;
    for (int i = 0; i < n; ++i) {
        RngStream s(5, static_cast<std::uint64_t>(i));
        const ComplexMatrix h = dfb::initial_channel(p, s);
        const ComplexMatrix h_hat = dfb::estimate(h, p, s);
        const auto parts = dfb::regression_decompose(h_hat, p);
        const ComplexMatrix psi = h - parts.mean_part;
        psi_power += psi.squaredNorm() / 4.0;
        cross_re += psi.cwiseProduct(h_hat.conjugate()).sum().real() / 4.0;
        ASSERT_DOUBLE_EQ(parts.psi_variance, 1.0 / 6.0);
    }
    EXPECT_NEAR(psi_power / n, 1.0 / 6.0, 4.0 * (1.0 / 6.0) / std::sqrt(4.0 * n));
    EXPECT_NEAR(cross_re / n, 0.0, 4.0 * std::sqrt(1.2 / 6.0 / 2.0 / (4.0 * n)));
}

TEST(Trajectory, LengthAndDeterminism) {
    ChannelParams p;
    RngStream a(6, 1), b(6, 1);
    const auto ta = dfb::generate_trajectory(p, 25, a);
    const auto tb = dfb::generate_trajectory(p, 25, b);
    ASSERT_EQ(ta.blocks.size(), 25u);
    for (std::size_t k = 0; k < 25; ++k) {
        EXPECT_EQ(ta.blocks[k].h, tb.blocks[k].h);
        EXPECT_EQ(ta.blocks[k].h_hat, tb.blocks[k].h_hat);
        EXPECT_EQ(ta.blocks[k].h.rows(), 2);
    }
}

TEST(PilotEstimation, Formula) {
    EXPECT_DOUBLE_EQ(dfb::pilot_estimation_error_variance(2, 1.0, 0.1, 100, 0.5), 2.0 / (0.1 * 100 * 0.5));
    EXPECT_THROW(dfb::pilot_estimation_error_variance(2, 1.0, 0.0, 100, 0.5), dfb::DomainError);
}

} // namespace
