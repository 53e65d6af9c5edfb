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
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "dfb/error.hpp"
#include "dfb/mathcore.hpp"

namespace {

using dfb::Complex;
using dfb::ComplexMatrix;
using dfb::RngStream;

TEST(Philox, KnownAnswerAllZero) {
    // Philox4x32-10 with zero counter and zero key.
    RngStream s(0, 0);
    EXPECT_EQ(s.next_u32(), 0x6627e8d5u);
    EXPECT_EQ(s.next_u32(), 0xe169c58du);
    EXPECT_EQ(s.next_u32(), 0xbc57ac4cu);
    EXPECT_EQ(s.next_u32(), 0x9b00dbd8u);
}

TEST(RngStream, SameIdsSameSequence) {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i)
        ASSERT_EQ(a.next_u64(), b.next_u64());
    RngStream c(42, 7), d(42, 7);
    for (int i = 0; i < 1001; ++i)
        ASSERT_EQ(c.next_normal(), d.next_normal());
}

TEST(RngStream, DistinctStreamsAndSeedsDiffer) {
    std::set<std::uint64_t> first;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (std::uint64_t id = 0; id < 20; ++id)
            first.insert(RngStream(seed, id).next_u64());
    EXPECT_EQ(first.size(), 400u);
}

TEST(RngStream, SubstreamsAreDeterministicAndDistinct) {
    const RngStream parent(9, 3);
    EXPECT_EQ(parent.substream(5).stream_id(), RngStream(9, 3).substream(5).stream_id());
    EXPECT_NE(parent.substream(5).stream_id(), parent.substream(6).stream_id());
    EXPECT_NE(parent.substream(5).stream_id(), RngStream(9, 4).substream(5).stream_id());
    EXPECT_EQ(parent.substream(5).master_seed(), 9u);
}

TEST(RngStream, UniformMoments) {
    RngStream s(1, 1);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(var, 1.0 / 12.0, 2e-3);
}

TEST(RngStream, NormalMoments) {
    RngStream s(2, 5);
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.next_normal();
        m1 += z;
        m2 += z * z;
        m3 += z * z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m3, 0.0, 4.0 * std::sqrt(15.0 / n));
    EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RngStream, NextBelowStaysInRangeAndCoversIt) {
    RngStream s(3, 0);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto k = s.next_below(7);
        ASSERT_LT(k, 7u);
        ++hits[k];
    }
    for (int h : hits)
        EXPECT_NEAR(h, 10000, 500);
}

TEST(ComplexGaussian, EntryVarianceAndCircularity) {
    RngStream s(4, 0);
    const int n = 50000;
    double power = 0.0, re2 = 0.0, reim = 0.0;
    for (int i = 0; i < n; ++i) {
        const ComplexMatrix m = dfb::sample_complex_gaussian(1, 1, 2.5, s);
        const Complex z = m(0, 0);
        power += std::norm(z);
        re2 += z.real() * z.real();
        reim += z.real() * z.imag();
    }
    EXPECT_NEAR(power / n, 2.5, 4.0 * 2.5 / std::sqrt(n));
    EXPECT_NEAR(re2 / n, 1.25, 4.0 * 1.25 * std::sqrt(2.0 / n));
    EXPECT_NEAR(reim / n, 0.0, 4.0 * 1.25 / std::sqrt(n));
}

TEST(ComplexGaussian, ZeroVarianceConsumesNothing) {
    RngStream a(5, 0), b(5, 0);
    ComplexMatrix m = ComplexMatrix::Ones(2, 3);
    dfb::add_complex_gaussian(m, 0.0, a);
    EXPECT_EQ(m, ComplexMatrix::Ones(2, 3));
    EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(ComplexGaussian, FixedSizeKernelMatchesDynamicDrawOrder) {
    RngStream a(6, 1), b(6, 1);
    ComplexMatrix dyn = ComplexMatrix::Zero(2, 2);
    dfb::add_complex_gaussian(dyn, 4.0, a);
    Eigen::Matrix2cd fixed = Eigen::Matrix2cd::Zero();
    dfb::add_complex_gaussian_to(fixed, std::sqrt(2.0), b);
    EXPECT_LT((dyn - ComplexMatrix(fixed)).norm(), 1e-15);
}

TEST(ComplexGaussian, NegativeVarianceRejected) {
    RngStream s(0, 0);
    EXPECT_THROW(dfb::sample_complex_gaussian(2, 2, -1.0, s), dfb::DomainError);
}

TEST(Bessel, MatchesStandardLibrary) {
    for (double x = 0.0; x <= 60.0; x += 0.0173) {
        ASSERT_NEAR(dfb::bessel_j0(x), std::cyl_bessel_j(0.0, x), 1e-13) << x;
        ASSERT_NEAR(dfb::bessel_j1(x), std::cyl_bessel_j(1.0, x), 1e-13) << x;
    }
    for (double x : {100.0, 250.5, 1e3, 1e4})
        EXPECT_NEAR(dfb::bessel_j0(x), std::cyl_bessel_j(0.0, x), 1e-13) << x;
}

TEST(Bessel, ParityAndDerivative) {
    for (double x : {0.3, 2.4, 7.9, 8.1, 24.9, 25.1, 40.0}) {
        EXPECT_DOUBLE_EQ(dfb::bessel_j0(-x), dfb::bessel_j0(x));
        EXPECT_DOUBLE_EQ(dfb::bessel_j1(-x), -dfb::bessel_j1(x));
        const double h = 1e-5;
        const double fd = (dfb::bessel_j0(x + h) - dfb::bessel_j0(x - h)) / (2 * h);
        EXPECT_NEAR(fd, -dfb::bessel_j1(x), 1e-9) << x;
    }
    EXPECT_EQ(dfb::bessel_j0(0.0), 1.0);
    EXPECT_EQ(dfb::bessel_j1(0.0), 0.0);
    // First zero of J0.
    EXPECT_NEAR(dfb::bessel_j0(2.404825557695773), 0.0, 1e-14);
}

ComplexMatrix random_matrix(int r, int c, std::uint64_t id) {
    RngStream s(11, id);
    return dfb::sample_complex_gaussian(r, c, 1.0, s);
}

TEST(Svd, ReconstructsAndIsUnitary) {
    for (auto [r, c] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{2, 4}, std::pair{4, 4}}) {
        for (std::uint64_t id = 0; id < 20; ++id) {
            const ComplexMatrix m = random_matrix(r, c, id);
            const auto s = dfb::svd(m);
            ASSERT_EQ(s.u.rows(), r);
            ASSERT_EQ(s.v.rows(), c);
            ASSERT_EQ(s.gammas.size(), std::min(r, c));
            ComplexMatrix sigma = ComplexMatrix::Zero(r, c);
            for (int k = 0; k < s.gammas.size(); ++k)
                sigma(k, k) = s.gammas(k);
            EXPECT_LT((s.u * sigma * s.v.adjoint() - m).norm(), 1e-12);
            EXPECT_LT((s.u.adjoint() * s.u - ComplexMatrix::Identity(r, r)).norm(), 1e-12);
            EXPECT_LT((s.v.adjoint() * s.v - ComplexMatrix::Identity(c, c)).norm(), 1e-12);
            for (int k = 1; k < s.gammas.size(); ++k)
                EXPECT_GE(s.gammas(k - 1), s.gammas(k));
        }
    }
}

TEST(HermitianLinearAlgebra, LogDetMatchesEigenvaluesAndSolveInverts) {
    for (std::uint64_t id = 0; id < 20; ++id) {
        const ComplexMatrix m = random_matrix(3, 3, 100 + id);
        const ComplexMatrix a = m * m.adjoint() + 0.5 * ComplexMatrix::Identity(3, 3);
        const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
        double expected = 0.0;
        for (int k = 0; k < 3; ++k)
            expected += std::log2(es.eigenvalues()(k));
        EXPECT_NEAR(dfb::log2_det_hermitian(a), expected, 1e-11);
        const ComplexMatrix b = random_matrix(3, 2, 200 + id);
        EXPECT_LT((a * dfb::hermitian_solve(a, b) - b).norm(), 1e-11);
    }
}

TEST(HermitianLinearAlgebra, NotPositiveDefiniteThrows) {
    ComplexMatrix a = ComplexMatrix::Identity(2, 2);
    a(1, 1) = -1.0;
    EXPECT_THROW(dfb::log2_det_hermitian(a), dfb::SolverError);
}

TEST(CompensatedSum, RecoversCancelledTerms) {
    dfb::CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1.0);
}

TEST(MeanStderr, MatchesDirectFormula) {
    const std::vector<double> x = {1.0, 2.0, 4.0, 8.0, 16.0};
    const auto r = dfb::mean_and_stderr(x);
    const double mean = 31.0 / 5.0;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    EXPECT_DOUBLE_EQ(r.mean, mean);
    EXPECT_NEAR(r.std_error, std::sqrt(ss / 4.0 / 5.0), 1e-14);
    EXPECT_EQ(r.count, 5u);
}

TEST(RequireFinite, RejectsNan) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    EXPECT_NO_THROW(dfb::require_finite(m, "m"));
    m(1, 0) = Complex(std::nan(""), 0.0);
    EXPECT_THROW(dfb::require_finite(m, "m"), dfb::DomainError);
}

} // namespace
