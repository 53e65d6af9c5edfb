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

#include "dfb/mathcore.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dfb/error.hpp"

namespace dfb {

void require_finite(const ComplexMatrix &m, const char *what) {
    if (!m.allFinite())
        throw DomainError(std::string(what) + ": matrix contains non-finite entries");
}

// ---------------------------------------------------------------------------------------------
// Philox4x32-10
// ---------------------------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi, std::uint32_t &lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
    : seed_(master_seed), stream_(stream_id) {}

RngStream RngStream::substream(std::uint64_t child) const noexcept {
    return RngStream(seed_, splitmix64(stream_ ^ splitmix64(child + 0x632BE59BD9B4E019ull)));
}

void RngStream::refill() noexcept {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = philox4x32_10(ctr, key);
    ++block_;
    used_ = 0;
}

std::uint32_t RngStream::next_u32() noexcept {
    if (used_ == 4)
        refill();
    return buffer_[used_++];
}

std::uint64_t RngStream::next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double RngStream::next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(theta);
    has_spare_ = true;
    return radius * std::cos(theta);
}

std::uint64_t RngStream::next_below(std::uint64_t n) noexcept {
    const std::uint64_t limit = n * (~std::uint64_t{0} / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

// ---------------------------------------------------------------------------------------------
// Complex Gaussian sampling
// ---------------------------------------------------------------------------------------------

void add_complex_gaussian(ComplexMatrix &m, double variance, RngStream &stream) {
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw DomainError("complex Gaussian variance must be finite and >= 0");
    if (variance == 0.0)
        return;
    // Row-major fill order so the stream-to-entry mapping does not depend on storage order.
    add_complex_gaussian_to(m, std::sqrt(variance / 2.0), stream);
}

ComplexMatrix sample_complex_gaussian(int rows, int cols, double variance, RngStream &stream) {
    if (rows < 1 || cols < 1)
        throw DomainError("sample_complex_gaussian: dimensions must be positive");
    ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
    add_complex_gaussian(m, variance, stream);
    return m;
}

// ---------------------------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------------------------

SvdResult svd(const ComplexMatrix &m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return SvdResult{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

double log2_det_hermitian(const ComplexMatrix &a) {
    Eigen::LLT<ComplexMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw SolverError("log2_det_hermitian: matrix is not positive definite");
    const auto &l = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        acc += std::log2(l(i, i).real());
    return 2.0 * acc;
}

ComplexMatrix hermitian_solve(const ComplexMatrix &a, const ComplexMatrix &b) {
    Eigen::LLT<ComplexMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw SolverError("hermitian_solve: matrix is not positive definite");
    return llt.solve(b);
}

// ---------------------------------------------------------------------------------------------
// Accumulation
// ---------------------------------------------------------------------------------------------

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

MeanStderr mean_and_stderr(const std::vector<double> &samples) {
    MeanStderr out;
    out.count = samples.size();
    if (samples.empty())
        return out;
    CompensatedSum sum;
    for (double s : samples)
        sum.add(s);
    out.mean = sum.value() / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        CompensatedSum sq;
        for (double s : samples)
            sq.add((s - out.mean) * (s - out.mean));
        const double var = sq.value() / static_cast<double>(samples.size() - 1);
        out.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return out;
}

} // namespace dfb
