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

// Numerical primitives shared by every other module:
// - Counter-based random streams (Philox4x32-10) with cheap substream derivation
// - Circularly symmetric complex Gaussian sampling, CN(0, s2) means E|x|^2 = s2
// - Bessel functions J0 and J1 of the first kind
// - Complex SVD, Hermitian log-determinant and solve (Eigen backed)
// - Compensated summation for order-stable Monte Carlo averages

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dfb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Throws DomainError if any entry of m is NaN or infinite.
void require_finite(const ComplexMatrix &m, const char *what);

// ---------------------------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------------------------

/// Deterministic random stream identified by (master_seed, stream_id).
///
/// The generator is Philox4x32-10 keyed with the master seed; the 128-bit counter is split into
/// a 64-bit stream id and a 64-bit block index, so distinct stream ids never share counter space.
/// Identical (master_seed, stream_id) pairs give identical sequences on every platform, provided the
/// C library's log/sqrt/sin/cos are correctly rounded for the normal transform.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    /// Child stream whose id is a hash of (this stream id, child). Children of different parents
    /// or with different child indices are distinct with overwhelming probability.
    RngStream substream(std::uint64_t child) const noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    double next_uniform() noexcept;

    /// Standard normal via Box-Muller; both outputs of each pair are used.
    double next_normal() noexcept;

    /// Uniform integer in [0, n) by rejection, n > 0.
    std::uint64_t next_below(std::uint64_t n) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Matrix of i.i.d. CN(0, variance) entries; each real component carries variance / 2.
ComplexMatrix sample_complex_gaussian(int rows, int cols, double variance, RngStream &stream);

/// Adds CN(0, variance) noise in place; variance 0 leaves m untouched and consumes no draws.
void add_complex_gaussian(ComplexMatrix &m, double variance, RngStream &stream);

/// Same draw order as add_complex_gaussian (row-major, real then imaginary) for any Eigen
/// expression, so fixed-size kernels reproduce the dynamic-size sequence exactly.
template <class Derived>
void add_complex_gaussian_to(Eigen::MatrixBase<Derived> &m, double scale, RngStream &stream) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = stream.next_normal();
            const double im = stream.next_normal();
            m(i, j) += Complex(scale * re, scale * im);
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------------------------

/// J0(x). Power series for |x| <= 8, Miller backward recurrence up to 25, Hankel asymptotics beyond.
double bessel_j0(double x);

/// J1(x) = -J0'(x), same evaluation strategy as bessel_j0.
double bessel_j1(double x);

// ---------------------------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------------------------

struct SvdResult {
    ComplexMatrix u;  ///< rows x rows, unitary
    RealVector gammas; ///< min(rows, cols) singular values, descending
    ComplexMatrix v;  ///< cols x cols, unitary
};

/// Full SVD m = U diag(gammas) V^H.
SvdResult svd(const ComplexMatrix &m);

/// log2 det(A) for Hermitian positive definite A; throws SolverError if A is not PD.
double log2_det_hermitian(const ComplexMatrix &a);

/// Solves A X = B for Hermitian positive definite A.
ComplexMatrix hermitian_solve(const ComplexMatrix &a, const ComplexMatrix &b);

/// Squared Frobenius norm.
inline double frobenius2(const ComplexMatrix &m) { return m.squaredNorm(); }

// ---------------------------------------------------------------------------------------------
// Accumulation
// ---------------------------------------------------------------------------------------------

/// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sample mean and standard error of the mean, accumulated in index order.
struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

MeanStderr mean_and_stderr(const std::vector<double> &samples);

} // namespace dfb
