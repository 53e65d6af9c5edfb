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
#include <string>

#include "dfb/error.hpp"
#include "dfb/mathcore.hpp"

namespace dfb {
namespace {

constexpr double kSeriesLimit = 8.0;
constexpr double kAsymptoticLimit = 25.0;

// Ascending power series. For |x| <= 8 the largest term is ~1e2, which costs at most two digits.
double series_j0(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && std::abs(term) < 1e-18)
            break;
    }
    return sum;
}

double series_j1(double x) {
    const double q = 0.25 * x * x;
    double term = 0.5 * x;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && std::abs(term) < 1e-18)
            break;
    }
    return sum;
}

struct BesselPair {
    double j0;
    double j1;
};

// Miller's backward recurrence normalised with J0 + 2 * sum_k J_2k = 1. x > 0.
BesselPair miller(double x) {
    const int start = 2 * static_cast<int>(std::ceil((x + 50.0) / 2.0));
    double next = 0.0;   // J_{k+1}
    double cur = 1e-30;  // J_k
    double even_sum = 0.0;
    double j1 = 0.0;
    for (int k = start; k >= 1; --k) {
        const double prev = (2.0 * k / x) * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        const int order = k - 1;
        if (order == 1)
            j1 = cur;
        if (order > 0 && order % 2 == 0)
            even_sum += cur;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            next *= 1e-250;
            even_sum *= 1e-250;
            j1 *= 1e-250;
        }
    }
    const double norm = cur + 2.0 * even_sum;
    return {cur / norm, j1 / norm};
}

// Hankel asymptotic expansion, x > 25 so the optimal truncation error is below e^{-2x}.
double hankel(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0;
    double q = 0.0;
    double a = 1.0; // a_k(nu) / x^k with the alternating sign folded in per parity
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (mu - odd * odd) / (static_cast<double>(k) * 8.0 * x);
        if (std::abs(a) > last)
            break;
        last = std::abs(a);
        // k = 1, 2, 3, 4, ... contributes +Q, -P, -Q, +P, ...
        switch (k % 4) {
        case 1: q += a; break;
        case 2: p -= a; break;
        case 3: q -= a; break;
        case 0: p += a; break;
        }
        if (std::abs(a) < 1e-18)
            break;
    }
    const double omega = x - (0.5 * nu + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(omega) - q * std::sin(omega));
}

void require_finite_arg(double x, const char *what) {
    if (!std::isfinite(x))
        throw DomainError(std::string(what) + ": argument must be finite");
}

} // namespace

double bessel_j0(double x) {
    require_finite_arg(x, "bessel_j0");
    const double ax = std::abs(x);
    if (ax <= kSeriesLimit)
        return series_j0(ax);
    if (ax <= kAsymptoticLimit)
        return miller(ax).j0;
    return hankel(0.0, ax);
}

double bessel_j1(double x) {
    require_finite_arg(x, "bessel_j1");
    const double ax = std::abs(x);
    double value;
    if (ax <= kSeriesLimit)
        value = series_j1(ax);
    else if (ax <= kAsymptoticLimit)
        value = miller(ax).j1;
    else
        value = hankel(1.0, ax);
    return x < 0.0 ? -value : value;
}

} // namespace dfb
