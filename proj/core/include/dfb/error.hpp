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

#pragma once

#include <stdexcept>
#include <string>

namespace dfb {

/// Argument outside the mathematical domain of an operation (negative variance, |alpha| > 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical routine failed to produce a result (no bracket, singular matrix).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent user configuration (budget violation, bad key, malformed file).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace dfb
