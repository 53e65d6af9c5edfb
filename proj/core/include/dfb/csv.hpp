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

// Locale-independent CSV tables: '#' comment lines, one header row, '.' decimal separator.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dfb {

/// Shortest decimal text that parses back to exactly v. NaN and infinities print as nan, inf, -inf.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> comments; ///< written as "# <text>"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Appends a row; throws DomainError when the width differs from the header.
    void add_row(std::vector<std::string> row);

    /// Index of a header column; throws DomainError when absent.
    std::size_t column(const std::string &name) const;

    /// Column values parsed as doubles.
    std::vector<double> numeric_column(const std::string &name) const;

    void write(std::ostream &os) const;
    std::string to_string() const;
};

} // namespace dfb
