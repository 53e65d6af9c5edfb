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

#include "dfb/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dfb/error.hpp"

namespace dfb {

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
        throw DomainError("csv: row has " + std::to_string(row.size()) + " fields, header has " +
                          std::to_string(header.size()));
    rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string &name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw DomainError("csv: no column named '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string &name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto &row : rows) {
        double v = 0.0;
        const std::string &s = row[c];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw DomainError("csv: value '" + s + "' in column '" + name + "' is not numeric");
        out.push_back(v);
    }
    return out;
}

void CsvTable::write(std::ostream &os) const {
    for (const auto &c : comments)
        os << "# " << c << '\n';
    const auto line = [&os](const std::vector<std::string> &fields) {
        for (std::size_t i = 0; i < fields.size(); ++i)
            os << (i ? "," : "") << fields[i];
        os << '\n';
    };
    line(header);
    for (const auto &row : rows)
        line(row);
}

std::string CsvTable::to_string() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

} // namespace dfb
