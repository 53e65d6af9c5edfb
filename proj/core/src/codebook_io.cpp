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
#include <cstdio>
#include <fstream>
#include <locale>
#include <map>
#include <sstream>
#include <string>

#include "dfb/csv.hpp"
#include "dfb/error.hpp"
#include "dfb/lloydfb.hpp"

namespace dfb {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char *kMagic = "dfb-codebook";

std::string hex_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string &s, const std::string &what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("codebook: cannot parse " + what + " value '" + s + "'");
    return v;
}

long long parse_int(const std::string &s, const std::string &what) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("codebook: cannot parse " + what + " value '" + s + "'");
    return v;
}

} // namespace

std::uint64_t params_hash(const ChannelParams &p) {
    const std::string canon = "n_t=" + std::to_string(p.n_t) + ";n_r=" + std::to_string(p.n_r) +
                              ";sigma_h2=" + hex_double(p.sigma_h2) + ";sigma_hhat2=" + hex_double(p.sigma_hhat2) +
                              ";f_d=" + hex_double(p.f_d) + ";t_block=" + hex_double(p.t_block);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string codebook_to_string(const Codebook &cb) {
    cb.validate();
    const ChannelParams &p = cb.meta.params;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(params_hash(p)));
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << kMagic << ' ' << kFormatVersion << '\n';
    os << "rate_bits " << cb.rate_bits << '\n';
    os << "n_r " << cb.n_r << '\n';
    os << "n_t " << cb.n_t << '\n';
    os << "t_blocks " << cb.meta.t_blocks << '\n';
    os << "params_hash " << hash << '\n';
    os << "sigma_h2 " << format_double(p.sigma_h2) << '\n';
    os << "sigma_hhat2 " << format_double(p.sigma_hhat2) << '\n';
    os << "f_d " << format_double(p.f_d) << '\n';
    os << "t_block " << format_double(p.t_block) << '\n';
    os << "training_size " << cb.meta.training_size << '\n';
    os << "final_distortion " << format_double(cb.meta.final_distortion) << '\n';
    os << "iterations " << cb.meta.iterations << '\n';
    os << "fixed_point " << (cb.meta.fixed_point ? 1 : 0) << '\n';
    os << "entries " << cb.entries.size() << '\n';
    for (const auto &e : cb.entries) {
        bool first = true;
        for (Eigen::Index i = 0; i < e.rows(); ++i)
            for (Eigen::Index j = 0; j < e.cols(); ++j) {
                os << (first ? "" : " ") << format_double(e(i, j).real()) << ' ' << format_double(e(i, j).imag());
                first = false;
            }
        os << '\n';
    }
    return os.str();
}

Codebook codebook_from_string(const std::string &text) {
    std::istringstream is(text);
    is.imbue(std::locale::classic());
    std::string magic, token;
    int version = 0;
    if (!(is >> magic >> version) || magic != kMagic)
        throw ConfigError("codebook: missing '" + std::string(kMagic) + "' header");
    if (version != kFormatVersion)
        throw ConfigError("codebook: unsupported format version " + std::to_string(version));

    std::map<std::string, std::string> fields;
    std::string key, value;
    while (is >> key >> value) {
        fields[key] = value;
        if (key == "entries")
            break;
    }
    for (const char *required : {"rate_bits", "n_r", "n_t", "t_blocks", "params_hash", "sigma_h2", "sigma_hhat2",
                                 "f_d", "t_block", "entries"})
        if (!fields.count(required))
            throw ConfigError(std::string("codebook: missing header field '") + required + "'");

    Codebook cb;
    cb.rate_bits = static_cast<int>(parse_int(fields["rate_bits"], "rate_bits"));
    cb.n_r = static_cast<int>(parse_int(fields["n_r"], "n_r"));
    cb.n_t = static_cast<int>(parse_int(fields["n_t"], "n_t"));
    cb.meta.t_blocks = static_cast<int>(parse_int(fields["t_blocks"], "t_blocks"));
    ChannelParams &p = cb.meta.params;
    p.n_r = cb.n_r;
    p.n_t = cb.n_t;
    p.sigma_h2 = parse_double(fields["sigma_h2"], "sigma_h2");
    p.sigma_hhat2 = parse_double(fields["sigma_hhat2"], "sigma_hhat2");
    p.f_d = parse_double(fields["f_d"], "f_d");
    p.t_block = parse_double(fields["t_block"], "t_block");
    if (fields.count("training_size"))
        cb.meta.training_size = static_cast<std::size_t>(parse_int(fields["training_size"], "training_size"));
    if (fields.count("final_distortion"))
        cb.meta.final_distortion = parse_double(fields["final_distortion"], "final_distortion");
    if (fields.count("iterations"))
        cb.meta.iterations = static_cast<int>(parse_int(fields["iterations"], "iterations"));
    if (fields.count("fixed_point"))
        cb.meta.fixed_point = parse_int(fields["fixed_point"], "fixed_point") != 0;

    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(params_hash(p)));
    if (fields["params_hash"] != hash)
        throw ConfigError("codebook: params_hash does not match the stored channel parameters");
    if (cb.rate_bits < 1 || cb.rate_bits > kMaxCodebookBits || cb.n_r < 1 || cb.n_t < 1)
        throw ConfigError("codebook: invalid rate_bits or shape");

    const long long count = parse_int(fields["entries"], "entries");
    if (count != (1ll << cb.rate_bits))
        throw ConfigError("codebook: entry count must be 2^rate_bits");
    cb.entries.reserve(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k) {
        ComplexMatrix m(cb.n_r, cb.n_t);
        for (int i = 0; i < cb.n_r; ++i)
            for (int j = 0; j < cb.n_t; ++j) {
                std::string re, im;
                if (!(is >> re >> im))
                    throw ConfigError("codebook: truncated entry " + std::to_string(k));
                m(i, j) = Complex(parse_double(re, "entry"), parse_double(im, "entry"));
            }
        cb.entries.push_back(std::move(m));
    }
    if (is >> token)
        throw ConfigError("codebook: trailing data after the last entry");
    try {
        cb.validate();
    } catch (const DomainError &e) {
        throw ConfigError(e.what());
    }
    return cb;
}

void write_codebook(const Codebook &cb, const std::string &path) {
    const std::string text = codebook_to_string(cb);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("codebook: cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw ConfigError("codebook: write to '" + path + "' failed");
}

Codebook read_codebook(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("codebook: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return codebook_from_string(ss.str());
}

} // namespace dfb
