// SPDX-License-Identifier: Apache-2.0
//
// skyshare: aerial/terrestrial spectrum sharing with massive MIMO
// Copyright (C) 2026 The skyshare authors
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

// Raw CSI capture files: per timestep, M complex gains stored as interleaved
// (I, Q) 16-bit signed fixed-point words, no header. Capture metadata lives in
// a key-value sidecar next to the binary.

#include "csi.hpp"
#include "kvconfig.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <locale>
#include <sstream>
#include <span>
#include <string>
#include <vector>

namespace skyshare {

/// Fixed-point word layout. A raw word r decodes to r / 2^fraction_bits * full_scale.
struct fixed_point_format {
    int fraction_bits = 15;
    bool little_endian = true;
    double full_scale = 1.0;
    std::size_t m_antennas = 64;

    std::size_t record_bytes() const noexcept { return m_antennas * 2 * sizeof(std::int16_t); }
    double lsb() const noexcept { return std::ldexp(full_scale, -fraction_bits); }

    /// Descriptor text such as "q1.15-le" (the default) or "q4.12-be".
    std::string descriptor() const
    {
        return "q" + std::to_string(16 - fraction_bits) + "." + std::to_string(fraction_bits) + (little_endian ? "-le" : "-be");
    }

    void validate() const
    {
        if (m_antennas == 0)
            throw error(errc::format_mismatch, "format declares zero antennas");
        if (fraction_bits < 0 || fraction_bits > 15)
            throw error(errc::format_mismatch, "fraction bits must be in [0, 15]");
        if (!(full_scale > 0.0) || !std::isfinite(full_scale))
            throw error(errc::format_mismatch, "full scale must be positive");
    }
};

inline fixed_point_format parse_fixed_point_format(std::string_view text, std::size_t m_antennas, double full_scale = 1.0)
{
    fixed_point_format f;
    f.m_antennas = m_antennas;
    f.full_scale = full_scale;
    auto t = std::string(kv_config::trim(text));
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto dash = t.find('-');
    const std::string endian = dash == std::string::npos ? "le" : t.substr(dash + 1);
    const std::string q = t.substr(0, dash);
    const auto dot = q.find('.');
    if (q.size() < 4 || q[0] != 'q' || dot == std::string::npos || (endian != "le" && endian != "be"))
        throw error(errc::format_mismatch, "unrecognized fixed-point format '" + std::string(text) + "'");
    const int int_bits = static_cast<int>(kv_config::to_int("format", q.substr(1, dot - 1)));
    f.fraction_bits = static_cast<int>(kv_config::to_int("format", q.substr(dot + 1)));
    if (int_bits + f.fraction_bits != 16 || int_bits < 1)
        throw error(errc::format_mismatch, "fixed-point format must describe 16-bit words: '" + std::string(text) + "'");
    f.little_endian = endian == "le";
    f.validate();
    return f;
}

namespace detail {

inline std::int16_t read_word(const std::byte* p, bool little_endian) noexcept
{
    const auto b0 = std::to_integer<std::uint16_t>(p[0]);
    const auto b1 = std::to_integer<std::uint16_t>(p[1]);
    const std::uint16_t u = little_endian ? static_cast<std::uint16_t>(b0 | (b1 << 8)) : static_cast<std::uint16_t>((b0 << 8) | b1);
    return static_cast<std::int16_t>(u);
}

inline void write_word(std::vector<std::byte>& out, std::int16_t w, bool little_endian)
{
    const auto u = static_cast<std::uint16_t>(w);
    const auto lo = static_cast<std::byte>(u & 0xFF);
    const auto hi = static_cast<std::byte>(u >> 8);
    if (little_endian) {
        out.push_back(lo);
        out.push_back(hi);
    } else {
        out.push_back(hi);
        out.push_back(lo);
    }
}

// Round to nearest, saturating at the word limits.
inline std::int16_t quantize(double value, const fixed_point_format& f) noexcept
{
    const double r = std::nearbyint(value / f.lsb());
    return static_cast<std::int16_t>(std::clamp(r, -32768.0, 32767.0));
}

} // namespace detail

/// Decodes a capture already held in memory. Timesteps are numbered from
/// zero in file order at `interval_ms` spacing.
inline csi_dataset decode_csi(std::span<const std::byte> bytes, const fixed_point_format& format, layer tag = layer::terrestrial,
                              std::int64_t first_index = 0, std::int64_t interval_ms = 1)
{
    format.validate();
    if (bytes.empty())
        throw error(errc::empty_file, "capture contains no data");
    const std::size_t block = format.record_bytes();
    if (bytes.size() % block != 0)
        throw error(errc::truncated_file, std::to_string(bytes.size()) + " bytes is not a multiple of the " + std::to_string(block) +
                                              "-byte record size for M=" + std::to_string(format.m_antennas));

    const std::size_t n = bytes.size() / block;
    const double lsb = format.lsb();
    std::vector<csi_record> records;
    records.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        Eigen::VectorXcd g(static_cast<Eigen::Index>(format.m_antennas));
        const std::byte* p = bytes.data() + t * block;
        for (std::size_t e = 0; e < format.m_antennas; ++e, p += 4) {
            const double i = detail::read_word(p, format.little_endian) * lsb;
            const double q = detail::read_word(p + 2, format.little_endian) * lsb;
            g[static_cast<Eigen::Index>(e)] = {i, q};
        }
        records.push_back(csi_record{first_index + static_cast<std::int64_t>(t), tag, static_cast<std::int64_t>(t) * interval_ms,
                                     std::nullopt, channel_vector(std::move(g))});
    }
    return csi_dataset(std::move(records));
}

/// Encodes the channels of `records` (all of one layer, usually) in file order.
inline std::vector<std::byte> encode_csi(std::span<const csi_record> records, const fixed_point_format& format)
{
    format.validate();
    std::vector<std::byte> out;
    out.reserve(records.size() * format.record_bytes());
    for (const auto& r : records) {
        if (r.channel.m_antennas() != format.m_antennas)
            throw error(errc::format_mismatch, "record has " + std::to_string(r.channel.m_antennas()) + " antennas, format declares " +
                                                   std::to_string(format.m_antennas));
        for (Eigen::Index e = 0; e < r.channel.gains().size(); ++e) {
            detail::write_word(out, detail::quantize(r.channel.gains()[e].real(), format), format.little_endian);
            detail::write_word(out, detail::quantize(r.channel.gains()[e].imag(), format), format.little_endian);
        }
    }
    return out;
}

inline std::vector<std::byte> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw error(errc::io, "cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> out(raw.size());
    std::transform(raw.begin(), raw.end(), out.begin(), [](char c) { return static_cast<std::byte>(c); });
    return out;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw error(errc::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw error(errc::io, "short write to " + path.string());
}

/// Loads a raw capture. The result is not normalized: scale 1, no noise power.
inline csi_dataset load_csi_binary(const std::filesystem::path& path, const fixed_point_format& format, layer tag = layer::terrestrial,
                                   std::int64_t first_index = 0, std::int64_t interval_ms = 1)
{
    const auto bytes = read_file(path);
    try {
        return decode_csi(bytes, format, tag, first_index, interval_ms);
    } catch (const error& e) {
        throw error(e.code(), path.string() + ": " + e.what());
    }
}

/// Sidecar metadata for one capture file.
struct capture_descriptor {
    std::filesystem::path file; // relative paths resolve against the sidecar's directory
    fixed_point_format format;
    layer tag = layer::terrestrial;
    double altitude_m = 0.0;
    std::int64_t interval_ms = 1;

    kv_config to_config() const
    {
        kv_config c;
        c.set("file", file.generic_string());
        c.set("m-antennas", std::to_string(format.m_antennas));
        c.set("format", format.descriptor());
        c.set("full-scale", format_double(format.full_scale));
        c.set("layer", to_string(tag));
        c.set("altitude-m", format_double(altitude_m));
        c.set("interval-ms", std::to_string(interval_ms));
        return c;
    }

    static capture_descriptor from_config(const kv_config& c)
    {
        capture_descriptor d;
        auto file = c.get("file");
        if (!file)
            throw error(errc::config, "sidecar is missing 'file'");
        d.file = *file;
        const auto m = c.get_int("m-antennas", -1);
        if (m <= 0)
            throw error(errc::format_mismatch, "sidecar must declare a positive m-antennas");
        d.format = parse_fixed_point_format(c.get_string("format", "q1.15-le"), static_cast<std::size_t>(m), c.get_double("full-scale", 1.0));
        d.tag = parse_layer(c.get_string("layer", "terrestrial"));
        d.altitude_m = c.get_double("altitude-m", 0.0);
        d.interval_ms = c.get_int("interval-ms", 1);
        return d;
    }

private:
    static std::string format_double(double v)
    {
        std::ostringstream ss;
        ss.imbue(std::locale::classic());
        ss.precision(17);
        ss << v;
        return ss.str();
    }
};

/// Loads every capture named by the sidecars into one pool. Record indices
/// run consecutively across captures in sidecar order.
inline csi_dataset load_captures(std::span<const std::filesystem::path> sidecars)
{
    if (sidecars.empty())
        throw error(errc::invalid_argument, "no capture sidecars given");
    std::vector<csi_record> all;
    std::size_t m = 0;
    for (const auto& sidecar : sidecars) {
        const auto desc = capture_descriptor::from_config(kv_config::load(sidecar));
        if (m != 0 && desc.format.m_antennas != m)
            throw error(errc::format_mismatch, sidecar.string() + ": m-antennas " + std::to_string(desc.format.m_antennas) +
                                                   " differs from earlier captures (" + std::to_string(m) + ")");
        m = desc.format.m_antennas;
        const auto bin = desc.file.is_absolute() ? desc.file : sidecar.parent_path() / desc.file;
        auto part = load_csi_binary(bin, desc.format, desc.tag, static_cast<std::int64_t>(all.size()), desc.interval_ms);
        all.insert(all.end(), part.records().begin(), part.records().end());
    }
    return csi_dataset(std::move(all));
}

} // namespace skyshare
