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

// Flat key-value text: one `key = value` per line, `#` starts a comment.
// Keys are case-sensitive; '_' and '-' are interchangeable.

#include "error.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace skyshare {

class kv_config {
public:
    static std::string canonical_key(std::string_view key)
    {
        std::string k(key);
        for (auto& c : k)
            if (c == '_')
                c = '-';
        return k;
    }

    static kv_config parse(std::string_view text, const std::string& origin = "<string>")
    {
        kv_config cfg;
        std::size_t line_no = 0;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            const auto body = trim(line);
            if (body.empty())
                continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                throw error(errc::config, origin + ":" + std::to_string(line_no) + ": expected key = value");
            const auto key = trim(body.substr(0, eq));
            if (key.empty())
                throw error(errc::config, origin + ":" + std::to_string(line_no) + ": empty key");
            cfg.set(key, trim(body.substr(eq + 1)));
        }
        return cfg;
    }

    static kv_config load(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw error(errc::io, "cannot open " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path.string());
    }

    void set(std::string_view key, std::string_view value) { values_[canonical_key(key)] = std::string(value); }
    bool contains(std::string_view key) const { return values_.count(canonical_key(key)) != 0; }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    /// Later entries win.
    void merge(const kv_config& other)
    {
        for (const auto& [k, v] : other.values_)
            values_[k] = v;
    }

    std::optional<std::string> get(std::string_view key) const
    {
        auto it = values_.find(canonical_key(key));
        if (it == values_.end())
            return std::nullopt;
        return it->second;
    }

    std::string get_string(std::string_view key, std::string fallback) const { return get(key).value_or(std::move(fallback)); }

    double get_double(std::string_view key, double fallback) const
    {
        auto v = get(key);
        return v ? to_double(key, *v) : fallback;
    }

    std::int64_t get_int(std::string_view key, std::int64_t fallback) const
    {
        auto v = get(key);
        return v ? to_int(key, *v) : fallback;
    }

    std::vector<double> get_double_list(std::string_view key, std::vector<double> fallback) const
    {
        auto v = get(key);
        if (!v)
            return fallback;
        std::vector<double> out;
        for (auto item : split(*v, ','))
            out.push_back(to_double(key, item));
        return out;
    }

    std::string serialize() const
    {
        std::string out;
        for (const auto& [k, v] : values_)
            out += k + " = " + v + "\n";
        return out;
    }

    static std::string_view trim(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
            s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.remove_suffix(1);
        return s;
    }

    static std::vector<std::string> split(std::string_view s, char sep)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= s.size()) {
            auto end = s.find(sep, start);
            if (end == std::string_view::npos)
                end = s.size();
            const auto item = trim(s.substr(start, end - start));
            if (!item.empty())
                out.emplace_back(item);
            start = end + 1;
        }
        return out;
    }

    static double to_double(std::string_view key, std::string_view text)
    {
        const auto t = trim(text);
        if (t == "inf" || t == "+inf")
            return std::numeric_limits<double>::infinity();
        if (t == "-inf")
            return -std::numeric_limits<double>::infinity();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            throw error(errc::config, "key '" + std::string(key) + "': not a number: '" + std::string(t) + "'");
        return v;
    }

    static std::int64_t to_int(std::string_view key, std::string_view text)
    {
        const auto t = trim(text);
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            throw error(errc::config, "key '" + std::string(key) + "': not an integer: '" + std::string(t) + "'");
        return v;
    }

private:
    std::map<std::string, std::string> values_;
};

} // namespace skyshare
