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

#include <stdexcept>
#include <string>

namespace skyshare {

enum class errc {
    invalid_argument,
    truncated_file,
    empty_file,
    format_mismatch,
    io,
    all_zero_dataset,
    count_exceeds_population,
    out_of_range,
    zero_vector,
    dimension_mismatch,
    ill_conditioned,
    fallback_failed,
    budget_exceeded,
    empty_table,
    config,
};

inline const char* to_string(errc code) noexcept
{
    switch (code) {
    case errc::invalid_argument: return "invalid argument";
    case errc::truncated_file: return "truncated file";
    case errc::empty_file: return "empty file";
    case errc::format_mismatch: return "format mismatch";
    case errc::io: return "i/o error";
    case errc::all_zero_dataset: return "all-zero dataset";
    case errc::count_exceeds_population: return "count exceeds population";
    case errc::out_of_range: return "out of range";
    case errc::zero_vector: return "zero vector";
    case errc::dimension_mismatch: return "dimension mismatch";
    case errc::ill_conditioned: return "ill-conditioned Gram matrix";
    case errc::fallback_failed: return "candidates exhausted";
    case errc::budget_exceeded: return "combinatorial budget exceeded";
    case errc::empty_table: return "empty table";
    case errc::config: return "configuration error";
    }
    return "unknown error";
}

// All library failures are reported through this type; code() lets callers
// and tests distinguish the failure class without parsing messages.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace skyshare
