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

// User selection over a candidate pool: uniform random selection and greedy
// semi-orthogonal user selection (SUS), optionally with per-layer quotas.

#include "csi.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace skyshare {

enum class selection_method { random, sus, sus_layered };

inline constexpr std::string_view to_string(selection_method m) noexcept
{
    switch (m) {
    case selection_method::random: return "random";
    case selection_method::sus: return "sus";
    case selection_method::sus_layered: return "sus-layered";
    }
    return "?";
}

inline selection_method parse_selection_method(std::string_view s)
{
    if (s == "random")
        return selection_method::random;
    if (s == "sus")
        return selection_method::sus;
    if (s == "sus-layered" || s == "sus_layered")
        return selection_method::sus_layered;
    throw error(errc::invalid_argument, "unknown selection method '" + std::string(s) + "'");
}

enum class sus_fallback { max_residual_norm, fail };

struct sus_params {
    double alpha = 0.6;
    sus_fallback fallback = sus_fallback::max_residual_norm;

    void validate() const
    {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw error(errc::invalid_argument, "SUS alpha must lie in (0, 1]");
    }
};

/// Scheduled users: positions into the pool, in selection order.
struct selection_result {
    std::vector<std::size_t> chosen;
    per_layer<std::size_t> per_layer_counts;
    selection_method method = selection_method::random;
    /// Rank in `chosen` of the first pick made after the candidate set ran dry.
    std::optional<std::size_t> fallback_used_from;

    friend bool operator==(const selection_result&, const selection_result&) = default;
};

/// Checks that a selection refers to distinct, existing pool members and that
/// its layer counts agree with the pool.
inline void validate_selection(const csi_dataset& pool, const selection_result& sel)
{
    std::vector<char> seen(pool.size(), 0);
    per_layer<std::size_t> counts;
    for (auto i : sel.chosen) {
        if (i >= pool.size())
            throw error(errc::out_of_range, "selection refers to pool position " + std::to_string(i) + " of " + std::to_string(pool.size()));
        if (seen[i]++)
            throw error(errc::invalid_argument, "selection contains position " + std::to_string(i) + " twice");
        ++counts[pool[i].tag];
    }
    if (counts != sel.per_layer_counts)
        throw error(errc::invalid_argument, "selection layer counts disagree with the pool");
}

inline selection_result random_select(const csi_dataset& pool, std::size_t k, std::uint64_t seed)
{
    if (k < 1 || k > pool.size())
        throw error(errc::out_of_range, "k=" + std::to_string(k) + " outside [1, " + std::to_string(pool.size()) + "]");
    rng::stream s(seed);
    auto perm = s.permutation(pool.size());
    perm.resize(k);
    selection_result out;
    out.method = selection_method::random;
    for (auto i : perm)
        ++out.per_layer_counts[pool[i].tag];
    out.chosen = std::move(perm);
    return out;
}

/// h minus its projections onto each basis vector, applied sequentially.
/// For the mutually orthogonal bases SUS builds this is the component of h
/// orthogonal to their span.
inline Eigen::VectorXcd orthogonal_residual(const Eigen::VectorXcd& h, std::span<const Eigen::VectorXcd> basis)
{
    Eigen::VectorXcd g = h;
    for (const auto& b : basis) {
        if (b.size() != h.size())
            throw error(errc::dimension_mismatch, "basis vector length differs from channel length");
        const double nb = b.squaredNorm();
        if (!(nb > 0.0))
            throw error(errc::zero_vector, "basis contains a zero vector");
        g -= (b.dot(g) / nb) * b; // Eigen's dot conjugates the left operand: b^H g
    }
    return g;
}

inline channel_vector orthogonal_residual(const channel_vector& h, std::span<const channel_vector> basis)
{
    std::vector<Eigen::VectorXcd> raw;
    raw.reserve(basis.size());
    for (const auto& b : basis)
        raw.push_back(b.gains());
    return channel_vector(orthogonal_residual(h.gains(), raw));
}

/// |h^H g| / (|h| |g|).
inline double correlation(const Eigen::VectorXcd& h, const Eigen::VectorXcd& g)
{
    if (h.size() != g.size())
        throw error(errc::dimension_mismatch, "correlation of vectors with different lengths");
    const double nh = h.norm();
    const double ng = g.norm();
    if (!(nh > 0.0) || !(ng > 0.0))
        throw error(errc::zero_vector, "correlation with a zero vector");
    return std::min(1.0, std::abs(h.dot(g)) / (nh * ng));
}

inline double correlation(const channel_vector& h, const channel_vector& g) { return correlation(h.gains(), g.gains()); }

/// One SUS step, kept for auditing: which candidate was picked and the
/// residual norm it had.
struct sus_trace_step {
    std::size_t picked = 0;
    double residual_norm = 0.0;
    bool fallback = false;
};

namespace detail {

// Shared engine for plain and quota-constrained SUS. `quota` of nullopt means
// unconstrained.
inline selection_result sus_engine(const csi_dataset& pool, std::size_t k, const std::optional<per_layer<std::size_t>>& quota,
                                   const sus_params& params, std::vector<sus_trace_step>* trace)
{
    params.validate();
    const std::size_t n = pool.size();

    std::vector<Eigen::VectorXcd> residual(n);
    std::vector<double> residual_sq(n);
    std::vector<double> channel_norm(n);
    for (std::size_t i = 0; i < n; ++i) {
        residual[i] = pool[i].channel.gains();
        residual_sq[i] = residual[i].squaredNorm();
        channel_norm[i] = std::sqrt(residual_sq[i]);
    }

    // candidate: still eligible under the orthogonality test; unselected: not yet chosen.
    std::vector<char> candidate(n, 1), unselected(n, 1);
    selection_result out;
    out.method = quota ? selection_method::sus_layered : selection_method::sus;

    auto layer_open = [&](layer l) { return !quota || out.per_layer_counts[l] < (*quota)[l]; };
    for (std::size_t i = 0; i < n; ++i)
        if (!layer_open(pool[i].tag))
            candidate[i] = 0;

    // Largest residual among the flagged entries; ties go to the lowest position.
    auto argmax = [&](const std::vector<char>& eligible) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < n; ++i) {
            if (!eligible[i] || !unselected[i] || !layer_open(pool[i].tag))
                continue;
            if (!best || residual_sq[i] > residual_sq[*best])
                best = i;
        }
        return best;
    };

    while (out.chosen.size() < k) {
        auto pick = argmax(candidate);
        bool fallback = false;
        if (!pick) {
            if (params.fallback == sus_fallback::fail)
                throw error(errc::fallback_failed, "SUS ran out of semi-orthogonal candidates after " + std::to_string(out.chosen.size()) +
                                                       " of " + std::to_string(k) + " users");
            pick = argmax(unselected);
            if (!pick)
                throw error(errc::fallback_failed, "pool exhausted after " + std::to_string(out.chosen.size()) + " users");
            fallback = true;
            if (!out.fallback_used_from)
                out.fallback_used_from = out.chosen.size();
        }

        const std::size_t s = *pick;
        if (trace)
            trace->push_back({s, std::sqrt(residual_sq[s]), fallback});
        out.chosen.push_back(s);
        ++out.per_layer_counts[pool[s].tag];
        unselected[s] = 0;
        candidate[s] = 0;
        if (out.chosen.size() == k)
            break;

        // Basis expansion: the picked residual becomes the new basis vector.
        const Eigen::VectorXcd basis = residual[s];
        const double basis_sq = residual_sq[s];
        const double basis_norm = std::sqrt(basis_sq);
        const bool usable = basis_sq > 0.0 && basis_sq > 1e-28 * channel_norm[s] * channel_norm[s];

        for (std::size_t i = 0; i < n; ++i) {
            if (!unselected[i])
                continue;
            if (!layer_open(pool[i].tag))
                candidate[i] = 0;
            if (!usable)
                continue;
            residual[i] -= (basis.dot(residual[i]) / basis_sq) * basis;
            residual_sq[i] = residual[i].squaredNorm();
            // Orthogonality check against the new basis vector.
            if (candidate[i] && channel_norm[i] > 0.0 &&
                std::abs(basis.dot(pool[i].channel.gains())) / (basis_norm * channel_norm[i]) >= params.alpha)
                candidate[i] = 0;
        }
    }
    return out;
}

} // namespace detail

/// Greedy SUS: repeatedly pick the candidate with the largest residual norm
/// against the current basis, add that residual to the basis, and drop every
/// candidate whose channel correlates with it at alpha or more. When no
/// candidate survives before k users are picked, `params.fallback` decides:
/// keep picking by residual norm among all unselected users, or fail.
inline selection_result sus_select(const csi_dataset& pool, std::size_t k, const sus_params& params = {},
                                   std::vector<sus_trace_step>* trace = nullptr)
{
    if (k < 1 || k > pool.size())
        throw error(errc::out_of_range, "k=" + std::to_string(k) + " outside [1, " + std::to_string(pool.size()) + "]");
    return detail::sus_engine(pool, k, std::nullopt, params, trace);
}

/// SUS with a per-layer cap. Both layers compete until one reaches its quota;
/// from then on only the other layer is eligible, fallback included.
inline selection_result sus_select_layered(const csi_dataset& pool, per_layer<std::size_t> quota, const sus_params& params = {},
                                           std::vector<sus_trace_step>* trace = nullptr)
{
    for (layer l : all_layers)
        if (quota[l] > pool.count(l))
            throw error(errc::count_exceeds_population, "quota of " + std::to_string(quota[l]) + " " + std::string(to_string(l)) +
                                                            " users exceeds the " + std::to_string(pool.count(l)) + " available");
    const std::size_t k = quota.terrestrial + quota.aerial;
    if (k < 1)
        throw error(errc::out_of_range, "total quota must be at least one user");
    return detail::sus_engine(pool, k, quota, params, trace);
}

} // namespace skyshare
