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

// Channel data model: per-user channel vectors, candidate records and the
// candidate pool, plus the pool-level transforms (SNR normalization and
// per-layer subsampling).

#include "error.hpp"
#include "rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skyshare {

using cplx = std::complex<double>;

enum class layer : std::uint8_t { terrestrial = 0, aerial = 1 };

inline constexpr std::array<layer, 2> all_layers{layer::terrestrial, layer::aerial};

inline constexpr std::string_view to_string(layer l) noexcept
{
    return l == layer::terrestrial ? "terrestrial" : "aerial";
}

inline layer parse_layer(std::string_view s)
{
    if (s == "terrestrial" || s == "ground")
        return layer::terrestrial;
    if (s == "aerial")
        return layer::aerial;
    throw error(errc::invalid_argument, "unknown layer '" + std::string(s) + "'");
}

/// Per-layer pair of values, indexed by layer.
template <typename T>
struct per_layer {
    T terrestrial{};
    T aerial{};

    constexpr T& operator[](layer l) noexcept { return l == layer::terrestrial ? terrestrial : aerial; }
    constexpr const T& operator[](layer l) const noexcept { return l == layer::terrestrial ? terrestrial : aerial; }
    friend constexpr bool operator==(const per_layer&, const per_layer&) = default;
};

/// Complex gains from one user location to each of the M base-station antennas.
class channel_vector {
public:
    channel_vector() = default;

    explicit channel_vector(Eigen::VectorXcd gains) : gains_(std::move(gains))
    {
        if (gains_.size() == 0)
            throw error(errc::invalid_argument, "channel vector needs at least one antenna");
        if (!gains_.allFinite())
            throw error(errc::invalid_argument, "channel vector has non-finite components");
    }

    channel_vector(std::initializer_list<cplx> gains)
        : channel_vector(Eigen::Map<const Eigen::VectorXcd>(gains.begin(), static_cast<Eigen::Index>(gains.size())))
    {
    }

    const Eigen::VectorXcd& gains() const noexcept { return gains_; }
    std::size_t m_antennas() const noexcept { return static_cast<std::size_t>(gains_.size()); }
    double squared_norm() const { return gains_.squaredNorm(); }
    double norm() const { return gains_.norm(); }
    cplx operator[](std::size_t e) const { return gains_[static_cast<Eigen::Index>(e)]; }

    friend bool operator==(const channel_vector& a, const channel_vector& b)
    {
        return a.gains_.size() == b.gains_.size() && (a.gains_.array() == b.gains_.array()).all();
    }

private:
    Eigen::VectorXcd gains_;
};

/// One candidate user location.
struct csi_record {
    std::int64_t index = 0;
    layer tag = layer::terrestrial;
    std::int64_t timestep_ms = 0;
    std::optional<Eigen::Vector3d> position;
    channel_vector channel;
};

/// An ordered candidate pool. Records are kept in insertion order; selections
/// refer to records by their position in this order.
class csi_dataset {
public:
    csi_dataset() = default;

    explicit csi_dataset(std::vector<csi_record> records) : records_(std::move(records))
    {
        if (records_.empty())
            return;
        m_antennas_ = records_.front().channel.m_antennas();
        std::vector<std::int64_t> ids;
        ids.reserve(records_.size());
        for (const auto& r : records_) {
            if (r.channel.m_antennas() != m_antennas_)
                throw error(errc::dimension_mismatch, "records disagree on antenna count");
            ids.push_back(r.index);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw error(errc::invalid_argument, "duplicate record index");
    }

    const std::vector<csi_record>& records() const noexcept { return records_; }
    const csi_record& operator[](std::size_t i) const { return records_.at(i); }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t m_antennas() const noexcept { return m_antennas_; }

    double scale_applied() const noexcept { return scale_applied_; }
    /// Linear noise power sigma^2; unset until the pool is normalized.
    std::optional<double> noise_power() const noexcept { return noise_power_; }
    std::optional<double> snr_target_db() const noexcept { return snr_target_db_; }
    bool normalized() const noexcept { return noise_power_.has_value(); }

    std::size_t count(layer l) const
    {
        return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [l](const csi_record& r) { return r.tag == l; }));
    }

    /// Mean of |h|^2 over all records.
    double mean_squared_norm() const
    {
        if (records_.empty())
            return 0.0;
        double acc = 0.0;
        for (const auto& r : records_)
            acc += r.channel.squared_norm();
        return acc / static_cast<double>(records_.size());
    }

    /// Copies normalization metadata from another dataset (used by transforms
    /// that keep the scale, e.g. subsampling).
    csi_dataset with_metadata_of(const csi_dataset& other) &&
    {
        scale_applied_ = other.scale_applied_;
        noise_power_ = other.noise_power_;
        snr_target_db_ = other.snr_target_db_;
        return std::move(*this);
    }

    csi_dataset with_normalization(double scale, double noise_power, double snr_db) &&
    {
        scale_applied_ = scale;
        noise_power_ = noise_power;
        snr_target_db_ = snr_db;
        return std::move(*this);
    }

private:
    std::vector<csi_record> records_;
    std::size_t m_antennas_ = 0;
    double scale_applied_ = 1.0;
    std::optional<double> noise_power_;
    std::optional<double> snr_target_db_;
};

/// Noise power that gives the requested average SNR for unit transmit power
/// and unit mean channel energy.
inline double noise_power_for_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// Rescales all gains by one global factor so the mean |h|^2 over the pool is
/// one, and sets sigma^2 = 10^(-snr_db/10). The recorded scale is cumulative
/// with respect to the raw capture.
inline csi_dataset normalize_to_snr(const csi_dataset& dataset, double snr_db)
{
    if (dataset.empty())
        throw error(errc::invalid_argument, "cannot normalize an empty dataset");
    if (!std::isfinite(snr_db))
        throw error(errc::invalid_argument, "snr must be finite");
    const double mean_energy = dataset.mean_squared_norm();
    if (!(mean_energy > 0.0))
        throw error(errc::all_zero_dataset, "every channel vector is zero");

    // Already unit energy: leave the gains bit-identical.
    const double scale = std::abs(mean_energy - 1.0) <= 1e-12 ? 1.0 : 1.0 / std::sqrt(mean_energy);

    std::vector<csi_record> records = dataset.records();
    if (scale != 1.0) {
        for (auto& r : records)
            r.channel = channel_vector(r.channel.gains() * scale);
    }
    return csi_dataset(std::move(records))
        .with_normalization(dataset.scale_applied() * scale, noise_power_for_snr(snr_db), snr_db);
}

enum class subsample_policy { stride, seeded_uniform };

inline subsample_policy parse_subsample_policy(std::string_view s)
{
    if (s == "stride")
        return subsample_policy::stride;
    if (s == "seeded-uniform" || s == "seeded_uniform" || s == "uniform")
        return subsample_policy::seeded_uniform;
    throw error(errc::invalid_argument, "unknown subsample policy '" + std::string(s) + "'");
}

/// Reduces each layer to the requested number of records. Stride keeps the
/// records at ranks floor(i * n / count) of that layer; seeded-uniform draws a
/// uniform subset without replacement. Surviving records keep their relative
/// order and their indices.
inline csi_dataset subsample_pool(const csi_dataset& dataset, per_layer<std::size_t> per_layer_count,
                                  subsample_policy policy, std::uint64_t seed = 0)
{
    per_layer<std::vector<std::size_t>> positions;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        positions[dataset[i].tag].push_back(i);

    std::vector<char> keep(dataset.size(), 0);
    for (layer l : all_layers) {
        const auto& pos = positions[l];
        const std::size_t n = pos.size();
        const std::size_t want = per_layer_count[l];
        if (want > n)
            throw error(errc::count_exceeds_population, "requested " + std::to_string(want) + " " + std::string(to_string(l)) +
                                                            " records but only " + std::to_string(n) + " exist");
        if (policy == subsample_policy::stride) {
            for (std::size_t i = 0; i < want; ++i)
                keep[pos[i * n / want]] = 1;
        } else {
            rng::stream s(rng::derive(seed, static_cast<std::uint64_t>(l)));
            const auto perm = s.permutation(n);
            for (std::size_t i = 0; i < want; ++i)
                keep[pos[perm[i]]] = 1;
        }
    }

    std::vector<csi_record> out;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        if (keep[i])
            out.push_back(dataset[i]);
    return csi_dataset(std::move(out)).with_metadata_of(dataset);
}

/// FNV-1a over layer tags, indices and the IEEE-754 bytes of every gain.
inline std::uint64_t fingerprint(const csi_dataset& dataset)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& r : dataset.records()) {
        const auto tag = static_cast<std::uint8_t>(r.tag);
        mix(&tag, 1);
        mix(&r.index, sizeof r.index);
        for (Eigen::Index e = 0; e < r.channel.gains().size(); ++e) {
            const double re = r.channel.gains()[e].real();
            const double im = r.channel.gains()[e].imag();
            mix(&re, sizeof re);
            mix(&im, sizeof im);
        }
    }
    return h;
}

} // namespace skyshare
