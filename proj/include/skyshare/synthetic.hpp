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

// Synthetic two-layer scenario: a uniform planar array on a building facade
// and straight user trajectories parallel to it at two altitudes. Each channel
// is a line-of-sight spherical-wave term (exact per-element path length and
// free-space amplitude) plus an i.i.d. diffuse term whose share is set by a
// per-layer Rician K-factor.

#include "csi.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace skyshare {

inline constexpr double speed_of_light = 299792458.0;

/// Coordinates: the array lies in the y-z plane centred at (0, 0, bs_height_m)
/// and radiates towards +x; trajectories run along y at x = standoff_distance_m.
struct scenario_config {
    std::size_t m_rows = 8;
    std::size_t m_cols = 8;
    double carrier_hz = 2.61e9;
    double element_spacing_wavelengths = 0.5;
    double bs_height_m = 11.0;
    double trajectory_length_m = 42.48;
    double trajectory_speed_mps = 1.5;
    double sample_interval_ms = 1.0;
    per_layer<double> layer_altitudes_m{8.0, 24.0};
    double standoff_distance_m = 30.0;
    /// +inf disables the diffuse term.
    per_layer<double> rician_k_db{-6.0, 0.0};
    std::uint64_t seed = 1;

    std::size_t m_antennas() const noexcept { return m_rows * m_cols; }
    double wavelength_m() const noexcept { return speed_of_light / carrier_hz; }

    std::size_t samples_per_layer() const
    {
        const double step = trajectory_speed_mps * sample_interval_ms * 1e-3;
        return static_cast<std::size_t>(std::floor(trajectory_length_m / step + 1e-9)) + 1;
    }

    void validate() const
    {
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (m_rows == 0 || m_cols == 0)
            throw error(errc::invalid_argument, "array must have at least one row and column");
        if (!positive(carrier_hz) || !positive(element_spacing_wavelengths) || !positive(bs_height_m) || !positive(trajectory_length_m) ||
            !positive(trajectory_speed_mps) || !positive(sample_interval_ms) || !positive(standoff_distance_m) ||
            !positive(layer_altitudes_m.terrestrial) || !positive(layer_altitudes_m.aerial))
            throw error(errc::invalid_argument, "scenario geometry must be strictly positive");
        if (layer_altitudes_m.terrestrial == layer_altitudes_m.aerial)
            throw error(errc::invalid_argument, "layer altitudes must differ");
        for (layer l : all_layers)
            if (std::isnan(rician_k_db[l]) || rician_k_db[l] == -std::numeric_limits<double>::infinity())
                throw error(errc::invalid_argument, "rician K-factor must be a number or +inf");
    }
};

/// Element positions, row-major (row index along z, column index along y).
inline std::vector<Eigen::Vector3d> array_element_positions(const scenario_config& cfg)
{
    const double d = cfg.element_spacing_wavelengths * cfg.wavelength_m();
    std::vector<Eigen::Vector3d> pos;
    pos.reserve(cfg.m_antennas());
    for (std::size_t r = 0; r < cfg.m_rows; ++r) {
        for (std::size_t c = 0; c < cfg.m_cols; ++c) {
            const double y = (static_cast<double>(c) - 0.5 * static_cast<double>(cfg.m_cols - 1)) * d;
            const double z = cfg.bs_height_m + (static_cast<double>(r) - 0.5 * static_cast<double>(cfg.m_rows - 1)) * d;
            pos.emplace_back(0.0, y, z);
        }
    }
    return pos;
}

/// Deterministic LOS term: lambda / (4 pi d_e) * exp(-j 2 pi d_e / lambda).
inline Eigen::VectorXcd los_component(const scenario_config& cfg, const std::vector<Eigen::Vector3d>& elements, const Eigen::Vector3d& user)
{
    const double lambda = cfg.wavelength_m();
    Eigen::VectorXcd a(static_cast<Eigen::Index>(elements.size()));
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const double dist = (user - elements[e]).norm();
        // fmod keeps the phase argument small so large distances do not lose precision in cos/sin.
        const double cycles = std::fmod(dist / lambda, 1.0);
        a[static_cast<Eigen::Index>(e)] = std::polar(lambda / (4.0 * std::numbers::pi * dist), -2.0 * std::numbers::pi * cycles);
    }
    return a;
}

/// One Rician channel realization at `user`. The diffuse term has the
/// free-space power of the array centre.
inline channel_vector channel_at(const scenario_config& cfg, const std::vector<Eigen::Vector3d>& elements, const Eigen::Vector3d& user,
                                 double k_db, rng::stream& noise)
{
    Eigen::VectorXcd h = los_component(cfg, elements, user);
    if (std::isinf(k_db) && k_db > 0)
        return channel_vector(std::move(h));

    const double k = std::pow(10.0, k_db / 10.0);
    const double los_share = std::sqrt(k / (k + 1.0));
    const double diffuse_share = std::sqrt(1.0 / (k + 1.0));
    const Eigen::Vector3d centre(0.0, 0.0, cfg.bs_height_m);
    const double centre_amp = cfg.wavelength_m() / (4.0 * std::numbers::pi * (user - centre).norm());
    h *= los_share;
    for (Eigen::Index e = 0; e < h.size(); ++e)
        h[e] += diffuse_share * centre_amp * noise.complex_normal();
    return channel_vector(std::move(h));
}

/// Position of sample `i` on a layer's trajectory.
inline Eigen::Vector3d trajectory_point(const scenario_config& cfg, layer l, std::size_t i)
{
    const double step = cfg.trajectory_speed_mps * cfg.sample_interval_ms * 1e-3;
    const double y = -0.5 * cfg.trajectory_length_m + step * static_cast<double>(i);
    return {cfg.standoff_distance_m, y, cfg.layer_altitudes_m[l]};
}

/// Generates both layers, terrestrial records first. Same config, same bits.
inline csi_dataset generate_synthetic(const scenario_config& cfg)
{
    cfg.validate();
    const auto elements = array_element_positions(cfg);
    const std::size_t n = cfg.samples_per_layer();

    std::vector<csi_record> records;
    records.reserve(2 * n);
    for (layer l : all_layers) {
        rng::stream noise(rng::derive(cfg.seed, static_cast<std::uint64_t>(l)));
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Vector3d p = trajectory_point(cfg, l, i);
            records.push_back(csi_record{static_cast<std::int64_t>(records.size()), l,
                                         static_cast<std::int64_t>(std::llround(static_cast<double>(i) * cfg.sample_interval_ms)), p,
                                         channel_at(cfg, elements, p, cfg.rician_k_db[l], noise)});
        }
    }
    return csi_dataset(std::move(records));
}

} // namespace skyshare
