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

// Zero-forcing combining and the uplink SINR / spectral-efficiency metrics
// for a scheduled user set.
//
// Channels are stacked as columns, H = [h_1 ... h_K] (M x K), so the Gram
// matrix H^H H is K x K and the combiner V = H (H^H H)^{-1} satisfies
// V^H H = I_K.

#include "csi.hpp"
#include "sched.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace skyshare {

inline constexpr double default_condition_cap = 1e10;

template <typename Real>
using cmatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real = double>
struct combiner_matrix {
    /// M x K, column k is v_k.
    cmatrix<Real> columns;
    /// Condition number of the K x K Gram matrix (square of that of H).
    Real source_condition = 0;

    Eigen::Index users() const noexcept { return columns.cols(); }
};

/// Stacks the selected users' channels as the columns of H.
inline cmatrix<double> stack_channels(const csi_dataset& pool, std::span<const std::size_t> chosen)
{
    cmatrix<double> h(static_cast<Eigen::Index>(pool.m_antennas()), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k)
        h.col(static_cast<Eigen::Index>(k)) = pool[chosen[k]].channel.gains();
    return h;
}

inline cmatrix<double> stack_channels(std::span<const channel_vector> channels)
{
    if (channels.empty())
        return {};
    cmatrix<double> h(static_cast<Eigen::Index>(channels.front().m_antennas()), static_cast<Eigen::Index>(channels.size()));
    for (std::size_t k = 0; k < channels.size(); ++k) {
        if (channels[k].m_antennas() != channels.front().m_antennas())
            throw error(errc::dimension_mismatch, "channels have different antenna counts");
        h.col(static_cast<Eigen::Index>(k)) = channels[k].gains();
    }
    return h;
}

/// Condition number of H^H H, from the singular values of H.
template <typename Real>
Real gram_condition(const cmatrix<Real>& h)
{
    const auto sv = h.jacobiSvd().singularValues();
    const Real smax = sv(0);
    const Real smin = sv(sv.size() - 1);
    if (!(smin > 0))
        return std::numeric_limits<Real>::infinity();
    const Real ratio = smax / smin;
    return ratio * ratio;
}

/// ZF combiner V = H (H^H H)^{-1}. The Gram inverse is applied through the
/// thin QR factor of H (H^H H = R^H R), giving V = Q R^{-H} without forming
/// the Gram matrix explicitly.
template <typename Real>
combiner_matrix<Real> zf_combiner(const cmatrix<Real>& h, Real condition_cap = Real(default_condition_cap))
{
    const auto m = h.rows();
    const auto k = h.cols();
    if (k == 0 || m == 0)
        throw error(errc::dimension_mismatch, "zero-forcing needs at least one user and one antenna");
    if (k > m)
        throw error(errc::dimension_mismatch, std::to_string(k) + " users exceed " + std::to_string(m) + " antennas");
    if (!h.allFinite())
        throw error(errc::invalid_argument, "channel matrix has non-finite entries");

    const Real cond = gram_condition(h);
    if (!(cond <= condition_cap))
        throw error(errc::ill_conditioned, "Gram condition number " + std::to_string(static_cast<double>(cond)) + " exceeds cap " +
                                               std::to_string(static_cast<double>(condition_cap)));

    Eigen::HouseholderQR<cmatrix<Real>> qr(h);
    const cmatrix<Real> q = qr.householderQ() * cmatrix<Real>::Identity(m, k);
    const cmatrix<Real> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    // X = R^{-H}: solve R^H X = I with R^H lower triangular.
    const cmatrix<Real> x = r.adjoint().template triangularView<Eigen::Lower>().solve(cmatrix<Real>::Identity(k, k));
    return {q * x, cond};
}

inline combiner_matrix<double> zf_combiner(std::span<const channel_vector> channels, double condition_cap = default_condition_cap)
{
    return zf_combiner<double>(stack_channels(channels), condition_cap);
}

/// SINR_k = p |v_k^H h_k|^2 / (sum_{i != k} p |v_k^H h_i|^2 + sigma^2 |v_k|^2),
/// evaluated literally so it holds for any combiner, not just ZF.
template <typename Real>
std::vector<Real> sinr(const combiner_matrix<Real>& combiner, const cmatrix<Real>& h, Real tx_power, Real noise_power)
{
    const auto& v = combiner.columns;
    if (v.rows() != h.rows() || v.cols() != h.cols())
        throw error(errc::dimension_mismatch, "combiner is " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) + ", channels " +
                                                  std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
    if (!(tx_power > 0) || !(noise_power > 0) || !std::isfinite(tx_power) || !std::isfinite(noise_power))
        throw error(errc::invalid_argument, "transmit and noise power must be positive and finite");

    const cmatrix<Real> gains = v.adjoint() * h; // (k, i) = v_k^H h_i
    std::vector<Real> out(static_cast<std::size_t>(h.cols()));
    for (Eigen::Index k = 0; k < h.cols(); ++k) {
        Real interference = 0;
        for (Eigen::Index i = 0; i < h.cols(); ++i)
            if (i != k)
                interference += tx_power * std::norm(gains(k, i));
        const Real noise = noise_power * v.col(k).squaredNorm();
        out[static_cast<std::size_t>(k)] = tx_power * std::norm(gains(k, k)) / (interference + noise);
    }
    return out;
}

/// log2(1 + SINR), elementwise.
template <typename Real>
std::vector<Real> spectral_efficiency(std::span<const Real> sinr_values)
{
    std::vector<Real> out;
    out.reserve(sinr_values.size());
    for (Real s : sinr_values) {
        if (!(s >= 0))
            throw error(errc::invalid_argument, "SINR must be nonnegative");
        out.push_back(std::log2(Real(1) + s));
    }
    return out;
}

template <typename Real>
Real sum_se(std::span<const Real> se)
{
    return std::accumulate(se.begin(), se.end(), Real(0));
}

struct se_report {
    std::vector<double> per_user_sinr;
    std::vector<double> per_user_se;
    double sum_se = 0.0;
    selection_result selection;
    double noise_power = 0.0;
    double tx_power = 1.0;
    double gram_condition = 0.0;

    double mean_individual_se() const { return per_user_se.empty() ? 0.0 : sum_se / static_cast<double>(per_user_se.size()); }
};

/// ZF combiner, SINR, per-user and summed SE for one selection. The pool must
/// be normalized so it carries a noise power.
inline se_report evaluate_selection(const csi_dataset& pool, const selection_result& selection, double tx_power = 1.0,
                                    double condition_cap = default_condition_cap)
{
    if (!pool.noise_power())
        throw error(errc::invalid_argument, "pool has no noise power; normalize it first");
    if (selection.chosen.empty())
        throw error(errc::out_of_range, "empty selection");
    validate_selection(pool, selection);

    const auto h = stack_channels(pool, selection.chosen);
    const auto v = zf_combiner<double>(h, condition_cap);

    se_report rep;
    rep.per_user_sinr = sinr<double>(v, h, tx_power, *pool.noise_power());
    rep.per_user_se = spectral_efficiency<double>(rep.per_user_sinr);
    rep.sum_se = sum_se<double>(rep.per_user_se);
    rep.selection = selection;
    rep.noise_power = *pool.noise_power();
    rep.tx_power = tx_power;
    rep.gram_condition = v.source_condition;
    return rep;
}

} // namespace skyshare
