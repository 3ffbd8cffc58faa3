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

// Monte-Carlo experiment harness: summed/individual SE against the total
// number of scheduled users, SE over a (ground, aerial) quota grid, capacity
// at a minimum per-user SE, peak finding, and an exhaustive-subset oracle for
// small pools. Tables serialize to a fixed CSV schema.

#include "csi.hpp"
#include "rng.hpp"
#include "sched.hpp"
#include "kvconfig.hpp"
#include "zf.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <numeric>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace skyshare {

struct sweep_row {
    selection_method method = selection_method::sus;
    std::size_t k_total = 0;
    std::size_t k_ground = 0;
    std::size_t k_aerial = 0;
    std::size_t trial = 0;
    double sum_se = 0.0;
    double mean_individual_se = 0.0;
    std::optional<std::size_t> fallback_rank;

    friend bool operator==(const sweep_row&, const sweep_row&) = default;
};

struct sweep_meta {
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double snr_db = 0.0;
    std::uint64_t dataset_fingerprint = 0;
};

struct sweep_table {
    std::vector<sweep_row> rows;
    sweep_meta meta;
};

/// Inclusive integer range.
struct k_range {
    std::size_t first = 1;
    std::size_t last = 1;

    std::size_t size() const noexcept { return last >= first ? last - first + 1 : 0; }
};

struct sweep_options {
    sus_params sus;
    double tx_power = 1.0;
    double condition_cap = default_condition_cap;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

namespace detail {

// Runs fn(i) for i in [0, n) on a small worker pool; the first exception is
// rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    workers.clear();
    if (failure)
        std::rethrow_exception(failure);
}

inline sweep_row make_row(const se_report& rep, std::size_t trial)
{
    sweep_row row;
    row.method = rep.selection.method;
    row.k_total = rep.selection.chosen.size();
    row.k_ground = rep.selection.per_layer_counts.terrestrial;
    row.k_aerial = rep.selection.per_layer_counts.aerial;
    row.trial = trial;
    row.sum_se = rep.sum_se;
    row.mean_individual_se = rep.mean_individual_se();
    row.fallback_rank = rep.selection.fallback_used_from;
    return row;
}

inline sweep_meta make_meta(const csi_dataset& pool, std::uint64_t seed, const sweep_options& opt)
{
    return {seed, opt.sus.alpha, pool.snr_target_db().value_or(0.0), fingerprint(pool)};
}

} // namespace detail

/// Seed of Random trial `trial`. It does not depend on k, so the users drawn
/// for k are a prefix of those drawn for k + 1 within a trial.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return rng::derive(seed, trial); }

/// For each k and method, schedules and evaluates. SUS is deterministic and
/// recorded once per k; Random is repeated `trials` times. Rows are ordered by
/// method, k, then trial.
inline sweep_table sweep_total_users(const csi_dataset& pool, k_range ks, const std::vector<selection_method>& methods, std::size_t trials,
                                     std::uint64_t seed, const sweep_options& opt = {})
{
    if (ks.size() == 0 || ks.first < 1)
        throw error(errc::out_of_range, "k range must be non-empty and start at 1 or above");
    if (ks.last > pool.size())
        throw error(errc::out_of_range, "k range reaches " + std::to_string(ks.last) + " but the pool holds " + std::to_string(pool.size()));
    if (trials < 1)
        throw error(errc::invalid_argument, "trials must be at least 1");

    auto sorted = methods;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    struct job {
        selection_method method;
        std::size_t k;
        std::size_t trial;
    };
    std::vector<job> jobs;
    for (auto m : sorted) {
        if (m == selection_method::sus_layered)
            throw error(errc::invalid_argument, "total-user sweeps take random or sus");
        for (std::size_t k = ks.first; k <= ks.last; ++k) {
            const std::size_t n_trials = m == selection_method::random ? trials : 1;
            for (std::size_t t = 0; t < n_trials; ++t)
                jobs.push_back({m, k, t});
        }
    }

    sweep_table table;
    table.meta = detail::make_meta(pool, seed, opt);
    table.rows.resize(jobs.size());
    detail::parallel_for(jobs.size(), opt.threads, [&](std::size_t j) {
        const auto& jb = jobs[j];
        const auto sel =
            jb.method == selection_method::random ? random_select(pool, jb.k, trial_seed(seed, jb.trial)) : sus_select(pool, jb.k, opt.sus);
        table.rows[j] = detail::make_row(evaluate_selection(pool, sel, opt.tx_power, opt.condition_cap), jb.trial);
    });
    return table;
}

/// Layered SUS at every (k_ground, k_aerial) in the grid except (0, 0),
/// ordered by k_ground then k_aerial.
inline sweep_table sweep_layer_grid(const csi_dataset& pool, k_range ground, k_range aerial, std::uint64_t seed, const sweep_options& opt = {})
{
    if (ground.size() == 0 || aerial.size() == 0)
        throw error(errc::out_of_range, "grid ranges must be non-empty");
    if (ground.last > pool.count(layer::terrestrial))
        throw error(errc::count_exceeds_population, "ground range reaches " + std::to_string(ground.last) + " but the pool holds " +
                                                        std::to_string(pool.count(layer::terrestrial)) + " terrestrial records");
    if (aerial.last > pool.count(layer::aerial))
        throw error(errc::count_exceeds_population, "aerial range reaches " + std::to_string(aerial.last) + " but the pool holds " +
                                                        std::to_string(pool.count(layer::aerial)) + " aerial records");

    std::vector<per_layer<std::size_t>> points;
    for (std::size_t g = ground.first; g <= ground.last; ++g)
        for (std::size_t a = aerial.first; a <= aerial.last; ++a)
            if (g + a > 0)
                points.push_back({g, a});

    sweep_table table;
    table.meta = detail::make_meta(pool, seed, opt);
    table.rows.resize(points.size());
    detail::parallel_for(points.size(), opt.threads, [&](std::size_t j) {
        const auto sel = sus_select_layered(pool, points[j], opt.sus);
        table.rows[j] = detail::make_row(evaluate_selection(pool, sel, opt.tx_power, opt.condition_cap), 0);
    });
    return table;
}

/// Per-k averages over the rows of one method (trials averaged).
struct k_summary {
    std::size_t k_total = 0;
    double mean_sum_se = 0.0;
    double mean_individual_se = 0.0;
    std::size_t samples = 0;
};

inline std::vector<k_summary> summarize_by_k(const sweep_table& table, selection_method method)
{
    std::map<std::size_t, k_summary> acc;
    for (const auto& r : table.rows) {
        if (r.method != method)
            continue;
        auto& s = acc[r.k_total];
        s.k_total = r.k_total;
        s.mean_sum_se += r.sum_se;
        s.mean_individual_se += r.mean_individual_se;
        ++s.samples;
    }
    std::vector<k_summary> out;
    for (auto& [k, s] : acc) {
        s.mean_sum_se /= static_cast<double>(s.samples);
        s.mean_individual_se /= static_cast<double>(s.samples);
        out.push_back(s);
    }
    return out;
}

/// Largest k whose (trial-averaged) mean individual SE reaches the threshold;
/// 0 when none does.
inline std::size_t max_users_for_min_se(const sweep_table& table, selection_method method, double threshold_se)
{
    const auto by_k = summarize_by_k(table, method);
    if (by_k.empty())
        throw error(errc::empty_table, "no rows for method " + std::string(to_string(method)));
    for (std::size_t i = 1; i < by_k.size(); ++i)
        if (by_k[i].k_total != by_k[i - 1].k_total + 1)
            throw error(errc::invalid_argument, "table does not cover a contiguous k range");
    std::size_t best = 0;
    for (const auto& s : by_k)
        if (s.mean_individual_se >= threshold_se)
            best = std::max(best, s.k_total);
    return best;
}

struct peak {
    std::size_t k_ground = 0;
    std::size_t k_aerial = 0;
    double sum_se = 0.0;
    selection_method method = selection_method::sus;
};

/// Row with the largest summed SE; ties go to fewer total users, then fewer
/// aerial users. Restricted to one method when given.
inline peak find_peak(const sweep_table& table, std::optional<selection_method> method = std::nullopt)
{
    const sweep_row* best = nullptr;
    for (const auto& r : table.rows) {
        if (method && r.method != *method)
            continue;
        if (!best || r.sum_se > best->sum_se ||
            (r.sum_se == best->sum_se && (r.k_total < best->k_total || (r.k_total == best->k_total && r.k_aerial < best->k_aerial))))
            best = &r;
    }
    if (!best)
        throw error(errc::empty_table, "cannot find the peak of an empty table");
    return {best->k_ground, best->k_aerial, best->sum_se, best->method};
}

struct oracle_result {
    std::vector<std::size_t> best_subset;
    double best_sum_se = 0.0;
    /// Summed SE of every schedulable subset, in lexicographic subset order.
    std::vector<double> all_sums;
    std::size_t skipped_ill_conditioned = 0;
};

inline double binomial(std::size_t n, std::size_t k)
{
    if (k > n)
        return 0.0;
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

/// Brute force over every k-subset of the pool. Subsets whose Gram matrix
/// exceeds the condition cap cannot be zero-forced and are skipped.
inline oracle_result exhaustive_oracle(const csi_dataset& pool, std::size_t k, double tx_power = 1.0, double budget = 1e6,
                                       double condition_cap = default_condition_cap)
{
    const std::size_t n = pool.size();
    if (k < 1 || k > n)
        throw error(errc::out_of_range, "k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (binomial(n, k) > budget)
        throw error(errc::budget_exceeded, fmt::format("C({}, {}) = {:.0f} subsets exceeds the budget of {:.0f}", n, k, binomial(n, k), budget));

    oracle_result out;
    out.best_sum_se = -1.0;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
        selection_result sel;
        sel.method = selection_method::random;
        sel.chosen = idx;
        for (auto i : idx)
            ++sel.per_layer_counts[pool[i].tag];
        try {
            const auto rep = evaluate_selection(pool, sel, tx_power, condition_cap);
            out.all_sums.push_back(rep.sum_se);
            if (rep.sum_se > out.best_sum_se) {
                out.best_sum_se = rep.sum_se;
                out.best_subset = idx;
            }
        } catch (const error& e) {
            if (e.code() != errc::ill_conditioned)
                throw;
            ++out.skipped_ill_conditioned;
        }

        // Next combination in lexicographic order.
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
    if (out.best_subset.empty())
        throw error(errc::ill_conditioned, "no subset of the pool can be zero-forced");
    return out;
}

inline constexpr std::string_view csv_header = "method,k_total,k_ground,k_aerial,trial,sum_se,mean_individual_se,fallback_rank";

/// Six significant digits, '.' decimal separator regardless of locale.
inline std::string format_value(double v) { return fmt::format("{:.6g}", v); }

/// CSV with `\n` line endings. An absent fallback rank is written as -1.
inline std::string to_csv(const sweep_table& table)
{
    std::string out(csv_header);
    out += '\n';
    for (const auto& r : table.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r.method), r.k_total, r.k_ground, r.k_aerial, r.trial, format_value(r.sum_se),
                           format_value(r.mean_individual_se), r.fallback_rank ? static_cast<long long>(*r.fallback_rank) : -1LL);
    }
    return out;
}

inline sweep_table parse_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || kv_config::trim(line) != csv_header)
        throw error(errc::format_mismatch, "sweep CSV must start with the header '" + std::string(csv_header) + "'");
    sweep_table table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (kv_config::trim(line).empty())
            continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (f.size() != 8)
            throw error(errc::format_mismatch, "CSV line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
        sweep_row r;
        r.method = parse_selection_method(kv_config::trim(f[0]));
        r.k_total = static_cast<std::size_t>(kv_config::to_int("k_total", f[1]));
        r.k_ground = static_cast<std::size_t>(kv_config::to_int("k_ground", f[2]));
        r.k_aerial = static_cast<std::size_t>(kv_config::to_int("k_aerial", f[3]));
        r.trial = static_cast<std::size_t>(kv_config::to_int("trial", f[4]));
        r.sum_se = kv_config::to_double("sum_se", f[5]);
        r.mean_individual_se = kv_config::to_double("mean_individual_se", f[6]);
        const auto fb = kv_config::to_int("fallback_rank", f[7]);
        if (fb >= 0)
            r.fallback_rank = static_cast<std::size_t>(fb);
        table.rows.push_back(r);
    }
    return table;
}

} // namespace skyshare
