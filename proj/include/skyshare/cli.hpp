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

// Command driver behind the `skyshare` executable: resolves a flat key-value
// configuration, obtains a candidate pool (synthetic or ingested), runs the
// requested sweep and writes its outputs atomically.

#include "csi.hpp"
#include "csi_io.hpp"
#include "kvconfig.hpp"
#include "sched.hpp"
#include "sweeps.hpp"
#include "synthetic.hpp"

#include <fmt/format.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace skyshare::cli {

struct key_spec {
    std::string_view name;
    std::string_view fallback;
    std::string_view help;
};

// Every key accepted in a config file; each is also a `--name` flag.
inline constexpr std::array config_keys{
    key_spec{"mode", "generate", "data source for sweeps: generate | ingest"},
    key_spec{"csi", "", "comma-separated capture sidecar files (ingest mode)"},
    key_spec{"format", "", "fixed-point format override for ingested captures, e.g. q1.15-le"},
    key_spec{"out", "out", "output directory"},
    key_spec{"snr-db", "20", "average SNR over the dataset after normalization"},
    key_spec{"alpha", "0.6", "SUS orthogonality threshold in (0, 1]"},
    key_spec{"fallback", "max-residual-norm", "SUS behaviour when candidates run out: max-residual-norm | fail"},
    key_spec{"seed", "1", "seed for random selection and subsampling"},
    key_spec{"trials", "20", "random-selection trials per k"},
    key_spec{"threads", "0", "worker threads (0 = hardware concurrency)"},
    key_spec{"tx-power", "1", "per-user transmit power"},
    key_spec{"condition-cap", "1e10", "largest accepted Gram condition number"},
    key_spec{"pool-ground", "36", "terrestrial candidates kept in the pool"},
    key_spec{"pool-aerial", "28", "aerial candidates kept in the pool"},
    key_spec{"pool-policy", "stride", "pool subsampling: stride | seeded-uniform"},
    key_spec{"methods", "random,sus", "methods for sweep-total"},
    key_spec{"k-min", "1", "smallest total user count for sweep-total"},
    key_spec{"k-max", "0", "largest total user count for sweep-total (0 = pool size)"},
    key_spec{"ground-min", "0", "grid: smallest terrestrial quota"},
    key_spec{"ground-max", "-1", "grid: largest terrestrial quota (-1 = pool-ground)"},
    key_spec{"aerial-min", "0", "grid: smallest aerial quota"},
    key_spec{"aerial-max", "-1", "grid: largest aerial quota (-1 = pool-aerial)"},
    key_spec{"thresholds", "8", "comma-separated minimum per-user SE values for the capacity report"},
    key_spec{"csv", "", "report: sweep CSV to summarize (default <out>/sweep.csv)"},
    key_spec{"m-rows", "8", "array rows"},
    key_spec{"m-cols", "8", "array columns"},
    key_spec{"carrier-hz", "2.61e9", "carrier frequency"},
    key_spec{"spacing-wavelengths", "0.5", "array element spacing in wavelengths"},
    key_spec{"bs-height-m", "11", "array centre height"},
    key_spec{"trajectory-length-m", "42.48", "trajectory length"},
    key_spec{"speed-mps", "1.5", "user speed along the trajectory"},
    key_spec{"interval-ms", "1", "sampling interval"},
    key_spec{"altitude-ground-m", "8", "terrestrial layer altitude"},
    key_spec{"altitude-aerial-m", "24", "aerial layer altitude"},
    key_spec{"standoff-m", "30", "horizontal distance between trajectory and array"},
    key_spec{"k-ground-db", "-6", "terrestrial Rician K-factor (inf = LOS only)"},
    key_spec{"k-aerial-db", "0", "aerial Rician K-factor (inf = LOS only)"},
    key_spec{"scenario-seed", "", "seed of the synthetic generator (default: seed)"},
};

inline constexpr std::array<std::string_view, 5> commands{"generate", "ingest", "sweep-total", "sweep-grid", "report"};

/// Fully resolved run configuration.
struct run_config {
    enum class source { generate, ingest };

    source mode = source::generate;
    scenario_config scenario;
    std::vector<std::filesystem::path> csi;
    std::optional<std::string> format;
    std::filesystem::path out = "out";
    double snr_db = 20.0;
    sus_params sus;
    std::uint64_t seed = 1;
    std::size_t trials = 20;
    unsigned threads = 0;
    double tx_power = 1.0;
    double condition_cap = default_condition_cap;
    per_layer<std::size_t> pool{36, 28};
    subsample_policy pool_policy = subsample_policy::stride;
    std::vector<selection_method> methods{selection_method::random, selection_method::sus};
    /// last == 0 means up to min(pool size, antennas), resolved once the pool is known.
    k_range total{1, 0};
    k_range ground{0, 0};
    k_range aerial{0, 0};
    std::vector<double> thresholds{8.0};
    std::optional<std::filesystem::path> csv;
    kv_config resolved;

    sweep_options sweep() const { return {sus, tx_power, condition_cap, threads}; }

    static run_config from(const kv_config& given)
    {
        kv_config c;
        for (const auto& k : config_keys)
            c.set(k.name, k.fallback);
        for (const auto& [key, value] : given.values()) {
            bool known = false;
            for (const auto& k : config_keys)
                known = known || k.name == key;
            if (!known && key != "config")
                throw error(errc::config, "unknown key '" + key + "'");
        }
        c.merge(given);

        auto nonneg = [&](std::string_view key) {
            const auto v = c.get_int(key, 0);
            if (v < 0)
                throw error(errc::config, "key '" + std::string(key) + "' must be nonnegative");
            return static_cast<std::size_t>(v);
        };

        run_config r;
        const auto mode = c.get_string("mode", "generate");
        if (mode == "generate")
            r.mode = source::generate;
        else if (mode == "ingest")
            r.mode = source::ingest;
        else
            throw error(errc::config, "mode must be generate or ingest, got '" + mode + "'");
        for (const auto& p : kv_config::split(c.get_string("csi", ""), ','))
            r.csi.emplace_back(p);
        if (r.mode == source::ingest && r.csi.empty())
            throw error(errc::config, "ingest mode needs --csi");
        if (r.mode == source::generate && !r.csi.empty())
            throw error(errc::config, "--csi given but mode is generate; set mode = ingest");
        if (auto f = c.get_string("format", ""); !f.empty())
            r.format = f;
        r.out = c.get_string("out", "out");
        r.snr_db = c.get_double("snr-db", 20.0);
        r.sus.alpha = c.get_double("alpha", 0.6);
        const auto fb = c.get_string("fallback", "max-residual-norm");
        if (fb == "max-residual-norm")
            r.sus.fallback = sus_fallback::max_residual_norm;
        else if (fb == "fail")
            r.sus.fallback = sus_fallback::fail;
        else
            throw error(errc::config, "fallback must be max-residual-norm or fail");
        r.sus.validate();
        r.seed = static_cast<std::uint64_t>(c.get_int("seed", 1));
        r.trials = nonneg("trials");
        r.threads = static_cast<unsigned>(nonneg("threads"));
        r.tx_power = c.get_double("tx-power", 1.0);
        r.condition_cap = c.get_double("condition-cap", default_condition_cap);
        r.pool = {nonneg("pool-ground"), nonneg("pool-aerial")};
        r.pool_policy = parse_subsample_policy(c.get_string("pool-policy", "stride"));
        r.methods.clear();
        for (const auto& m : kv_config::split(c.get_string("methods", "random,sus"), ','))
            r.methods.push_back(parse_selection_method(m));
        r.total = {nonneg("k-min"), nonneg("k-max")};
        const auto gmax = c.get_int("ground-max", -1);
        const auto amax = c.get_int("aerial-max", -1);
        r.ground = {nonneg("ground-min"), gmax < 0 ? r.pool.terrestrial : static_cast<std::size_t>(gmax)};
        r.aerial = {nonneg("aerial-min"), amax < 0 ? r.pool.aerial : static_cast<std::size_t>(amax)};
        r.thresholds = c.get_double_list("thresholds", {8.0});
        if (auto p = c.get_string("csv", ""); !p.empty())
            r.csv = p;

        auto& s = r.scenario;
        s.m_rows = nonneg("m-rows");
        s.m_cols = nonneg("m-cols");
        s.carrier_hz = c.get_double("carrier-hz", s.carrier_hz);
        s.element_spacing_wavelengths = c.get_double("spacing-wavelengths", s.element_spacing_wavelengths);
        s.bs_height_m = c.get_double("bs-height-m", s.bs_height_m);
        s.trajectory_length_m = c.get_double("trajectory-length-m", s.trajectory_length_m);
        s.trajectory_speed_mps = c.get_double("speed-mps", s.trajectory_speed_mps);
        s.sample_interval_ms = c.get_double("interval-ms", s.sample_interval_ms);
        s.layer_altitudes_m = {c.get_double("altitude-ground-m", 8.0), c.get_double("altitude-aerial-m", 24.0)};
        s.standoff_distance_m = c.get_double("standoff-m", s.standoff_distance_m);
        s.rician_k_db = {c.get_double("k-ground-db", -6.0), c.get_double("k-aerial-db", 0.0)};
        const auto scenario_seed = c.get_string("scenario-seed", "");
        s.seed = scenario_seed.empty() ? r.seed : static_cast<std::uint64_t>(kv_config::to_int("scenario-seed", scenario_seed));
        s.validate();

        r.resolved = std::move(c);
        return r;
    }
};

/// Files produced by one command, staged in memory until all succeed.
class output_set {
public:
    explicit output_set(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(std::string name, std::string content) { text_.emplace_back(std::move(name), std::move(content)); }
    void add(std::string name, std::vector<std::byte> content) { binary_.emplace_back(std::move(name), std::move(content)); }

    /// Writes every file to a temporary name, then renames them into place.
    /// If anything fails, files already written by this call are removed.
    void commit() const
    {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec)
            throw error(errc::io, "cannot create output directory " + dir_.string() + ": " + ec.message());

        std::vector<fs::path> staged, placed;
        auto cleanup = [&] {
            std::error_code ignore;
            for (const auto& p : staged)
                fs::remove(p, ignore);
            for (const auto& p : placed)
                fs::remove(p, ignore);
        };
        try {
            auto stage = [&](const std::string& name, std::span<const std::byte> bytes) {
                const auto tmp = dir_ / (name + ".tmp");
                staged.push_back(tmp);
                write_file(tmp, bytes);
            };
            for (const auto& [name, content] : text_)
                stage(name, std::as_bytes(std::span(content.data(), content.size())));
            for (const auto& [name, content] : binary_)
                stage(name, content);
            for (const auto& tmp : std::vector(staged)) {
                auto final_path = tmp;
                final_path.replace_extension();
                fs::rename(tmp, final_path);
                std::erase(staged, tmp);
                placed.push_back(final_path);
            }
        } catch (...) {
            cleanup();
            throw;
        }
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> text_;
    std::vector<std::pair<std::string, std::vector<std::byte>>> binary_;
};

inline std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

/// Raw (unnormalized) pool from the configured source.
inline csi_dataset acquire_raw(const run_config& cfg)
{
    if (cfg.mode == run_config::source::generate)
        return generate_synthetic(cfg.scenario);
    if (!cfg.format)
        return load_captures(cfg.csi);
    // Format override: rewrite each sidecar's format in memory.
    std::vector<csi_record> all;
    for (const auto& sidecar : cfg.csi) {
        auto kv = kv_config::load(sidecar);
        kv.set("format", *cfg.format);
        const auto desc = capture_descriptor::from_config(kv);
        const auto bin = desc.file.is_absolute() ? desc.file : sidecar.parent_path() / desc.file;
        auto part = load_csi_binary(bin, desc.format, desc.tag, static_cast<std::int64_t>(all.size()), desc.interval_ms);
        if (!all.empty() && part.m_antennas() != all.front().channel.m_antennas())
            throw error(errc::format_mismatch, sidecar.string() + ": antenna count differs from earlier captures");
        all.insert(all.end(), part.records().begin(), part.records().end());
    }
    return csi_dataset(std::move(all));
}

/// Normalized over the full dataset, then reduced to the configured pool.
inline csi_dataset acquire_pool(const run_config& cfg)
{
    const auto full = normalize_to_snr(acquire_raw(cfg), cfg.snr_db);
    return subsample_pool(full, cfg.pool, cfg.pool_policy, cfg.seed);
}

inline std::string meta_text(const run_config& cfg, std::string_view command, const csi_dataset& pool)
{
    std::string out;
    out += fmt::format("command = {}\n", command);
    out += fmt::format("dataset-fingerprint = {}\n", hex64(fingerprint(pool)));
    out += fmt::format("records = {}\n", pool.size());
    out += fmt::format("records-terrestrial = {}\n", pool.count(layer::terrestrial));
    out += fmt::format("records-aerial = {}\n", pool.count(layer::aerial));
    out += fmt::format("m-antennas = {}\n", pool.m_antennas());
    out += fmt::format("scale-applied = {}\n", format_value(pool.scale_applied()));
    if (pool.noise_power())
        out += fmt::format("noise-power = {}\n", format_value(*pool.noise_power()));
    for (const auto& [k, v] : cfg.resolved.values())
        if (k != "out")
            out += fmt::format("config.{} = {}\n", k, v);
    return out;
}

inline std::string summary_text(const sweep_table& table, const std::vector<double>& thresholds)
{
    std::string out;
    out += fmt::format("rows = {}\n", table.rows.size());
    for (auto m : {selection_method::random, selection_method::sus, selection_method::sus_layered}) {
        const auto by_k = summarize_by_k(table, m);
        if (by_k.empty())
            continue;
        const auto name = to_string(m);
        if (m == selection_method::sus_layered) {
            const auto p = find_peak(table, m);
            out += fmt::format("peak.{} = k_ground {} k_aerial {} sum_se {}\n", name, p.k_ground, p.k_aerial, format_value(p.sum_se));
        } else {
            const auto best = std::max_element(by_k.begin(), by_k.end(), [](const k_summary& a, const k_summary& b) {
                return a.mean_sum_se < b.mean_sum_se;
            });
            out += fmt::format("peak.{} = k_total {} mean_sum_se {}\n", name, best->k_total, format_value(best->mean_sum_se));
        }
        bool contiguous = true;
        for (std::size_t i = 1; i < by_k.size(); ++i)
            contiguous = contiguous && by_k[i].k_total == by_k[i - 1].k_total + 1;
        if (contiguous)
            for (double t : thresholds)
                out += fmt::format("capacity.{}.{} = {}\n", name, format_value(t), max_users_for_min_se(table, m, t));
    }
    return out;
}

inline std::string sweep_meta_text(const sweep_meta& m)
{
    return fmt::format("seed = {}\nalpha = {}\nsnr-db = {}\n", m.seed, format_value(m.alpha), format_value(m.snr_db));
}

/// Runs one command. Errors propagate as exceptions; see main() for the exit
/// status mapping.
inline void run(std::string_view command, const run_config& cfg, std::ostream& log)
{
    output_set outputs(cfg.out);
    if (command == "generate") {
        if (cfg.mode != run_config::source::generate)
            throw error(errc::config, "generate needs mode = generate");
        const auto data = generate_synthetic(cfg.scenario);
        double peak = 0.0;
        for (const auto& r : data.records())
            peak = std::max({peak, r.channel.gains().real().cwiseAbs().maxCoeff(), r.channel.gains().imag().cwiseAbs().maxCoeff()});
        // Smallest power of two strictly above every component keeps the
        // largest value representable in Q1.15.
        const double full_scale = peak > 0.0 ? std::ldexp(1.0, std::ilogb(peak) + 1) : 1.0;
        for (layer l : all_layers) {
            std::vector<csi_record> part;
            for (const auto& r : data.records())
                if (r.tag == l)
                    part.push_back(r);
            capture_descriptor d;
            d.file = fmt::format("csi_{}.bin", to_string(l));
            d.format = parse_fixed_point_format("q1.15-le", data.m_antennas(), full_scale);
            d.tag = l;
            d.altitude_m = cfg.scenario.layer_altitudes_m[l];
            d.interval_ms = std::llround(cfg.scenario.sample_interval_ms);
            outputs.add(d.file.string(), encode_csi(part, d.format));
            outputs.add(fmt::format("csi_{}.conf", to_string(l)), d.to_config().serialize());
        }
        outputs.add("meta.txt", meta_text(cfg, command, data));
        outputs.commit();
        log << "generated " << data.size() << " records into " << cfg.out.string() << "\n";
    } else if (command == "ingest") {
        const auto full = normalize_to_snr(acquire_raw(cfg), cfg.snr_db);
        outputs.add("meta.txt", meta_text(cfg, command, full));
        outputs.commit();
        log << "ingested " << full.size() << " records (" << full.count(layer::terrestrial) << " terrestrial, " << full.count(layer::aerial)
            << " aerial), fingerprint " << hex64(fingerprint(full)) << "\n";
    } else if (command == "sweep-total" || command == "sweep-grid") {
        const auto pool = acquire_pool(cfg);
        auto ks = cfg.total;
        if (ks.last == 0)
            ks.last = std::min(pool.size(), pool.m_antennas());
        const auto table = command == "sweep-total" ? sweep_total_users(pool, ks, cfg.methods, cfg.trials, cfg.seed, cfg.sweep())
                                                    : sweep_layer_grid(pool, cfg.ground, cfg.aerial, cfg.seed, cfg.sweep());
        outputs.add("sweep.csv", to_csv(table));
        outputs.add("summary.txt", summary_text(table, cfg.thresholds) + sweep_meta_text(table.meta) +
                                       fmt::format("dataset-fingerprint = {}\n", hex64(table.meta.dataset_fingerprint)));
        outputs.add("meta.txt", meta_text(cfg, command, pool));
        outputs.commit();
        log << "wrote " << table.rows.size() << " rows to " << (cfg.out / "sweep.csv").string() << "\n";
    } else if (command == "report") {
        const auto csv_path = cfg.csv.value_or(cfg.out / "sweep.csv");
        const auto bytes = read_file(csv_path);
        const auto table = parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        const auto text = summary_text(table, cfg.thresholds);
        outputs.add("summary.txt", text);
        outputs.commit();
        log << text;
    } else {
        throw error(errc::config, "unknown command '" + std::string(command) + "'");
    }
}

} // namespace skyshare::cli
