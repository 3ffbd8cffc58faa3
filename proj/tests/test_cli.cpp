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

#include <gtest/gtest.h>

#include <skyshare/cli.hpp>

#include <filesystem>
#include <sstream>

using namespace skyshare;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "skyshare_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    const auto b = read_file(p);
    return {reinterpret_cast<const char*>(b.data()), b.size()};
}

kv_config small_config(const fs::path& out)
{
    return kv_config::parse("m-rows = 4\nm-cols = 4\ninterval-ms = 40\npool-ground = 6\npool-aerial = 5\ntrials = 3\nout = " + out.string() + "\n");
}

void run_cmd(std::string_view command, const kv_config& kv)
{
    std::ostringstream log;
    cli::run(command, cli::run_config::from(kv), log);
}

} // namespace

TEST(RunConfig, DefaultsAndOverrides)
{
    const auto cfg = cli::run_config::from(kv_config{});
    EXPECT_EQ(cfg.mode, cli::run_config::source::generate);
    EXPECT_EQ(cfg.snr_db, 20.0);
    EXPECT_EQ(cfg.sus.alpha, 0.6);
    EXPECT_EQ(cfg.trials, 20u);
    EXPECT_EQ(cfg.pool, (per_layer<std::size_t>{36, 28}));
    EXPECT_EQ(cfg.total.last, 0u);
    EXPECT_EQ(cfg.ground.last, 36u);
    EXPECT_EQ(cfg.aerial.last, 28u);
    EXPECT_EQ(cfg.scenario.m_antennas(), 64u);

    auto kv = kv_config::parse("alpha = 0.4\nk_aerial_db = inf\nseed = 5\n");
    const auto c2 = cli::run_config::from(kv);
    EXPECT_EQ(c2.sus.alpha, 0.4);
    EXPECT_TRUE(std::isinf(c2.scenario.rician_k_db.aerial));
    EXPECT_EQ(c2.scenario.seed, 5u);
}

TEST(RunConfig, RejectsBadInput)
{
    EXPECT_THROW(cli::run_config::from(kv_config::parse("bogus = 1\n")), error);
    EXPECT_THROW(cli::run_config::from(kv_config::parse("alpha = 0\n")), error);
    EXPECT_THROW(cli::run_config::from(kv_config::parse("mode = ingest\n")), error);
    EXPECT_THROW(cli::run_config::from(kv_config::parse("csi = a.conf\n")), error);
    EXPECT_THROW(cli::run_config::from(kv_config::parse("snr-db = loud\n")), error);
    EXPECT_THROW(kv_config::parse("no equals sign\n"), error);
}

TEST(Cli, GridOfTwoByTwoWritesThreeRows)
{
    const auto out = fresh_dir("grid");
    auto kv = small_config(out);
    kv.set("ground-max", "1");
    kv.set("aerial-max", "1");
    run_cmd("sweep-grid", kv);
    const auto csv = slurp(out / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(csv.rfind(std::string(csv_header) + "\n", 0), 0u);
    EXPECT_TRUE(fs::exists(out / "summary.txt"));
    EXPECT_TRUE(fs::exists(out / "meta.txt"));
    EXPECT_FALSE(fs::exists(out / "sweep.csv.tmp"));
}

TEST(Cli, SameConfigTwiceIsByteIdentical)
{
    const auto a = fresh_dir("twice_a");
    const auto b = fresh_dir("twice_b");
    run_cmd("sweep-total", small_config(a));
    run_cmd("sweep-total", small_config(b));
    EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
    EXPECT_EQ(slurp(a / "summary.txt"), slurp(b / "summary.txt"));
    EXPECT_EQ(slurp(a / "meta.txt"), slurp(b / "meta.txt"));
    const auto summary = slurp(a / "summary.txt");
    EXPECT_NE(summary.find("peak.sus = "), std::string::npos);
    EXPECT_NE(summary.find("capacity.random.8 = "), std::string::npos);
}

TEST(Cli, GenerateThenIngestRoundTrip)
{
    const auto gen = fresh_dir("gen");
    run_cmd("generate", small_config(gen));
    ASSERT_TRUE(fs::exists(gen / "csi_terrestrial.bin"));
    ASSERT_TRUE(fs::exists(gen / "csi_aerial.conf"));

    const auto ing = fresh_dir("ing");
    auto kv = small_config(ing);
    kv.set("mode", "ingest");
    kv.set("csi", (gen / "csi_terrestrial.conf").string() + "," + (gen / "csi_aerial.conf").string());
    run_cmd("ingest", kv);
    const auto meta = slurp(ing / "meta.txt");
    EXPECT_NE(meta.find("records-terrestrial = "), std::string::npos);
    run_cmd("sweep-grid", kv);
    EXPECT_TRUE(fs::exists(ing / "sweep.csv"));

    // report regenerates a summary from the CSV alone.
    const auto rep = fresh_dir("rep");
    auto rk = small_config(rep);
    rk.set("csv", (ing / "sweep.csv").string());
    run_cmd("report", rk);
    EXPECT_NE(slurp(rep / "summary.txt").find("peak.sus-layered = "), std::string::npos);
}

TEST(Cli, TruncatedCaptureFailsWithoutOutputs)
{
    const auto dir = fresh_dir("truncated");
    write_file(dir / "bad.bin", std::vector<std::byte>(255));
    std::ofstream(dir / "bad.conf") << "file = bad.bin\nm-antennas = 64\nlayer = terrestrial\n";
    auto kv = small_config(dir / "out");
    kv.set("mode", "ingest");
    kv.set("csi", (dir / "bad.conf").string());
    try {
        run_cmd("sweep-total", kv);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::truncated_file);
    }
    EXPECT_FALSE(fs::exists(dir / "out" / "sweep.csv"));
}

TEST(Cli, FormatOverrideAppliesToCaptures)
{
    const auto gen = fresh_dir("fmt_gen");
    run_cmd("generate", small_config(gen));
    const auto ing = fresh_dir("fmt_ing");
    auto kv = small_config(ing);
    kv.set("mode", "ingest");
    kv.set("csi", (gen / "csi_terrestrial.conf").string());
    kv.set("format", "q1.15-be");
    run_cmd("ingest", kv);
    const auto be = slurp(ing / "meta.txt");
    kv.set("format", "q1.15-le");
    run_cmd("ingest", kv);
    EXPECT_NE(slurp(ing / "meta.txt"), be);
}
