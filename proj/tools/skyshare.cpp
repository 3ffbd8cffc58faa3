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

#include <skyshare/cli.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv)
{
    CLI::App app{"skyshare: aerial/terrestrial massive MIMO scheduling sweeps"};
    app.require_subcommand(1);

    std::string config_file;
    std::map<std::string, std::string> flags;
    for (auto name : skyshare::cli::commands) {
        auto* sub = app.add_subcommand(std::string(name));
        sub->add_option("--config", config_file, "flat key = value configuration file");
        for (const auto& key : skyshare::cli::config_keys) {
            const std::string k(key.name);
            sub->add_option_function<std::string>("--" + k, [&flags, k](const std::string& v) { flags[k] = v; }, std::string(key.help));
        }
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        skyshare::kv_config given;
        if (!config_file.empty())
            given = skyshare::kv_config::load(config_file);
        for (const auto& [k, v] : flags)
            given.set(k, v);
        const auto cfg = skyshare::cli::run_config::from(given);
        skyshare::cli::run(command, cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "skyshare " << command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
