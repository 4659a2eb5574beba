/*
   Copyright 2026 The fluctx Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fluctx/config.hpp"
#include "fluctx/experiments.hpp"

namespace {

int run(fluctx::Experiment experiment, const std::string& config_path, unsigned workers, bool dry_run) {
    fluctx::ExperimentConfig cfg = fluctx::parse_config(config_path);
    if (cfg.experiment != experiment) {
        std::cerr << "fluctx: config " << config_path << " describes experiment '"
                  << fluctx::experiment_name(cfg.experiment) << "', not '"
                  << fluctx::experiment_name(experiment) << "'\n";
        return 1;
    }
    if (dry_run) {
        fluctx::print_plan(std::cout, cfg);
        return 0;
    }
    const int code = fluctx::run_experiment(cfg, workers);
    std::cout << fluctx::experiment_name(experiment) << ": " << (code == 0 ? "all checks passed" : "some checks failed")
              << " (see " << cfg.output_dir << "/results.csv)\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-noise fluctuation expansions: experiment runner", "fluctx"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "fluctx 0.1.0");

    std::string config_path;
    unsigned workers = 0;
    bool dry_run = false;
    fluctx::Experiment chosen = fluctx::Experiment::recursion_tables;

    for (auto e : fluctx::all_experiments()) {
        const std::string name(fluctx::experiment_name(e));
        auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
        sub->add_option("--config", config_path, "Path to the JSON config")->required()->check(CLI::ExistingFile);
        sub->add_option("--workers", workers, "Worker threads (default: FLUCTX_WORKERS, else 1)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--dry-run", dry_run, "Validate the config and print the planned operations");
        sub->callback([&chosen, e] { chosen = e; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(chosen, config_path, workers, dry_run);
    } catch (const fluctx::ConfigError& e) {
        std::cerr << "fluctx: invalid config: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fluctx: error: " << e.what() << "\n";
        return 1;
    }
}
