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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fluctx/hierarchy.hpp"

namespace fluctx {

enum class Experiment {
    strong_rates,
    weak_rates,
    longtime_scalar,
    recursion_tables,
    equilibrium_check,
    consistency,
    vector_divergence,
};

std::string_view experiment_name(Experiment e);
/// Throws std::invalid_argument for unknown names.
Experiment experiment_from_name(std::string_view name);
const std::vector<Experiment>& all_experiments();

/// Rejected configuration. `pointer()` is the JSON pointer of the offending
/// field, e.g. "/seed" or "/initial_law/r_min".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : std::runtime_error(pointer + ": " + what), pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

struct InitialLawConfig {
    std::string kind;                  ///< deterministic | symmetric_two_point | uniform_annulus
    std::vector<double> point;         ///< deterministic, symmetric_two_point
    double r_min = 0.0;                ///< uniform_annulus
    double r_max = 0.0;                ///< uniform_annulus
    std::vector<double> higher_std;    ///< std of xi_1, xi_2, ...; missing entries are 0

    InitialLaw build(std::size_t dim) const;
    bool operator==(const InitialLawConfig&) const = default;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::recursion_tables;
    std::size_t dim = 1;
    int order = 2;
    std::vector<double> eps_grid;
    std::vector<double> time_grid;
    double dt = 1e-3;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    InitialLawConfig initial_law;
    std::string observable;
    std::string output_dir;
    std::optional<std::size_t> n_batches;  ///< default 100
    std::optional<X0Mode> x0_mode;         ///< default exact_flow

    std::size_t batches() const { return n_batches.value_or(100); }
    X0Mode x0() const { return x0_mode.value_or(X0Mode::exact_flow); }
    bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys, missing required keys and out-of-range values
/// throw ConfigError naming the field.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON document; optional fields appear only when set.
std::string to_json(const ExperimentConfig& cfg, int indent = 2);

}  // namespace fluctx
