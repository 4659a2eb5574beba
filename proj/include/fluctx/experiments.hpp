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
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fluctx/config.hpp"
#include "fluctx/recursions.hpp"

namespace fluctx {

/// Where a reference value comes from.
enum class Provenance { paper, derived, trivial, none };

std::string_view provenance_name(Provenance p);

/// One line of results.csv.
struct ResultRow {
    std::string experiment;
    std::string check;
    std::string params;  ///< `key=value` pairs joined by ';'
    double estimate = 0.0;
    std::optional<double> std_error;
    std::optional<double> reference;
    Provenance provenance = Provenance::none;
    bool pass = true;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<std::shared_ptr<const RationalTable>> tables;
    double wall_seconds = 0.0;

    bool all_pass() const;
};

/// Node of the planned operation DAG shown by --dry-run.
struct PlanNode {
    std::size_t id = 0;
    std::string label;
    std::vector<std::size_t> deps;
};

std::vector<PlanNode> plan_experiment(const ExperimentConfig& cfg);
void print_plan(std::ostream& os, const ExperimentConfig& cfg);

/// Runs the experiment in memory. `workers` = 0 defers to FLUCTX_WORKERS.
ExperimentResult run_experiment_rows(const ExperimentConfig& cfg, unsigned workers = 0);

/// Header `experiment,check,params,estimate,stderr,reference,provenance,pass`
/// followed by one line per row. Doubles use the shortest round-trip form.
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// Header `family,m,i,numerator,denominator` followed by every table.
void write_tables_csv(std::ostream& os, const std::vector<std::shared_ptr<const RationalTable>>& tables);

/// Runs the experiment and writes results.csv, tables.csv (when tables were
/// produced) and manifest.json into cfg.output_dir. Returns 0 when every
/// row passes and 2 otherwise; runtime and I/O failures throw.
int run_experiment(const ExperimentConfig& cfg, unsigned workers = 0);

}  // namespace fluctx
