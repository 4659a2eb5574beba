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

#include "fluctx/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fluctx/combinatorics.hpp"
#include "fluctx/errors.hpp"
#include "fluctx/observables.hpp"
#include "json.hpp"

namespace fluctx {

using nlohmann::json;

namespace {

struct NamedExperiment {
    Experiment id;
    std::string_view name;
};

constexpr std::array<NamedExperiment, 7> kExperiments{{
    {Experiment::strong_rates, "strong_rates"},
    {Experiment::weak_rates, "weak_rates"},
    {Experiment::longtime_scalar, "longtime_scalar"},
    {Experiment::recursion_tables, "recursion_tables"},
    {Experiment::equilibrium_check, "equilibrium_check"},
    {Experiment::consistency, "consistency"},
    {Experiment::vector_divergence, "vector_divergence"},
}};

const std::set<std::string> kTopKeys{"experiment", "dim",         "order",      "eps_grid",
                                     "time_grid",  "dt",          "n_paths",    "seed",
                                     "initial_law", "observable", "output_dir", "n_batches",
                                     "x0_mode"};
const std::set<std::string> kRequired{"experiment", "dim",  "order",   "eps_grid",
                                      "time_grid",  "dt",   "n_paths", "seed",
                                      "initial_law", "observable", "output_dir"};
const std::set<std::string> kLawKeys{"kind", "point", "r_min", "r_max", "higher_std"};

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

const json& field(const json& obj, const std::string& ptr, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(child(ptr, key), "required field is missing");
    return *it;
}

std::uint64_t as_unsigned(const json& v, const std::string& ptr) {
    if (!v.is_number_unsigned()) throw ConfigError(ptr, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

double as_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ConfigError(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(ptr, "expected a finite number");
    return x;
}

std::string as_string(const json& v, const std::string& ptr) {
    if (!v.is_string()) throw ConfigError(ptr, "expected a string");
    return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& ptr) {
    if (!v.is_array()) throw ConfigError(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], ptr + "/" + std::to_string(k)));
    return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& ptr) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError(child(ptr, key), "unknown field");
}

bool is_scalar_experiment(Experiment e) { return e != Experiment::vector_divergence; }

bool uses_monte_carlo(Experiment e) {
    return e == Experiment::strong_rates || e == Experiment::weak_rates ||
           e == Experiment::longtime_scalar || e == Experiment::vector_divergence;
}

InitialLawConfig parse_law(const json& v, std::size_t dim, int order) {
    const std::string ptr = "/initial_law";
    if (!v.is_object()) throw ConfigError(ptr, "expected an object");
    reject_unknown(v, kLawKeys, ptr);
    InitialLawConfig law;
    law.kind = as_string(field(v, ptr, "kind"), child(ptr, "kind"));
    if (law.kind == "deterministic" || law.kind == "symmetric_two_point") {
        law.point = as_numbers(field(v, ptr, "point"), child(ptr, "point"));
        if (law.point.size() != dim) throw ConfigError(child(ptr, "point"), "length must equal dim");
        double norm2 = 0.0;
        for (double x : law.point) norm2 += x * x;
        if (norm2 == 0.0) throw ConfigError(child(ptr, "point"), "xi_0 must be nonzero");
        if (v.contains("r_min") || v.contains("r_max"))
            throw ConfigError(child(ptr, v.contains("r_min") ? "r_min" : "r_max"),
                              "only allowed for uniform_annulus");
    } else if (law.kind == "uniform_annulus") {
        law.r_min = as_number(field(v, ptr, "r_min"), child(ptr, "r_min"));
        law.r_max = as_number(field(v, ptr, "r_max"), child(ptr, "r_max"));
        if (!(law.r_min > 0.0)) throw ConfigError(child(ptr, "r_min"), "must be positive");
        if (!(law.r_max > law.r_min)) throw ConfigError(child(ptr, "r_max"), "must exceed r_min");
        if (v.contains("point")) throw ConfigError(child(ptr, "point"), "not allowed for uniform_annulus");
    } else {
        throw ConfigError(child(ptr, "kind"),
                          "expected deterministic, symmetric_two_point or uniform_annulus");
    }
    if (v.contains("higher_std")) {
        law.higher_std = as_numbers(v["higher_std"], child(ptr, "higher_std"));
        for (std::size_t k = 0; k < law.higher_std.size(); ++k)
            if (law.higher_std[k] < 0.0)
                throw ConfigError(child(ptr, "higher_std/" + std::to_string(k)), "must be non-negative");
        if (law.higher_std.size() > static_cast<std::size_t>(std::max(order, 0)))
            throw ConfigError(child(ptr, "higher_std"), "more entries than the expansion order");
    }
    return law;
}

void check_grid_times(const ExperimentConfig& cfg) {
    for (std::size_t k = 0; k < cfg.time_grid.size(); ++k) {
        const std::string ptr = "/time_grid/" + std::to_string(k);
        const double t = cfg.time_grid[k];
        if (!(t > 0.0)) throw ConfigError(ptr, "times must be positive");
        const double steps = t / cfg.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            throw ConfigError(ptr, "time is not a multiple of dt");
        if (k > 0 && !(t > cfg.time_grid[k - 1])) throw ConfigError(ptr, "times must increase");
    }
}

void validate(const ExperimentConfig& cfg) {
    const Experiment e = cfg.experiment;
    if (cfg.dim == 0) throw ConfigError("/dim", "must be at least 1");
    if (is_scalar_experiment(e) && cfg.dim != 1)
        throw ConfigError("/dim", "this experiment is defined for dim = 1");
    if (e == Experiment::vector_divergence && cfg.dim < 2)
        throw ConfigError("/dim", "vector_divergence needs dim >= 2");
    if (cfg.order < 0 || cfg.order > kMaxOrder)
        throw ConfigError("/order", "must lie in [0, " + std::to_string(kMaxOrder) + "]");
    if ((e == Experiment::longtime_scalar || e == Experiment::vector_divergence) && cfg.order < 2)
        throw ConfigError("/order", "this experiment needs order >= 2");

    for (std::size_t k = 0; k < cfg.eps_grid.size(); ++k) {
        const double eps = cfg.eps_grid[k];
        const std::string ptr = "/eps_grid/" + std::to_string(k);
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(ptr, "eps must lie in (0, 1)");
        if (e == Experiment::equilibrium_check && !(eps >= 0.01 && eps <= 0.3))
            throw ConfigError(ptr, "equilibrium residual fits use eps in [0.01, 0.3]");
    }
    if ((e == Experiment::strong_rates || e == Experiment::weak_rates ||
         e == Experiment::equilibrium_check) &&
        std::set<double>(cfg.eps_grid.begin(), cfg.eps_grid.end()).size() < 4)
        throw ConfigError("/eps_grid", "rate fits need at least 4 distinct values");

    if (!(cfg.dt > 0.0 && cfg.dt <= 1e-2)) throw ConfigError("/dt", "must lie in (0, 0.01]");
    check_grid_times(cfg);
    if (uses_monte_carlo(e) && cfg.time_grid.empty())
        throw ConfigError("/time_grid", "at least one time is required");

    if (cfg.n_batches && *cfg.n_batches < 20) throw ConfigError("/n_batches", "must be at least 20");
    if (uses_monte_carlo(e) && cfg.n_paths < cfg.batches())
        throw ConfigError("/n_paths", "must be at least n_batches");

    try {
        (void)Observable::parse(cfg.observable, cfg.dim);
    } catch (const std::exception& ex) {
        throw ConfigError("/observable", ex.what());
    }
    if (cfg.output_dir.empty()) throw ConfigError("/output_dir", "must be non-empty");
}

}  // namespace

std::string_view experiment_name(Experiment e) {
    for (const auto& n : kExperiments)
        if (n.id == e) return n.name;
    throw std::invalid_argument("unknown experiment id");
}

Experiment experiment_from_name(std::string_view name) {
    for (const auto& n : kExperiments)
        if (n.name == name) return n.id;
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

const std::vector<Experiment>& all_experiments() {
    static const std::vector<Experiment> all = [] {
        std::vector<Experiment> v;
        for (const auto& n : kExperiments) v.push_back(n.id);
        return v;
    }();
    return all;
}

InitialLaw InitialLawConfig::build(std::size_t dim) const {
    InitialLaw law = [&] {
        if (kind == "uniform_annulus") return InitialLaw::uniform_annulus(dim, r_min, r_max);
        StateVector p(point.size());
        for (std::size_t a = 0; a < point.size(); ++a) p[a] = point[a];
        if (kind == "symmetric_two_point") return InitialLaw::symmetric_two_point(p);
        return InitialLaw::deterministic(p);
    }();
    for (std::size_t k = 0; k < higher_std.size(); ++k) law.with_gaussian(static_cast<int>(k + 1), higher_std[k]);
    return law;
}

ExperimentConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ConfigError("", std::string("malformed JSON: ") + ex.what());
    }
    if (!doc.is_object()) throw ConfigError("", "top level must be an object");
    reject_unknown(doc, kTopKeys, "");
    for (const auto& key : kRequired)
        if (!doc.contains(key)) throw ConfigError("/" + key, "required field is missing");

    ExperimentConfig cfg;
    const std::string name = as_string(doc["experiment"], "/experiment");
    try {
        cfg.experiment = experiment_from_name(name);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError("/experiment", ex.what());
    }
    cfg.dim = static_cast<std::size_t>(as_unsigned(doc["dim"], "/dim"));
    const std::uint64_t order = as_unsigned(doc["order"], "/order");
    if (order > static_cast<std::uint64_t>(kMaxOrder))
        throw ConfigError("/order", "must lie in [0, " + std::to_string(kMaxOrder) + "]");
    cfg.order = static_cast<int>(order);
    cfg.eps_grid = as_numbers(doc["eps_grid"], "/eps_grid");
    cfg.time_grid = as_numbers(doc["time_grid"], "/time_grid");
    cfg.dt = as_number(doc["dt"], "/dt");
    cfg.n_paths = static_cast<std::size_t>(as_unsigned(doc["n_paths"], "/n_paths"));
    cfg.seed = as_unsigned(doc["seed"], "/seed");
    cfg.initial_law = parse_law(doc["initial_law"], cfg.dim, cfg.order);
    cfg.observable = as_string(doc["observable"], "/observable");
    cfg.output_dir = as_string(doc["output_dir"], "/output_dir");
    if (doc.contains("n_batches")) cfg.n_batches = static_cast<std::size_t>(as_unsigned(doc["n_batches"], "/n_batches"));
    if (doc.contains("x0_mode")) {
        const std::string mode = as_string(doc["x0_mode"], "/x0_mode");
        if (mode == "exact_flow") cfg.x0_mode = X0Mode::exact_flow;
        else if (mode == "integrated") cfg.x0_mode = X0Mode::integrated;
        else throw ConfigError("/x0_mode", "expected exact_flow or integrated");
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string to_json(const ExperimentConfig& cfg, int indent) {
    json law = json::object();
    law["kind"] = cfg.initial_law.kind;
    if (cfg.initial_law.kind == "uniform_annulus") {
        law["r_min"] = cfg.initial_law.r_min;
        law["r_max"] = cfg.initial_law.r_max;
    } else {
        law["point"] = cfg.initial_law.point;
    }
    if (!cfg.initial_law.higher_std.empty()) law["higher_std"] = cfg.initial_law.higher_std;

    json doc = json::object();
    doc["experiment"] = std::string(experiment_name(cfg.experiment));
    doc["dim"] = cfg.dim;
    doc["order"] = cfg.order;
    doc["eps_grid"] = cfg.eps_grid;
    doc["time_grid"] = cfg.time_grid;
    doc["dt"] = cfg.dt;
    doc["n_paths"] = cfg.n_paths;
    doc["seed"] = cfg.seed;
    doc["initial_law"] = law;
    doc["observable"] = cfg.observable;
    doc["output_dir"] = cfg.output_dir;
    if (cfg.n_batches) doc["n_batches"] = *cfg.n_batches;
    if (cfg.x0_mode) doc["x0_mode"] = *cfg.x0_mode == X0Mode::integrated ? "integrated" : "exact_flow";
    return doc.dump(indent);
}

}  // namespace fluctx
