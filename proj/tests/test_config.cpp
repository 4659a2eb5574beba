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

#include <string>

#include "doctest.h"
#include "fluctx/config.hpp"
#include "json.hpp"

using namespace fluctx;
using nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({
      "experiment": "strong_rates",
      "dim": 1,
      "order": 2,
      "eps_grid": [0.4, 0.2, 0.1, 0.05],
      "time_grid": [2.0],
      "dt": 0.001,
      "n_paths": 1000,
      "seed": 42,
      "initial_law": {"kind": "uniform_annulus", "r_min": 0.6, "r_max": 1.4, "higher_std": [1.0]},
      "observable": "x^2",
      "output_dir": "out"
    })");
}

std::string pointer_of(const json& doc) {
    try {
        (void)parse_config_text(doc.dump());
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("minimal config round-trips") {
    const auto cfg = parse_config_text(minimal().dump());
    CHECK(json::parse(to_json(cfg)) == minimal());
    CHECK(parse_config_text(to_json(cfg)) == cfg);
    auto with_optional = minimal();
    with_optional["n_batches"] = 50;
    with_optional["x0_mode"] = "integrated";
    const auto cfg2 = parse_config_text(with_optional.dump());
    CHECK(cfg2.batches() == 50);
    CHECK(cfg2.x0() == X0Mode::integrated);
    CHECK(json::parse(to_json(cfg2)) == with_optional);
}

TEST_CASE("eps grid parses to the exact binary64 values") {
    auto doc = minimal();
    const auto cfg = parse_config_text(R"({"experiment": "strong_rates", "dim": 1, "order": 2,
        "eps_grid": [0.4, 0.2, 0.1, 0.05], "time_grid": [2.0], "dt": 0.001, "n_paths": 1000, "seed": 42,
        "initial_law": {"kind": "uniform_annulus", "r_min": 0.6, "r_max": 1.4}, "observable": "x^2",
        "output_dir": "out"})");
    REQUIRE(cfg.eps_grid.size() == 4);
    CHECK(cfg.eps_grid[0] == 0.4);
    CHECK(cfg.eps_grid[1] == 0.2);
    CHECK(cfg.eps_grid[2] == 0.1);
    CHECK(cfg.eps_grid[3] == 0.05);
    CHECK(cfg.seed == 42u);
}

TEST_CASE("errors name the offending field") {
    auto doc = minimal();
    doc.erase("seed");
    CHECK(pointer_of(doc) == "/seed");

    doc = minimal();
    doc["colour"] = "blue";
    CHECK(pointer_of(doc) == "/colour");

    doc = minimal();
    doc["initial_law"]["shape"] = 1;
    CHECK(pointer_of(doc) == "/initial_law/shape");

    doc = minimal();
    doc["initial_law"]["r_max"] = 0.5;
    CHECK(pointer_of(doc) == "/initial_law/r_max");

    doc = minimal();
    doc["eps_grid"][2] = 1.5;
    CHECK(pointer_of(doc) == "/eps_grid/2");

    doc = minimal();
    doc["eps_grid"] = json::array({0.1, 0.2});
    CHECK(pointer_of(doc) == "/eps_grid");

    doc = minimal();
    doc["dt"] = 0.05;
    CHECK(pointer_of(doc) == "/dt");

    doc = minimal();
    doc["time_grid"] = json::array({0.0015});
    CHECK(pointer_of(doc) == "/time_grid/0");

    doc = minimal();
    doc["seed"] = -3;
    CHECK(pointer_of(doc) == "/seed");

    doc = minimal();
    doc["seed"] = 1.5;
    CHECK(pointer_of(doc) == "/seed");

    doc = minimal();
    doc["observable"] = "x1 + x2";
    CHECK(pointer_of(doc) == "/observable");

    doc = minimal();
    doc["experiment"] = "nonsense";
    CHECK(pointer_of(doc) == "/experiment");

    doc = minimal();
    doc["dim"] = 2;
    CHECK(pointer_of(doc) == "/dim");

    doc = minimal();
    doc["n_batches"] = 10;
    CHECK(pointer_of(doc) == "/n_batches");

    doc = minimal();
    doc["order"] = 13;
    CHECK(pointer_of(doc) == "/order");

    doc = minimal();
    doc["x0_mode"] = "rk4";
    CHECK(pointer_of(doc) == "/x0_mode");

    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[1, 2]"), ConfigError);
}

TEST_CASE("experiment-specific ranges") {
    auto doc = minimal();
    doc["experiment"] = "vector_divergence";
    doc["dim"] = 1;
    CHECK(pointer_of(doc) == "/dim");
    doc["dim"] = 2;
    doc["initial_law"] = json::parse(R"({"kind": "deterministic", "point": [1.0, 0.0]})");
    doc["observable"] = "x1";
    CHECK(pointer_of(doc) == "<accepted>");
    doc["initial_law"]["point"] = json::array({1.0});
    CHECK(pointer_of(doc) == "/initial_law/point");

    doc = minimal();
    doc["experiment"] = "equilibrium_check";
    doc["eps_grid"] = json::array({0.2, 0.1, 0.05, 0.005});
    CHECK(pointer_of(doc) == "/eps_grid/3");
}

TEST_CASE("experiment names") {
    for (auto e : all_experiments()) CHECK(experiment_from_name(experiment_name(e)) == e);
    CHECK(all_experiments().size() == 7);
    CHECK_THROWS(experiment_from_name("strong"));
}
