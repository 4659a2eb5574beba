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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "fluctx/config.hpp"
#include "fluctx/equilibrium.hpp"
#include "fluctx/errors.hpp"
#include "fluctx/estimators.hpp"
#include "fluctx/experiments.hpp"
#include "fluctx/model.hpp"
#include "fluctx/observables.hpp"
#include "fluctx/recursions.hpp"

namespace py = pybind11;
using namespace fluctx;

namespace {

using RationalPair = std::pair<std::string, std::string>;

RationalPair to_pair(const Rational& q) {
    return {boost::multiprecision::numerator(q).str(), boost::multiprecision::denominator(q).str()};
}

// {(m, i): ((num, den), (num, den))} for the + and - wells.
py::dict table_dict(const RationalTable& t) {
    py::dict out;
    for (int m = 0; m <= t.order(); ++m)
        for (int i = 0; i <= m; ++i)
            out[py::make_tuple(m, i)] = py::make_tuple(to_pair(t.plus(m, i)), to_pair(t.minus(m, i)));
    return out;
}

InitialLaw make_law(const std::string& kind, std::vector<double> point, double r_min, double r_max,
                    const std::vector<double>& higher_std, std::size_t dim) {
    InitialLawConfig c;
    c.kind = kind;
    c.point = std::move(point);
    c.r_min = r_min;
    c.r_max = r_max;
    c.higher_std = higher_std;
    return c.build(dim);
}

SimConfig make_sim(std::size_t dim, int order, double eps, double dt, double horizon) {
    SimConfig c;
    c.dim = dim;
    c.order = order;
    c.eps = eps;
    c.dt = dt;
    c.horizon = horizon;
    return c;
}

McOptions make_opts(std::uint64_t seed, std::size_t n_paths, std::size_t n_batches, unsigned workers) {
    McOptions o;
    o.seed = seed;
    o.n_paths = n_paths;
    o.n_batches = n_batches;
    o.workers = workers;
    return o;
}

py::tuple est_tuple(const McEstimate& e) { return py::make_tuple(e.value, e.std_error); }

std::vector<py::tuple> est_list(const std::vector<McEstimate>& v) {
    std::vector<py::tuple> out;
    for (const auto& e : v) out.push_back(est_tuple(e));
    return out;
}

}  // namespace

PYBIND11_MODULE(_fluctx, m) {
    m.doc() = "Small-noise fluctuation expansions for the double-well gradient SDE";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

    py::class_<Observable>(m, "Observable")
        .def_static("parse", &Observable::parse, py::arg("literal"), py::arg("dim") = 0)
        .def_property_readonly("dim", &Observable::dim)
        .def_property_readonly("max_degree", &Observable::max_degree)
        .def("__call__", [](const Observable& F, const std::vector<double>& x) {
            return F.eval(std::span<const double>(x));
        })
        .def("derivative", [](const Observable& F, int order, const std::vector<double>& x,
                              const std::vector<std::vector<double>>& vs) {
            std::vector<StateVector> dirs;
            for (const auto& v : vs) dirs.emplace_back(std::span<const double>(v));
            return F.apply_derivative(order, StateVector(std::span<const double>(x)), dirs);
        })
        .def("__str__", &Observable::to_string);

    m.def("potential", [](const std::vector<double>& x) {
        return model::potential_value(StateVector(std::span<const double>(x)));
    });
    m.def("flow", [](const std::vector<double>& x0, double t) {
        const auto x = model::flow_exact(StateVector(std::span<const double>(x0)), t);
        return std::vector<double>(x.coords().begin(), x.coords().end());
    });

    m.def("c_table", [](int n) { return table_dict(*recursions::c_table(n)); }, py::arg("n"));
    m.def("d_table", [](int n) { return table_dict(*recursions::d_table(n)); }, py::arg("n"));
    m.def("tables_agree", [](int n) { return recursions::c_table(n)->same_entries(*recursions::d_table(n)); });
    m.def("b_coeff", [](int mm, const Observable& F, double p_plus) {
        return recursions::b_coeff(mm, F, Rational(p_plus), *recursions::c_table(std::max(mm, 2)));
    }, py::arg("m"), py::arg("F"), py::arg("p_plus") = 0.5);
    m.def("big_b_coeff", [](int mm, const Observable& F) {
        return recursions::big_b_coeff(mm, F, *recursions::d_table(std::max(mm, 2)));
    }, py::arg("m"), py::arg("F"));

    m.def("gibbs_expectation", [](const Observable& F, double eps) {
        return equilibrium::gibbs_expectation(F, eps, equilibrium::QuadratureSpec::for_eps(eps));
    }, py::arg("F"), py::arg("eps"));
    m.def("log_partition_function", [](double eps) {
        return equilibrium::log_partition_function(eps, equilibrium::QuadratureSpec::for_eps(eps));
    }, py::arg("eps"));
    m.def("stationarity_defect", [](const Observable& F, double eps) {
        return equilibrium::stationarity_terms(F, eps, equilibrium::QuadratureSpec::for_eps(eps)).defect();
    }, py::arg("F"), py::arg("eps"));

    m.def("estimate_a", [](const std::vector<int>& orders, const std::vector<double>& times, const Observable& F,
                           double dt, std::uint64_t seed, std::size_t n_paths, const std::string& law,
                           std::vector<double> point, double r_min, double r_max,
                           const std::vector<double>& higher_std, std::size_t n_batches, unsigned workers) {
        const int top = *std::max_element(orders.begin(), orders.end());
        const auto cfg = make_sim(F.dim(), std::max(top, 1), 0.1, dt, times.back());
        std::vector<std::size_t> steps;
        for (double t : times) steps.push_back(cfg.step_index(t));
        const auto initial = make_law(law, std::move(point), r_min, r_max, higher_std, F.dim());
        std::vector<McEstimate> est;
        {
            py::gil_scoped_release release;
            est = estimate_a_grid(orders, steps, F, cfg, initial, make_opts(seed, n_paths, n_batches, workers));
        }
        return est_list(est);
    }, py::arg("orders"), py::arg("times"), py::arg("F"), py::arg("dt") = 1e-3, py::arg("seed") = 0,
       py::arg("n_paths") = 10000, py::arg("law") = "uniform_annulus", py::arg("point") = std::vector<double>{},
       py::arg("r_min") = 0.6, py::arg("r_max") = 1.4, py::arg("higher_std") = std::vector<double>{},
       py::arg("n_batches") = 100, py::arg("workers") = 0);

    m.def("estimate_strong_remainder", [](const std::vector<int>& orders, double t, const std::vector<double>& eps,
                                          double dt, std::uint64_t seed, std::size_t n_paths, double r_min,
                                          double r_max, const std::vector<double>& higher_std,
                                          std::size_t n_batches, unsigned workers) {
        const int top = *std::max_element(orders.begin(), orders.end());
        const auto cfg = make_sim(1, std::max(top, 1), eps.front(), dt, t);
        const auto initial = make_law("uniform_annulus", {}, r_min, r_max, higher_std, 1);
        std::vector<McEstimate> est;
        {
            py::gil_scoped_release release;
            est = estimate_strong_remainder(orders, cfg.step_index(t), eps, cfg, initial,
                                            make_opts(seed, n_paths, n_batches, workers));
        }
        return est_list(est);
    }, py::arg("orders"), py::arg("t"), py::arg("eps"), py::arg("dt") = 1e-3, py::arg("seed") = 0,
       py::arg("n_paths") = 10000, py::arg("r_min") = 0.6, py::arg("r_max") = 1.4,
       py::arg("higher_std") = std::vector<double>{}, py::arg("n_batches") = 100, py::arg("workers") = 0);

    m.def("load_config", [](const std::filesystem::path& p) { return to_json(parse_config(p)); });
    m.def("run_experiment", [](const std::filesystem::path& p, unsigned workers) {
        const auto cfg = parse_config(p);
        py::gil_scoped_release release;
        return run_experiment(cfg, workers);
    }, py::arg("config"), py::arg("workers") = 0);
}
