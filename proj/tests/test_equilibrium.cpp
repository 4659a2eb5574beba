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

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fluctx/equilibrium.hpp"
#include "fluctx/errors.hpp"

using namespace fluctx;
using namespace fluctx::equilibrium;

TEST_CASE("partition function scales like sqrt(eps) exp(1/(4 eps))") {
    std::vector<double> ratio;
    for (double eps : {0.2, 0.1, 0.05, 0.02}) {
        const auto spec = QuadratureSpec::for_eps(eps);
        CHECK(spec.tail_bound < 1e-16);
        const double log_z = log_partition_function(eps, spec);
        ratio.push_back(std::exp(log_z - 0.25 / eps) / std::sqrt(eps));
    }
    for (double r : ratio) {
        CHECK(r > 1.0);
        CHECK(r < 5.0);
    }
    CHECK(std::abs(ratio[3] / ratio[2] - 1.0) < 0.05);
    // Two Gaussian wells of curvature 2.
    CHECK(ratio[3] == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(0.02));
    CHECK(partition_function(0.2, QuadratureSpec::for_eps(0.2)) ==
          doctest::Approx(std::exp(log_partition_function(0.2, QuadratureSpec::for_eps(0.2)))));
}

TEST_CASE("half-line quadrature doubled equals the full line") {
    for (double eps : {0.2, 0.05, 0.01}) {
        const auto spec = QuadratureSpec::for_eps(eps);
        const auto one = [](double) { return 1.0; };
        const double full = integrate_shifted(one, spec);
        const double half = integrate_shifted(one, spec, true);
        CHECK(std::abs(2.0 * half / full - 1.0) < 1e-12);
    }
}

TEST_CASE("halving the panel width changes Z by less than 1e-10") {
    const double eps = 0.05;
    const auto coarse = QuadratureSpec::for_eps(eps);
    const auto fine = QuadratureSpec::for_eps(eps, 1e-16, 16, 0.25);
    CHECK(fine.panels > coarse.panels);
    const double a = log_partition_function(eps, coarse);
    const double b = log_partition_function(eps, fine);
    CHECK(std::abs(std::expm1(a - b)) < 1e-10);
}

TEST_CASE("doubling the radius leaves expectations unchanged") {
    const auto F = Observable::parse("x^8 - x^3 + 2*x^2");
    for (double eps : {0.2, 0.05}) {
        const auto spec = QuadratureSpec::for_eps(eps);
        const double a = gibbs_expectation(F, eps, spec);
        const double b = gibbs_expectation(F, eps, spec.scaled_radius(2.0));
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("normalization and parity") {
    for (double eps : {0.2, 0.1, 0.05}) {
        const auto spec = QuadratureSpec::for_eps(eps);
        CHECK(gibbs_expectation(Observable::parse("1"), eps, spec) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(gibbs_expectation(Observable::parse("x"), eps, spec)) < 1e-12);
        CHECK(std::abs(gibbs_expectation(Observable::parse("x^5 - 3*x"), eps, spec)) < 1e-12);
        const auto even = Observable::parse("x^4 + x^2");
        const double half = integrate_shifted([&](double x) { return even.eval(std::span<const double>(&x, 1)); }, spec, true) /
                            integrate_shifted([](double) { return 1.0; }, spec, true);
        CHECK(gibbs_expectation(even, eps, spec) == doctest::Approx(half).epsilon(1e-12));
    }
}

TEST_CASE("second moment follows the Laplace expansion at small eps") {
    const auto d = recursions::d_table(8);
    const auto F = Observable::parse("x^2");
    const double eps = 0.01;
    const double value = gibbs_expectation(F, eps, QuadratureSpec::for_eps(eps));
    CHECK(std::abs(value - (1.0 - eps - 3.0 * eps * eps)) < 5e-5);
    double series = 0.0;
    for (int m = 0; m <= 6; ++m) series += std::pow(eps, 0.5 * m) * recursions::big_b_coeff(m, F, *d);
    CHECK(std::abs(value - series) < 1e-5);
}

TEST_CASE("stationary Fokker-Planck identity") {
    std::vector<Observable> tests;
    for (int k = 1; k <= 8; ++k) tests.push_back(Observable::monomial(1, {k}));
    tests.push_back(Observable::parse("x^8 - 2*x^5 + 0.3*x^2 + x"));
    for (double eps : {0.2, 0.1, 0.05}) {
        const auto spec = QuadratureSpec::for_eps(eps);
        for (const auto& F : tests) {
            const auto st = stationarity_terms(F, eps, spec);
            CHECK(std::abs(st.defect()) < 1e-10 * std::max(1.0, st.scale()));
        }
    }
    const auto st = stationarity_terms(Observable::parse("x^4"), 0.1, QuadratureSpec::for_eps(0.1));
    CHECK(st.scale() > 0.1);
    CHECK(std::abs(st.defect()) < 1e-10 * std::max(1.0, st.scale()));
}

TEST_CASE("residual orders") {
    const auto d = recursions::d_table(8);
    const auto F = Observable::parse("x^2");
    const std::vector<double> wide{0.2, 0.1, 0.05, 0.02};
    CHECK(expansion_residual_order(F, 0, wide, *d).fit.exponent >= 0.9);
    const std::vector<double> narrow{0.03, 0.02, 0.015, 0.01};
    const auto fit = expansion_residual_order(F, 2, narrow, *d);
    CHECK(fit.fit.exponent >= 1.8);
    for (std::size_t k = 1; k < fit.eps.size(); ++k) {
        const double prev = fit.residuals[k - 1] / (fit.eps[k - 1] * fit.eps[k - 1]);
        const double cur = fit.residuals[k] / (fit.eps[k] * fit.eps[k]);
        CHECK(std::abs(cur + 3.0) < std::abs(prev + 3.0));
    }
    const double e = fit.eps.back();
    const double b6 = recursions::big_b_coeff(6, F, *d);
    CHECK((fit.residuals.back() - b6 * e * e * e) / (e * e) == doctest::Approx(-3.0).epsilon(0.03));
}

TEST_CASE("power-series fit recovers exact coefficients") {
    const std::vector<double> eps{0.3, 0.2, 0.1, 0.05, 0.02};
    std::vector<double> r;
    for (double e : eps) r.push_back(-3.0 * e * e + 7.0 * e * e * e);
    const double powers[] = {2.0, 3.0};
    const auto coef = fit_power_series(eps, r, powers);
    CHECK(coef[0] == doctest::Approx(-3.0).epsilon(1e-10));
    CHECK(coef[1] == doctest::Approx(7.0).epsilon(1e-10));
}

TEST_CASE("equilibrium errors") {
    const auto d = recursions::d_table(4);
    CHECK_THROWS_AS(QuadratureSpec::for_eps(0.0), DomainError);
    CHECK_THROWS_AS(QuadratureSpec::for_eps(1.0), DomainError);
    const auto spec = QuadratureSpec::for_eps(0.1);
    CHECK_THROWS(gibbs_expectation(Observable::parse("x"), 0.2, spec));
    CHECK_THROWS_AS(gibbs_expectation(Observable::parse("x1*x2"), 0.1, spec), DimensionMismatch);
    const std::vector<double> three{0.2, 0.1, 0.05};
    CHECK_THROWS_AS(expansion_residual_order(Observable::parse("x^2"), 2, three, *d), EstimationError);
    const std::vector<double> low{0.2, 0.1, 0.05, 0.005};
    CHECK_THROWS(expansion_residual_order(Observable::parse("x^2"), 2, low, *d));
    // A constant is reproduced exactly by B_0: residual below the floor.
    const std::vector<double> grid{0.2, 0.1, 0.05, 0.02};
    CHECK_THROWS_AS(expansion_residual_order(Observable::parse("1"), 0, grid, *d), EstimationError);
}
