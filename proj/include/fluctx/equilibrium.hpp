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
#include <functional>
#include <span>
#include <vector>

#include "fluctx/estimators.hpp"
#include "fluctx/observables.hpp"
#include "fluctx/recursions.hpp"

/// Quadrature of the scalar Gibbs measure mu_eps ~ exp(-V(x)/eps) dx.
///
/// Every integrand is evaluated in the shifted form exp(-(V(x) - V(1))/eps),
/// which is at most 1, and the factor exp(-V(1)/eps) is carried in log
/// space. The truncation radius is certified from the bound
/// V(x) - V(1) >= x^2 - 7/4 for |x| >= 2.
namespace fluctx::equilibrium {

enum class QuadRule { gauss_legendre_composite };

struct QuadratureSpec {
    double eps = 0.0;            ///< noise level this spec was certified for
    double radius = 0.0;         ///< truncation radius R
    std::size_t panels = 0;      ///< panels on [0, R]; mirrored on [-R, 0]
    QuadRule rule = QuadRule::gauss_legendre_composite;
    double tail_bound = 0.0;     ///< certified tail mass relative to the bulk
    int weight_degree = 16;      ///< tail also certified for |x|^weight_degree
    std::vector<double> breakpoints;  ///< panel edges on [0, R], ascending

    /// Smallest radius (on a 1/8 grid, >= 2) whose certified relative tail
    /// is below `tail_target`, with panel width 0.5 sqrt(eps) around x = 1
    /// and at most 1/4 elsewhere. Throws DomainError for eps outside (0, 1).
    static QuadratureSpec for_eps(double eps, double tail_target = 1e-16, int weight_degree = 16,
                                  double peak_width = 0.5);

    /// Same layout with the radius multiplied by `factor` (tail checks).
    QuadratureSpec scaled_radius(double factor) const;
};

/// Integral of f(x) exp(-(V(x) - V(1))/eps) over [-R, R], or over [0, R]
/// when `half_line` is set.
double integrate_shifted(const std::function<double(double)>& f, const QuadratureSpec& spec,
                         bool half_line = false);

/// log Z_eps.
double log_partition_function(double eps, const QuadratureSpec& spec);
/// Z_eps = int exp(-V(x)/eps) dx.
double partition_function(double eps, const QuadratureSpec& spec);

/// int F d mu_eps (d = 1).
double gibbs_expectation(const Observable& F, double eps, const QuadratureSpec& spec);

struct StationarityTerms {
    double drift = 0.0;      ///< int (x - x^3) F'(x) mu_eps(dx)
    double diffusion = 0.0;  ///< eps int F''(x) mu_eps(dx)

    double defect() const { return drift + diffusion; }
    double scale() const;    ///< |drift| + |diffusion|
};

/// Both sides of the stationary Fokker-Planck identity for test function F.
StationarityTerms stationarity_terms(const Observable& F, double eps, const QuadratureSpec& spec);

struct ResidualFit {
    RateFit fit;
    std::vector<double> eps;
    std::vector<double> expectations;
    std::vector<double> predictions;
    std::vector<double> residuals;
};

/// Quadrature residual r(eps) = int F d mu_eps - sum_{k<=m} eps^{k/2} B_k(F)
/// and the power-law fit of |r| against eps. Requires >= 4 values of eps in
/// [0.01, 0.3]; throws EstimationError when a residual is below the
/// quadrature accuracy floor.
ResidualFit expansion_residual_order(const Observable& F, int m, std::span<const double> eps_list,
                                     const RationalTable& table);

/// Least-squares coefficients a_j of r(eps) ~ sum_j a_j eps^{powers[j]}.
std::vector<double> fit_power_series(std::span<const double> eps, std::span<const double> r,
                                     std::span<const double> powers);

/// Relative accuracy floor assumed for quadrature residuals.
inline constexpr double kQuadratureFloor = 1e-12;

}  // namespace fluctx::equilibrium
