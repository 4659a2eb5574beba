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

#include "fluctx/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fluctx/errors.hpp"

namespace fluctx::equilibrium {

namespace {

constexpr int kNodes = 16;

struct GaussLegendre16 {
    std::array<double, kNodes> nodes{};
    std::array<double, kNodes> weights{};

    GaussLegendre16() {
        for (int k = 0; k < kNodes; ++k) {
            // Tricomi initial guess, then Newton on P_16.
            double x = std::cos(std::numbers::pi * (4.0 * (k + 1) - 1.0) / (4.0 * kNodes + 2.0));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int n = 2; n <= kNodes; ++n) {
                    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kNodes * (x * p1 - p0) / (x * x - 1.0);
                const double step = p1 / dp;
                x -= step;
                if (std::abs(step) < 1e-16) break;
            }
            nodes[static_cast<std::size_t>(k)] = x;
            weights[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

const GaussLegendre16& rule() {
    static const GaussLegendre16 r;
    return r;
}

double shifted_potential(double x) {
    const double x2 = x * x;
    return 0.25 * x2 * x2 - 0.5 * x2 + 0.25;  // V(x) - V(1)
}

// Certified bound on int_{|x|>R} (1 + |x|^p) exp(-(V(x) - V(1))/eps) dx, using
// V - V(1) >= x^2 - 7/4 for |x| >= 2 and log-concavity of x^p e^{-x^2/eps}.
double tail_mass_bound(double radius, double eps, int p) {
    auto one_power = [&](int q) {
        const double slope = 2.0 * radius / eps - q / radius;
        if (slope <= 0.0) return std::numeric_limits<double>::infinity();
        return std::exp(q * std::log(radius) - (radius * radius - 1.75) / eps) / slope;
    };
    return 2.0 * (one_power(0) + one_power(p));
}

// Lower bound of the bulk mass: on |x - 1| <= sqrt(eps) the shifted
// potential is at most 2.25 eps, and the -1 well mirrors it.
double bulk_lower_bound(double eps) { return 4.0 * std::sqrt(eps) * std::exp(-2.25); }

std::vector<double> layout(double eps, double radius, double peak_width) {
    const double h = peak_width * std::sqrt(eps);
    const double lo = std::max(0.0, 1.0 - 24.0 * h);
    const double hi = std::min(radius, 1.0 + 24.0 * h);
    std::vector<double> edges;
    auto fill = [&](double a, double b, double width) {
        if (b <= a) return;
        const auto n = static_cast<std::size_t>(std::ceil((b - a) / width - 1e-12));
        for (std::size_t k = 0; k < n; ++k) edges.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n));
    };
    fill(0.0, lo, 0.25);
    fill(lo, hi, h);
    fill(hi, radius, 0.25);
    edges.push_back(radius);
    return edges;
}

}  // namespace

QuadratureSpec QuadratureSpec::for_eps(double eps, double tail_target, int weight_degree,
                                       double peak_width) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
    QuadratureSpec spec;
    spec.eps = eps;
    spec.weight_degree = weight_degree;
    const double bulk = bulk_lower_bound(eps);
    double radius = 2.0;
    while (tail_mass_bound(radius, eps, weight_degree) / bulk >= tail_target) {
        radius += 0.125;
        if (radius > 100.0) throw DomainError("tail bound not satisfiable for this eps");
    }
    spec.radius = radius;
    spec.tail_bound = tail_mass_bound(radius, eps, weight_degree) / bulk;
    spec.breakpoints = layout(eps, radius, peak_width);
    spec.panels = spec.breakpoints.size() - 1;
    return spec;
}

QuadratureSpec QuadratureSpec::scaled_radius(double factor) const {
    QuadratureSpec out = *this;
    out.radius = radius * factor;
    out.breakpoints = layout(eps, out.radius, 0.5);
    out.panels = out.breakpoints.size() - 1;
    out.tail_bound = tail_mass_bound(out.radius, eps, weight_degree) / bulk_lower_bound(eps);
    return out;
}

double integrate_shifted(const std::function<double(double)>& f, const QuadratureSpec& spec,
                         bool half_line) {
    if (spec.breakpoints.size() < 2) throw std::invalid_argument("quadrature spec has no panels");
    const auto& gl = rule();
    const double inv_eps = 1.0 / spec.eps;
    auto panel = [&](double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (int k = 0; k < kNodes; ++k) {
            const double x = mid + half * gl.nodes[static_cast<std::size_t>(k)];
            s += gl.weights[static_cast<std::size_t>(k)] * f(x) * std::exp(-shifted_potential(x) * inv_eps);
        }
        return half * s;
    };
    double total = 0.0;
    const auto& e = spec.breakpoints;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) total += panel(e[k], e[k + 1]);
    if (!half_line)
        for (std::size_t k = 0; k + 1 < e.size(); ++k) total += panel(-e[k + 1], -e[k]);
    return total;
}

double log_partition_function(double eps, const QuadratureSpec& spec) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
    if (spec.eps != eps) throw std::invalid_argument("quadrature spec was certified for another eps");
    const double bulk = integrate_shifted([](double) { return 1.0; }, spec);
    return 0.25 / eps + std::log(bulk);  // -V(1)/eps = 1/(4 eps)
}

double partition_function(double eps, const QuadratureSpec& spec) {
    return std::exp(log_partition_function(eps, spec));
}

double gibbs_expectation(const Observable& F, double eps, const QuadratureSpec& spec) {
    if (F.dim() != 1) throw DimensionMismatch("Gibbs quadrature is implemented for d = 1");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
    if (spec.eps != eps) throw std::invalid_argument("quadrature spec was certified for another eps");
    const double norm = integrate_shifted([](double) { return 1.0; }, spec);
    const double num = integrate_shifted([&](double x) { return F.eval(std::span<const double>(&x, 1)); }, spec);
    return num / norm;
}

double StationarityTerms::scale() const { return std::abs(drift) + std::abs(diffusion); }

StationarityTerms stationarity_terms(const Observable& F, double eps, const QuadratureSpec& spec) {
    const Observable d1 = F.partial(0);
    const Observable d2 = d1.partial(0);
    StationarityTerms out;
    out.drift = integrate_shifted(
                    [&](double x) {
                        return (x - x * x * x) * d1.eval(std::span<const double>(&x, 1));
                    },
                    spec) /
                integrate_shifted([](double) { return 1.0; }, spec);
    out.diffusion = eps * gibbs_expectation(d2, eps, spec);
    return out;
}

std::vector<double> fit_power_series(std::span<const double> eps, std::span<const double> r,
                                     std::span<const double> powers) {
    const std::size_t n = eps.size(), k = powers.size();
    if (r.size() != n) throw std::invalid_argument("fit: eps and residuals differ in length");
    if (k == 0 || n < k) throw EstimationError("fit: not enough points for the requested terms");
    // Normal equations on columns scaled to unit max.
    std::vector<double> scale(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t p = 0; p < n; ++p) scale[j] = std::max(scale[j], std::pow(eps[p], powers[j]));
    std::vector<double> a(k * (k + 1), 0.0);  // augmented k x (k + 1)
    for (std::size_t p = 0; p < n; ++p) {
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) row[j] = std::pow(eps[p], powers[j]) / scale[j];
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) a[i * (k + 1) + j] += row[i] * row[j];
            a[i * (k + 1) + k] += row[i] * r[p];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < k; ++i)
            if (std::abs(a[i * (k + 1) + c]) > std::abs(a[piv * (k + 1) + c])) piv = i;
        if (a[piv * (k + 1) + c] == 0.0) throw EstimationError("fit: singular design");
        for (std::size_t j = 0; j <= k; ++j) std::swap(a[c * (k + 1) + j], a[piv * (k + 1) + j]);
        for (std::size_t i = 0; i < k; ++i) {
            if (i == c) continue;
            const double f = a[i * (k + 1) + c] / a[c * (k + 1) + c];
            for (std::size_t j = c; j <= k; ++j) a[i * (k + 1) + j] -= f * a[c * (k + 1) + j];
        }
    }
    std::vector<double> coef(k);
    for (std::size_t j = 0; j < k; ++j) coef[j] = a[j * (k + 1) + k] / a[j * (k + 1) + j] / scale[j];
    return coef;
}

ResidualFit expansion_residual_order(const Observable& F, int m, std::span<const double> eps_list,
                                     const RationalTable& table) {
    if (F.dim() != 1) throw DimensionMismatch("Gibbs expansion residuals are defined for d = 1");
    if (eps_list.size() < 4) throw EstimationError("residual fit needs at least 4 values of eps");
    if (m < 0 || m > table.order()) throw std::out_of_range("expansion order exceeds table order");

    std::vector<double> coeffs;
    for (int k = 0; k <= m; ++k) coeffs.push_back(recursions::big_b_coeff(k, F, table));

    ResidualFit out;
    std::vector<double> abs_r;
    for (double eps : eps_list) {
        if (!(eps >= 0.01 && eps <= 0.3))
            throw std::domain_error("residual fits use eps in [0.01, 0.3]");
        const auto spec = QuadratureSpec::for_eps(eps);
        const double value = gibbs_expectation(F, eps, spec);
        double prediction = 0.0;
        for (int k = 0; k <= m; ++k) prediction += std::pow(eps, 0.5 * k) * coeffs[static_cast<std::size_t>(k)];
        const double r = value - prediction;
        if (std::abs(r) <= kQuadratureFloor * std::max(1.0, std::abs(value)))
            throw EstimationError("residual at eps = " + std::to_string(eps) +
                                  " is below the quadrature accuracy floor; increase the eps range");
        out.eps.push_back(eps);
        out.expectations.push_back(value);
        out.predictions.push_back(prediction);
        out.residuals.push_back(r);
        abs_r.push_back(std::abs(r));
    }
    out.fit = fit_power_law(out.eps, abs_r);
    return out;
}

}  // namespace fluctx::equilibrium
