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

#include "fluctx/hierarchy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fluctx/model.hpp"

namespace fluctx {

// ---------------------------------------------------------------------------
// SimConfig

void SimConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (order < 0 || order > kMaxOrder)
        throw std::invalid_argument("order must lie in [0, " + std::to_string(kMaxOrder) + "]");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    if (!(dt > 0.0) || dt > 1e-2) throw std::invalid_argument("dt must lie in (0, 1e-2]");
    if (!(horizon >= dt)) throw std::invalid_argument("horizon must be >= dt");
    const double ratio = horizon / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
        throw std::invalid_argument("horizon must be an integer multiple of dt");
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

std::size_t SimConfig::step_index(double t) const {
    const double ratio = t / dt;
    const double nearest = std::round(ratio);
    if (t < 0.0 || std::abs(ratio - nearest) > 1e-6 * std::max(1.0, ratio) ||
        static_cast<std::size_t>(nearest) > steps())
        throw std::invalid_argument("time " + std::to_string(t) + " is not on the grid");
    return static_cast<std::size_t>(nearest);
}

// ---------------------------------------------------------------------------
// Initial data

StateVector InitialData::xi_eps(double eps) const {
    StateVector out = xi.front();
    double scale = 1.0;
    const double root = std::sqrt(eps);
    for (std::size_t k = 1; k < xi.size(); ++k) {
        scale *= root;
        for (std::size_t j = 0; j < out.dim(); ++j) out[j] += scale * xi[k][j];
    }
    return out;
}

InitialLaw InitialLaw::deterministic(StateVector point) {
    if (point.dim() == 0) throw DimensionMismatch("initial point must have dim >= 1");
    if (!point.is_finite() || point.norm() == 0.0)
        throw DomainError("leading initial term must be finite and nonzero");
    InitialLaw law(Kind::deterministic_point, point.dim());
    law.r_min_ = law.r_max_ = point.norm();
    law.point_ = std::move(point);
    return law;
}

InitialLaw InitialLaw::symmetric_two_point(StateVector point) {
    InitialLaw law = deterministic(std::move(point));
    law.kind_ = Kind::symmetric_two_point;
    return law;
}

InitialLaw InitialLaw::uniform_annulus(std::size_t dim, double r_min, double r_max) {
    if (dim == 0) throw DimensionMismatch("annulus dimension must be >= 1");
    if (!(r_min > 0.0 && r_max > r_min && std::isfinite(r_max)))
        throw DomainError("annulus radii must satisfy 0 < r_min < r_max");
    InitialLaw law(Kind::uniform_annulus, dim);
    law.r_min_ = r_min;
    law.r_max_ = r_max;
    return law;
}

InitialLaw& InitialLaw::with_gaussian(int k, double std) {
    if (k < 1 || k > kMaxOrder) throw std::invalid_argument("higher-order index out of range");
    if (!(std >= 0.0) || !std::isfinite(std))
        throw std::invalid_argument("standard deviation must be finite and >= 0");
    if (higher_std_.size() < static_cast<std::size_t>(k)) higher_std_.resize(static_cast<std::size_t>(k), 0.0);
    higher_std_[static_cast<std::size_t>(k - 1)] = std;
    return *this;
}

double InitialLaw::higher_std(int k) const {
    const auto idx = static_cast<std::size_t>(k - 1);
    return idx < higher_std_.size() ? higher_std_[idx] : 0.0;
}

double InitialLaw::prob_positive() const {
    if (dim_ != 1) throw DimensionMismatch("prob_positive is defined for d = 1");
    if (kind_ == Kind::deterministic_point) return point_[0] > 0.0 ? 1.0 : 0.0;
    return 0.5;
}

bool InitialLaw::is_symmetric() const { return kind_ != Kind::deterministic_point; }

InitialData InitialLaw::sample(PathStream& stream, int order) const {
    InitialData data;
    data.xi.reserve(static_cast<std::size_t>(order) + 1);

    StateVector lead(dim_);
    switch (kind_) {
        case Kind::deterministic_point:
            lead = point_;
            break;
        case Kind::symmetric_two_point:
            lead = point_;
            if (stream.uniform() < 0.5) lead *= -1.0;
            break;
        case Kind::uniform_annulus: {
            const double radius = r_min_ + (r_max_ - r_min_) * stream.uniform();
            if (dim_ == 1) {
                lead[0] = stream.uniform() < 0.5 ? -radius : radius;
            } else {
                double n2 = 0.0;
                while (n2 == 0.0) {
                    for (std::size_t j = 0; j < dim_; ++j) lead[j] = stream.normal();
                    n2 = lead.norm_squared();
                }
                lead *= radius / std::sqrt(n2);
            }
            break;
        }
    }
    data.xi.push_back(std::move(lead));

    for (int k = 1; k <= order; ++k) {
        StateVector xk(dim_);
        const double s = higher_std(k);
        if (s > 0.0)
            for (std::size_t j = 0; j < dim_; ++j) xk[j] = s * stream.normal();
        data.xi.push_back(std::move(xk));
    }
    return data;
}

// ---------------------------------------------------------------------------
// FluctuationPath

std::span<const double> FluctuationPath::xbar_at(int k, std::size_t record) const {
    const auto& series = xbar.at(static_cast<std::size_t>(k));
    if (record >= records()) throw std::out_of_range("record index out of range");
    return std::span<const double>(series).subspan(record * dim, dim);
}

std::span<const double> FluctuationPath::xfull_at(std::size_t record) const {
    if (!has_full()) throw std::logic_error("path was simulated without the full SDE");
    if (record >= records()) throw std::out_of_range("record index out of range");
    return std::span<const double>(xfull).subspan(record * dim, dim);
}

std::size_t FluctuationPath::record_of_step(std::size_t step) const {
    auto it = std::lower_bound(steps.begin(), steps.end(), step);
    if (it == steps.end() || *it != step)
        throw std::out_of_range("grid step " + std::to_string(step) + " was not recorded");
    return static_cast<std::size_t>(it - steps.begin());
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

struct ForcingPlan {
    // Per order m >= 2: pairs from D_2^m and triples from D_3^m.
    std::vector<std::vector<std::array<int, 2>>> pairs;
    std::vector<std::vector<std::array<int, 3>>> triples;

    explicit ForcingPlan(int order)
        : pairs(static_cast<std::size_t>(order) + 1), triples(static_cast<std::size_t>(order) + 1) {
        for (int m = 2; m <= order; ++m) {
            for (const Composition& c : combinatorics::compositions(m, 2))
                pairs[m].push_back({c.parts[0], c.parts[1]});
            for (const Composition& c : combinatorics::compositions(m, 3))
                triples[m].push_back({c.parts[0], c.parts[1], c.parts[2]});
        }
    }
};

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

Simulator::Simulator(SimConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    n_steps_ = cfg_.steps();
    decay_.resize(n_steps_ + 1);
    for (std::size_t s = 0; s <= n_steps_; ++s) decay_[s] = std::exp(-2.0 * cfg_.time_of(s));
}

std::vector<std::size_t> Simulator::resolve(const RecordSpec& record) const {
    std::vector<std::size_t> steps = record.steps;
    if (steps.empty()) {
        steps.resize(n_steps_ + 1);
        for (std::size_t s = 0; s <= n_steps_; ++s) steps[s] = s;
        return steps;
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    if (steps.back() > n_steps_) throw std::out_of_range("recorded step beyond the horizon");
    return steps;
}

FluctuationPath Simulator::run(const InitialLaw& law, PathStream& stream,
                               const RecordSpec& record) const {
    if (law.dim() != cfg_.dim) throw DimensionMismatch("initial law dimension differs from config");
    InitialData initial = law.sample(stream, cfg_.order);
    auto increments = std::make_shared<std::vector<double>>(n_steps_ * cfg_.dim);
    stream.normals(*increments, std::sqrt(cfg_.dt));
    return run(initial, std::move(increments), record);
}

FluctuationPath Simulator::run(const InitialData& initial,
                               std::shared_ptr<const std::vector<double>> increments,
                               const RecordSpec& record) const {
    const std::size_t d = cfg_.dim;
    const int n = cfg_.order;
    const auto n1 = static_cast<std::size_t>(n) + 1;
    if (initial.xi.size() < n1) throw std::invalid_argument("initial data shorter than the order");
    for (std::size_t k = 0; k < n1; ++k)
        if (initial.xi[k].dim() != d) throw DimensionMismatch("initial data has wrong dimension");
    if (!increments || increments->size() != n_steps_ * d)
        throw std::invalid_argument("increment buffer must hold steps x dim values");

    static thread_local std::unique_ptr<ForcingPlan> plan_cache;
    static thread_local int plan_order = -1;
    if (plan_order != n) {
        plan_cache = std::make_unique<ForcingPlan>(n);
        plan_order = n;
    }
    const ForcingPlan& plan = *plan_cache;

    FluctuationPath path;
    path.dim = d;
    path.order = n;
    path.eps = cfg_.eps;
    path.dt = cfg_.dt;
    path.steps = resolve(record);
    path.times.reserve(path.steps.size());
    for (std::size_t s : path.steps) path.times.push_back(cfg_.time_of(s));
    path.initial = InitialData{{initial.xi.begin(), initial.xi.begin() + static_cast<std::ptrdiff_t>(n1)}};
    path.brownian_increments = increments;
    path.xbar.assign(n1, std::vector<double>(path.steps.size() * d));

    const StateVector& xi0 = path.initial.leading();
    const double xi0_r2 = xi0.norm_squared();
    if (cfg_.x0_mode == X0Mode::exact_flow && xi0_r2 == 0.0)
        throw DomainError("exact flow started at the unstable equilibrium x = 0");

    std::vector<double> cur(n1 * d), next(n1 * d), gram(n1 * n1);
    for (std::size_t k = 0; k < n1; ++k)
        std::copy(path.initial.xi[k].coords().begin(), path.initial.xi[k].coords().end(),
                  cur.begin() + static_cast<std::ptrdiff_t>(k * d));

    std::size_t next_record = 0;
    auto maybe_record = [&](std::size_t step) {
        if (next_record < path.steps.size() && path.steps[next_record] == step) {
            for (std::size_t k = 0; k < n1; ++k)
                std::copy(cur.begin() + static_cast<std::ptrdiff_t>(k * d),
                          cur.begin() + static_cast<std::ptrdiff_t>((k + 1) * d),
                          path.xbar[k].begin() + static_cast<std::ptrdiff_t>(next_record * d));
            ++next_record;
        }
    };
    maybe_record(0);

    const double dt = cfg_.dt;
    const double sqrt2 = std::sqrt(2.0);
    const std::vector<double>& inc = *increments;

    for (std::size_t s = 0; s < n_steps_; ++s) {
        const double* x0 = cur.data();
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = i; j < n1; ++j) {
                double g = 0.0;
                for (std::size_t c = 0; c < d; ++c) g += cur[i * d + c] * cur[j * d + c];
                gram[i * n1 + j] = gram[j * n1 + i] = g;
            }
        const double lin = 1.0 - gram[0];
        const double* dw = inc.data() + s * d;

        for (int m = 1; m <= n; ++m) {
            const std::size_t mo = static_cast<std::size_t>(m) * d;
            const double radial = 2.0 * gram[static_cast<std::size_t>(m)];  // 2 (x0 . Xm)
            for (std::size_t c = 0; c < d; ++c) {
                double f = lin * cur[mo + c] - radial * x0[c];
                for (const auto& [i, j] : plan.pairs[m])
                    f -= gram[static_cast<std::size_t>(i) * n1 + static_cast<std::size_t>(j)] * x0[c] +
                         2.0 * gram[static_cast<std::size_t>(i) * n1] * cur[static_cast<std::size_t>(j) * d + c];
                for (const auto& [i, j, k] : plan.triples[m])
                    f -= gram[static_cast<std::size_t>(i) * n1 + static_cast<std::size_t>(j)] *
                         cur[static_cast<std::size_t>(k) * d + c];
                next[mo + c] = cur[mo + c] + dt * f;
            }
            if (m == 1)
                for (std::size_t c = 0; c < d; ++c) next[mo + c] += sqrt2 * dw[c];
        }

        if (cfg_.x0_mode == X0Mode::exact_flow) {
            const double scale = 1.0 / std::sqrt(xi0_r2 + (1.0 - xi0_r2) * decay_[s + 1]);
            for (std::size_t c = 0; c < d; ++c) next[c] = xi0[c] * scale;
        } else {
            for (std::size_t c = 0; c < d; ++c) next[c] = x0[c] + dt * lin * x0[c];
        }

        for (std::size_t k = 0; k < n1; ++k)
            if (!all_finite(std::span<const double>(next).subspan(k * d, d)))
                throw SimulationAbort(s + 1, "xbar[" + std::to_string(k) + "]");
        cur.swap(next);
        maybe_record(s + 1);
    }

    if (record.full_sde)
        path.xfull = full_sde(cfg_.eps, path.initial.xi_eps(cfg_.eps), inc, path.steps);
    return path;
}

std::vector<double> Simulator::full_sde(double eps, const StateVector& start,
                                        std::span<const double> increments,
                                        std::span<const std::size_t> steps) const {
    const std::size_t d = cfg_.dim;
    if (start.dim() != d) throw DimensionMismatch("start point has wrong dimension");
    if (increments.size() != n_steps_ * d)
        throw std::invalid_argument("increment buffer must hold steps x dim values");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");

    std::vector<double> out(steps.size() * d);
    std::vector<double> x(start.coords().begin(), start.coords().end());
    const double noise = std::sqrt(2.0 * eps);
    const double dt = cfg_.dt;

    std::size_t next_record = 0;
    auto maybe_record = [&](std::size_t step) {
        while (next_record < steps.size() && steps[next_record] == step) {
            std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(next_record * d));
            ++next_record;
        }
    };
    maybe_record(0);
    for (std::size_t s = 0; s < n_steps_; ++s) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        const double lin = 1.0 - r2;
        const double* dw = increments.data() + s * d;
        for (std::size_t c = 0; c < d; ++c) x[c] += dt * lin * x[c] + noise * dw[c];
        if (!all_finite(x)) throw SimulationAbort(s + 1, "x_eps");
        maybe_record(s + 1);
    }
    return out;
}

FluctuationPath simulate_path(const SimConfig& cfg, const InitialLaw& law, PathStream& stream,
                              const RecordSpec& record) {
    return Simulator(cfg).run(law, stream, record);
}

// ---------------------------------------------------------------------------
// Path post-processing

StateVector remainder(const FluctuationPath& path, int m, std::size_t record) {
    if (m < 0 || m > path.order) throw std::out_of_range("remainder order out of range");
    const auto full = path.xfull_at(record);
    StateVector w(full);
    const double root = std::sqrt(path.eps);
    double scale = 1.0;
    for (int k = 0; k <= m; ++k) {
        const auto xk = path.xbar_at(k, record);
        for (std::size_t c = 0; c < path.dim; ++c) w[c] -= scale * xk[c];
        scale *= root;
    }
    w *= 1.0 / std::pow(path.eps, 0.5 * m);
    return w;
}

RadialTangential decompose_radial_tangential(const FluctuationPath& path, int k) {
    if (path.dim < 2) throw DimensionMismatch("radial/tangential split requires d >= 2");
    if (k != 1 && k != 2) throw std::out_of_range("decomposition is defined for k = 1, 2");
    if (k > path.order) throw std::out_of_range("order not simulated");

    RadialTangential out;
    out.direction = path.initial.leading();
    out.direction *= 1.0 / out.direction.norm();
    const std::size_t d = path.dim;
    out.radial.resize(path.records());
    out.tangential.resize(path.records() * d);
    const auto u = out.direction.coords();
    for (std::size_t r = 0; r < path.records(); ++r) {
        const auto xk = path.xbar_at(k, r);
        const double radial = dot(u, xk);
        out.radial[r] = radial;
        for (std::size_t c = 0; c < d; ++c) out.tangential[r * d + c] = xk[c] - radial * u[c];
    }
    return out;
}

std::vector<double> s_path(const FluctuationPath& path, int m, int i) {
    if (path.dim != 1) throw DimensionMismatch("S_{m,i} series are defined for d = 1");
    if (i < 1 || i > m || m > path.order) throw std::out_of_range("(m, i) outside 1 <= i <= m <= n");
    std::vector<double> out(path.records());
    std::vector<double> values(static_cast<std::size_t>(m));
    for (std::size_t r = 0; r < path.records(); ++r) {
        for (int j = 1; j <= m; ++j) values[static_cast<std::size_t>(j - 1)] = path.xbar[static_cast<std::size_t>(j)][r];
        out[r] = combinatorics::s_value(m, i, values);
    }
    return out;
}

}  // namespace fluctx
