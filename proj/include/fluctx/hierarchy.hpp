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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fluctx/combinatorics.hpp"
#include "fluctx/rng.hpp"
#include "fluctx/state.hpp"

namespace fluctx {

enum class Scheme { euler_maruyama };

/// How the noiseless leading term X0 is advanced: closed-form flow on the
/// grid, or the same Euler step the other components use.
enum class X0Mode { exact_flow, integrated };

struct SimConfig {
    std::size_t dim = 1;
    int order = 2;  ///< highest fluctuation order n
    double eps = 0.1;
    double dt = 1e-3;
    double horizon = 1.0;
    Scheme scheme = Scheme::euler_maruyama;
    X0Mode x0_mode = X0Mode::exact_flow;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    std::size_t steps() const;
    double time_of(std::size_t step) const { return static_cast<double>(step) * dt; }
    /// Grid index of time t; throws if t is not a grid point.
    std::size_t step_index(double t) const;
};

/// One draw of (xi_0, ..., xi_n).
struct InitialData {
    std::vector<StateVector> xi;

    const StateVector& leading() const { return xi.front(); }
    /// xi_eps = sum_k eps^{k/2} xi_k (exact truncation).
    StateVector xi_eps(double eps) const;
};

/// Sampler for the initial expansion data. The leading term keeps
/// |xi_0| away from 0; higher terms are independent of xi_0.
class InitialLaw {
public:
    enum class Kind { deterministic_point, symmetric_two_point, uniform_annulus };

    static InitialLaw deterministic(StateVector point);
    /// +point or -point with probability 1/2 each.
    static InitialLaw symmetric_two_point(StateVector point);
    /// Uniform direction, radius uniform on (r_min, r_max). In d = 1 this is
    /// the uniform law on -(r_min, r_max) U (r_min, r_max).
    static InitialLaw uniform_annulus(std::size_t dim, double r_min, double r_max);

    /// xi_k ~ N(0, std^2 I) for k >= 1; std = 0 means xi_k = 0.
    InitialLaw& with_gaussian(int k, double std);

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    const StateVector& point() const noexcept { return point_; }
    double r_min() const noexcept { return r_min_; }
    double r_max() const noexcept { return r_max_; }
    double higher_std(int k) const;
    const std::vector<double>& higher_stds() const noexcept { return higher_std_; }

    /// P(xi_0 > 0) in d = 1.
    double prob_positive() const;
    /// True when the law of xi_0 is invariant under x -> -x and every higher
    /// term is centered.
    bool is_symmetric() const;

    InitialData sample(PathStream& stream, int order) const;

private:
    InitialLaw(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

    Kind kind_;
    std::size_t dim_;
    StateVector point_;
    double r_min_ = 0.0;
    double r_max_ = 0.0;
    std::vector<double> higher_std_;  // index k - 1
};

/// Which grid points a simulation keeps. Empty `steps` keeps the whole grid.
struct RecordSpec {
    std::vector<std::size_t> steps;
    bool full_sde = true;
};

/// Joint trajectory of X_eps and the fluctuation chain X0..Xn on one
/// Brownian path, stored at the recorded grid indices.
struct FluctuationPath {
    std::size_t dim = 1;
    int order = 0;
    double eps = 0.0;
    double dt = 0.0;
    std::vector<std::size_t> steps;
    std::vector<double> times;
    InitialData initial;
    std::shared_ptr<const std::vector<double>> brownian_increments;  ///< steps x dim
    std::vector<double> xfull;               ///< records x dim; empty if not requested
    std::vector<std::vector<double>> xbar;   ///< [k] -> records x dim

    std::size_t records() const noexcept { return steps.size(); }
    bool has_full() const noexcept { return !xfull.empty(); }
    std::span<const double> xbar_at(int k, std::size_t record) const;
    std::span<const double> xfull_at(std::size_t record) const;
    /// Record index holding grid step `step`; throws if not recorded.
    std::size_t record_of_step(std::size_t step) const;
};

/// Reusable integrator for one SimConfig; holds the grid tables shared by
/// every path. Reentrant: `run` may be called concurrently.
class Simulator {
public:
    explicit Simulator(SimConfig cfg);

    const SimConfig& config() const noexcept { return cfg_; }

    /// Draws initial data then increments from `stream` and integrates.
    FluctuationPath run(const InitialLaw& law, PathStream& stream,
                        const RecordSpec& record = {}) const;

    /// Integrates from given initial data and increments (steps x dim).
    FluctuationPath run(const InitialData& initial,
                        std::shared_ptr<const std::vector<double>> increments,
                        const RecordSpec& record = {}) const;

    /// Euler-Maruyama for X_eps alone, recorded at `steps`; throws
    /// SimulationAbort on a non-finite state.
    std::vector<double> full_sde(double eps, const StateVector& start,
                                 std::span<const double> increments,
                                 std::span<const std::size_t> steps) const;

private:
    std::vector<std::size_t> resolve(const RecordSpec& record) const;

    SimConfig cfg_;
    std::size_t n_steps_;
    std::vector<double> decay_;  // e^{-2 t_s}
};

/// Convenience wrapper around Simulator::run.
FluctuationPath simulate_path(const SimConfig& cfg, const InitialLaw& law, PathStream& stream,
                              const RecordSpec& record = {});

/// w_{eps,m} = (X_eps - sum_{k<=m} eps^{k/2} Xk) / eps^{m/2} at a record.
StateVector remainder(const FluctuationPath& path, int m, std::size_t record);

struct RadialTangential {
    StateVector direction;
    std::vector<double> radial;      ///< r_k per record
    std::vector<double> tangential;  ///< v_k per record, records x dim
};

/// X_k = r_k u + v_k with u = xi_0 / |xi_0| and v_k orthogonal to u.
RadialTangential decompose_radial_tangential(const FluctuationPath& path, int k);

/// S_{m,i} along the recorded scalar trajectories.
std::vector<double> s_path(const FluctuationPath& path, int m, int i);

}  // namespace fluctx
