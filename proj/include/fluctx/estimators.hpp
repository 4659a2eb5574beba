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
#include <functional>
#include <span>
#include <vector>

#include "fluctx/hierarchy.hpp"
#include "fluctx/observables.hpp"

namespace fluctx {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;  ///< batch-means standard error
    std::size_t n_paths = 0;
    std::size_t n_batches = 0;
};

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// Exponential-rate fit plus the points it discarded.
struct DecayFit {
    RateFit fit;  ///< exponent = decay rate (negated slope of log gap vs t)
    double threshold = 0.0;  ///< points with gap < threshold * stderr were dropped
    std::size_t dropped = 0;
};

struct McOptions {
    std::uint64_t seed = 0;
    std::size_t n_paths = 10000;
    std::size_t n_batches = 100;
    /// 0 selects FLUCTX_WORKERS from the environment, else 1.
    unsigned workers = 0;
    double max_abort_fraction = 1e-3;
};

/// Worker count from an explicit request, else FLUCTX_WORKERS, else 1.
unsigned resolve_workers(unsigned requested);

/// Per-path output slots of a Monte Carlo run. A NaN slot means "this path
/// does not contribute to that output" (e.g. rejected by conditioning).
struct SampleTable {
    std::size_t n_paths = 0;
    std::size_t n_outputs = 0;
    std::vector<double> values;  ///< n_paths x n_outputs
    std::vector<std::uint8_t> aborted;
    std::size_t n_aborted = 0;

    double at(std::size_t path, std::size_t output) const { return values[path * n_outputs + output]; }
};

using PathFunctional =
    std::function<void(const FluctuationPath& path, const Simulator& sim, std::span<double> out)>;

/// Simulates `opts.n_paths` independent paths and evaluates `functional` on
/// each. Path p always uses PathStream(opts.seed, p), so results do not
/// depend on the number of workers. Throws EstimationError when more than
/// `opts.max_abort_fraction` of the paths abort.
SampleTable run_paths(const SimConfig& cfg, const InitialLaw& law, const McOptions& opts,
                      const RecordSpec& record, std::size_t n_outputs,
                      const PathFunctional& functional);

/// Batch-means estimate over the non-NaN samples of one output, taken in
/// path order and split into contiguous batches.
McEstimate batch_means(const SampleTable& table, std::size_t output, std::size_t n_batches);
McEstimate batch_means(std::span<const double> samples, std::size_t n_batches);

/// The order-m Taylor functional inside a_m(t, F), evaluated on one path:
/// F(X0) for m = 0, else sum_i 1/i! sum_{D_i^m} D^iF(X0)(X_{j1}, ..., X_{ji}).
double expansion_term(const Observable& F, const FluctuationPath& path, int m, std::size_t record);

McEstimate estimate_a(int m, std::size_t step, const Observable& F, const SimConfig& cfg,
                      const InitialLaw& law, const McOptions& opts);

/// a_m(t, F) for every (step, order) pair from one set of paths; result
/// index is s * orders.size() + j.
std::vector<McEstimate> estimate_a_grid(std::span<const int> orders,
                                        std::span<const std::size_t> steps, const Observable& F,
                                        const SimConfig& cfg, const InitialLaw& law,
                                        const McOptions& opts);

/// v_m^eps = (E F(X_eps) - sum_{k<=m} eps^{k/2} a_k) / eps^{m/2}, one
/// estimate per eps, all on common paths.
std::vector<McEstimate> estimate_weak_remainder(int m, std::size_t step, const Observable& F,
                                                std::span<const double> eps_list,
                                                const SimConfig& cfg, const InitialLaw& law,
                                                const McOptions& opts);

/// E|w_{eps,m}(t)|^2 for every (eps, m); index e * orders.size() + j.
std::vector<McEstimate> estimate_strong_remainder(std::span<const int> orders, std::size_t step,
                                                  std::span<const double> eps_list,
                                                  const SimConfig& cfg, const InitialLaw& law,
                                                  const McOptions& opts);

enum class Sign { positive, negative };

enum class ControlVariate {
    none,
    /// Subtracts the discrete Ito integral of the noise term of dS_{m,i},
    /// propagated with Lambda(t)^{-i} Lambda(s)^i. It has mean zero, so the
    /// estimator stays unbiased.
    martingale,
};

/// E[S_{m,i}(t) | sign(xi_0)] at each requested step (d = 1), by rejection.
std::vector<McEstimate> estimate_conditional_s(int m, int i, std::span<const std::size_t> steps,
                                               Sign sign, const SimConfig& cfg,
                                               const InitialLaw& law, const McOptions& opts,
                                               ControlVariate cv = ControlVariate::none);

/// Least-squares slope of log y against log x. Needs >= 4 positive points.
RateFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

/// Decay rate of gaps ~ C e^{-rate t}. Points with gap <= threshold * stderr
/// (or gap <= 0) are dropped first; needs >= 4 remaining points.
DecayFit fit_exponential_rate(std::span<const double> ts, std::span<const double> gaps,
                              std::span<const double> stderrs = {}, double threshold = 5.0);

/// Ordinary least squares y = slope * x + intercept.
RateFit fit_linear(std::span<const double> xs, std::span<const double> ys);

}  // namespace fluctx
