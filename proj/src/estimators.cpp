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

#include "fluctx/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "fluctx/combinatorics.hpp"
#include "fluctx/model.hpp"

namespace fluctx {

namespace {

constexpr double kExcluded = std::numeric_limits<double>::quiet_NaN();

std::vector<double> sample_column(const SampleTable& table, std::size_t output) {
    std::vector<double> out;
    out.reserve(table.n_paths);
    for (std::size_t p = 0; p < table.n_paths; ++p) {
        if (table.aborted[p]) continue;
        const double v = table.at(p, output);
        if (!std::isnan(v)) out.push_back(v);
    }
    return out;
}

}  // namespace

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FLUCTX_WORKERS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

SampleTable run_paths(const SimConfig& cfg, const InitialLaw& law, const McOptions& opts,
                      const RecordSpec& record, std::size_t n_outputs,
                      const PathFunctional& functional) {
    if (opts.n_paths == 0) throw EstimationError("n_paths must be positive");
    const Simulator sim(cfg);

    SampleTable table;
    table.n_paths = opts.n_paths;
    table.n_outputs = n_outputs;
    table.values.assign(opts.n_paths * n_outputs, kExcluded);
    table.aborted.assign(opts.n_paths, 0);

    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_workers(opts.workers), opts.n_paths));
    std::vector<std::exception_ptr> failures(workers);

    auto work = [&](unsigned w) {
        const std::size_t begin = opts.n_paths * w / workers;
        const std::size_t end = opts.n_paths * (w + 1) / workers;
        try {
            for (std::size_t p = begin; p < end; ++p) {
                PathStream stream(opts.seed, p);
                try {
                    const FluctuationPath path = sim.run(law, stream, record);
                    functional(path, sim, std::span<double>(table.values).subspan(p * n_outputs, n_outputs));
                } catch (const SimulationAbort&) {
                    table.aborted[p] = 1;
                    std::fill_n(table.values.begin() + static_cast<std::ptrdiff_t>(p * n_outputs),
                                n_outputs, kExcluded);
                }
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    table.n_aborted = static_cast<std::size_t>(std::count(table.aborted.begin(), table.aborted.end(), 1));
    if (static_cast<double>(table.n_aborted) > opts.max_abort_fraction * static_cast<double>(opts.n_paths))
        throw EstimationError(std::to_string(table.n_aborted) + " of " + std::to_string(opts.n_paths) +
                              " paths aborted on non-finite values");
    return table;
}

McEstimate batch_means(std::span<const double> all, std::size_t n_batches) {
    std::vector<double> kept;
    kept.reserve(all.size());
    for (double v : all)
        if (!std::isnan(v)) kept.push_back(v);
    const std::span<const double> samples(kept);
    const std::size_t n = samples.size();
    const std::size_t batches = std::min(n_batches, n);
    if (batches < 20)
        throw EstimationError("batch means need at least 20 batches (have " + std::to_string(n) +
                              " samples, " + std::to_string(n_batches) + " batches requested)");

    double total = 0.0;
    for (double v : samples) total += v;
    const double mean = total / static_cast<double>(n);

    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = n * b / batches;
        const std::size_t hi = n * (b + 1) / batches;
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += samples[k];
        means[b] = s / static_cast<double>(hi - lo);
    }
    double mm = 0.0;
    for (double m : means) mm += m;
    mm /= static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) ss += (m - mm) * (m - mm);
    const double var_of_mean = ss / (static_cast<double>(batches) * static_cast<double>(batches - 1));

    McEstimate est;
    est.value = mean;
    est.std_error = std::sqrt(var_of_mean);
    est.n_paths = n;
    est.n_batches = batches;
    if (!std::isfinite(est.value)) throw EstimationError("non-finite Monte Carlo mean");
    return est;
}

McEstimate batch_means(const SampleTable& table, std::size_t output, std::size_t n_batches) {
    const auto column = sample_column(table, output);
    return batch_means(column, n_batches);
}

double expansion_term(const Observable& F, const FluctuationPath& path, int m, std::size_t record) {
    const auto x0 = path.xbar_at(0, record);
    if (m == 0) return F.eval(x0);
    if (m > path.order) throw std::out_of_range("expansion order exceeds simulated order");

    std::vector<std::span<const double>> slots;
    double total = 0.0;
    double inv_factorial = 1.0;
    for (int i = 1; i <= m; ++i) {
        inv_factorial /= i;
        double sum = 0.0;
        for (const Composition& c : combinatorics::compositions(m, i)) {
            slots.clear();
            for (int j : c.parts) slots.push_back(path.xbar_at(j, record));
            sum += F.apply_derivative(i, x0, slots);
        }
        total += inv_factorial * sum;
    }
    return total;
}

std::vector<McEstimate> estimate_a_grid(std::span<const int> orders,
                                        std::span<const std::size_t> steps, const Observable& F,
                                        const SimConfig& cfg, const InitialLaw& law,
                                        const McOptions& opts) {
    if (F.dim() != cfg.dim) throw DimensionMismatch("observable dimension differs from config");
    for (int m : orders)
        if (m < 0 || m > cfg.order) throw std::out_of_range("a_m requested beyond simulated order");

    RecordSpec record{{steps.begin(), steps.end()}, /*full_sde=*/false};
    const std::size_t n_out = steps.size() * orders.size();
    auto table = run_paths(cfg, law, opts, record, n_out,
                           [&](const FluctuationPath& path, const Simulator&, std::span<double> out) {
                               for (std::size_t s = 0; s < steps.size(); ++s) {
                                   const std::size_t r = path.record_of_step(steps[s]);
                                   for (std::size_t j = 0; j < orders.size(); ++j)
                                       out[s * orders.size() + j] = expansion_term(F, path, orders[j], r);
                               }
                           });
    std::vector<McEstimate> out;
    out.reserve(n_out);
    for (std::size_t k = 0; k < n_out; ++k) out.push_back(batch_means(table, k, opts.n_batches));
    return out;
}

McEstimate estimate_a(int m, std::size_t step, const Observable& F, const SimConfig& cfg,
                      const InitialLaw& law, const McOptions& opts) {
    const int orders[] = {m};
    const std::size_t steps[] = {step};
    return estimate_a_grid(orders, steps, F, cfg, law, opts).front();
}

std::vector<McEstimate> estimate_weak_remainder(int m, std::size_t step, const Observable& F,
                                                std::span<const double> eps_list,
                                                const SimConfig& cfg, const InitialLaw& law,
                                                const McOptions& opts) {
    if (F.dim() != cfg.dim) throw DimensionMismatch("observable dimension differs from config");
    if (m < 0 || m > cfg.order) throw std::out_of_range("remainder order beyond simulated order");

    RecordSpec record{{step}, /*full_sde=*/false};
    auto table = run_paths(
        cfg, law, opts, record, eps_list.size(),
        [&](const FluctuationPath& path, const Simulator& sim, std::span<double> out) {
            std::vector<double> terms(static_cast<std::size_t>(m) + 1);
            for (int k = 0; k <= m; ++k) terms[static_cast<std::size_t>(k)] = expansion_term(F, path, k, 0);
            for (std::size_t e = 0; e < eps_list.size(); ++e) {
                const double eps = eps_list[e];
                const auto x = sim.full_sde(eps, path.initial.xi_eps(eps), *path.brownian_increments,
                                            path.steps);
                double value = F.eval(x);
                double scale = 1.0;
                for (int k = 0; k <= m; ++k) {
                    value -= scale * terms[static_cast<std::size_t>(k)];
                    scale *= std::sqrt(eps);
                }
                out[e] = value / std::pow(eps, 0.5 * m);
            }
        });
    std::vector<McEstimate> out;
    for (std::size_t e = 0; e < eps_list.size(); ++e) out.push_back(batch_means(table, e, opts.n_batches));
    return out;
}

std::vector<McEstimate> estimate_strong_remainder(std::span<const int> orders, std::size_t step,
                                                  std::span<const double> eps_list,
                                                  const SimConfig& cfg, const InitialLaw& law,
                                                  const McOptions& opts) {
    for (int m : orders)
        if (m < 0 || m > cfg.order) throw std::out_of_range("remainder order beyond simulated order");
    RecordSpec record{{step}, /*full_sde=*/false};
    const std::size_t n_out = eps_list.size() * orders.size();
    auto table = run_paths(
        cfg, law, opts, record, n_out,
        [&](const FluctuationPath& path, const Simulator& sim, std::span<double> out) {
            FluctuationPath view = path;
            for (std::size_t e = 0; e < eps_list.size(); ++e) {
                view.eps = eps_list[e];
                view.xfull = sim.full_sde(view.eps, path.initial.xi_eps(view.eps),
                                          *path.brownian_increments, path.steps);
                for (std::size_t j = 0; j < orders.size(); ++j)
                    out[e * orders.size() + j] = remainder(view, orders[j], 0).norm_squared();
            }
        });
    std::vector<McEstimate> out;
    for (std::size_t k = 0; k < n_out; ++k) out.push_back(batch_means(table, k, opts.n_batches));
    return out;
}

std::vector<McEstimate> estimate_conditional_s(int m, int i, std::span<const std::size_t> steps,
                                               Sign sign, const SimConfig& cfg,
                                               const InitialLaw& law, const McOptions& opts,
                                               ControlVariate cv) {
    if (cfg.dim != 1) throw DimensionMismatch("conditional S estimates require d = 1");
    if (i < 1 || i > m || m > cfg.order) throw std::out_of_range("(m, i) outside 1 <= i <= m <= n");
    const double p_plus = law.prob_positive();
    if ((sign == Sign::positive && p_plus == 0.0) || (sign == Sign::negative && p_plus == 1.0))
        throw EstimationError("initial law gives no mass to the requested sign of xi_0");

    RecordSpec record;
    record.full_sde = false;
    if (cv == ControlVariate::none) record.steps.assign(steps.begin(), steps.end());

    const std::size_t max_step = steps.empty() ? 0 : *std::max_element(steps.begin(), steps.end());
    auto table = run_paths(
        cfg, law, opts, record, steps.size(),
        [&](const FluctuationPath& path, const Simulator&, std::span<double> out) {
            const double xi0 = path.initial.leading()[0];
            if ((sign == Sign::positive) != (xi0 > 0.0)) return;  // rejected: slots stay NaN
            const auto series = s_path(path, m, i);
            if (cv == ControlVariate::none) {
                for (std::size_t s = 0; s < steps.size(); ++s) out[s] = series[path.record_of_step(steps[s])];
                return;
            }
            // Noise coefficient of dS_{m,i} is i sqrt(2) S_{m-1,i-1}, with S_{0,0} = 1.
            std::vector<double> lower;
            if (m - 1 >= 1 && i - 1 >= 1) lower = s_path(path, m - 1, i - 1);
            const bool unit_lower = (m - 1 == 0 && i - 1 == 0);
            const double coeff = i * std::sqrt(2.0);
            const auto& dw = *path.brownian_increments;
            std::vector<double> martingale(max_step + 1, 0.0);
            double acc = 0.0;  // sum_s Lambda(s)^i coeff S(s) dW_s
            for (std::size_t s = 0; s < max_step; ++s) {
                const double noise = unit_lower ? 1.0 : (lower.empty() ? 0.0 : lower[s]);
                const double lam = std::exp(i * model::log_integrating_factor(xi0, path.times[s]));
                acc += lam * coeff * noise * dw[s];
                martingale[s + 1] =
                    acc * std::exp(-i * model::log_integrating_factor(xi0, path.times[s + 1]));
            }
            for (std::size_t s = 0; s < steps.size(); ++s) out[s] = series[steps[s]] - martingale[steps[s]];
        });
    std::vector<McEstimate> out;
    for (std::size_t s = 0; s < steps.size(); ++s) out.push_back(batch_means(table, s, opts.n_batches));
    return out;
}

RateFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: xs and ys differ in length");
    const std::size_t n = xs.size();
    if (n < 2) throw EstimationError("linear fit needs at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx == 0.0) throw EstimationError("fit: abscissae are all equal");
    RateFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    fit.n_points = n;
    return fit;
}

RateFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: xs and ys differ in length");
    if (xs.size() < 4) throw EstimationError("power-law fit needs at least 4 points");
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] > 0.0) || !(ys[k] > 0.0))
            throw std::domain_error("power-law fit requires positive data");
        lx.push_back(std::log(xs[k]));
        ly.push_back(std::log(ys[k]));
    }
    return fit_linear(lx, ly);
}

DecayFit fit_exponential_rate(std::span<const double> ts, std::span<const double> gaps,
                              std::span<const double> stderrs, double threshold) {
    if (ts.size() != gaps.size() || (!stderrs.empty() && stderrs.size() != gaps.size()))
        throw std::invalid_argument("fit: input lengths differ");
    DecayFit out;
    out.threshold = threshold;
    std::vector<double> t_used, log_gap;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double floor = stderrs.empty() ? 0.0 : threshold * stderrs[k];
        if (!(gaps[k] > 0.0) || gaps[k] <= floor) {
            ++out.dropped;
            continue;
        }
        t_used.push_back(ts[k]);
        log_gap.push_back(std::log(gaps[k]));
    }
    if (t_used.size() < 4)
        throw EstimationError("exponential-rate fit has " + std::to_string(t_used.size()) +
                              " usable points (need 4)");
    out.fit = fit_linear(t_used, log_gap);
    out.fit.exponent = -out.fit.exponent;
    return out;
}

}  // namespace fluctx
