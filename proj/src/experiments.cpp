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

#include "fluctx/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <boost/version.hpp>

#include "fluctx/equilibrium.hpp"
#include "fluctx/errors.hpp"
#include "fluctx/estimators.hpp"
#include "fluctx/observables.hpp"
#include "json.hpp"

namespace fluctx {

namespace {

constexpr double kStrongSlopeMin = 0.9;
constexpr double kWeakSlopeMin = 0.4;
constexpr double kDecayRateMin = 0.8;
constexpr double kSConvergenceTime = 4.0;
constexpr double kAConvergenceTime = 5.0;
constexpr double kRateWindowStart = 1.0;
constexpr double kRateWindowEnd = 4.0;
constexpr double kSlopeWindowStart = 2.0;
constexpr double kReexpansionEps = 0.1;
constexpr double kStationarityTol = 1e-10;
constexpr double kResidualOrderFactor = 0.9;
constexpr double kCoefficientTol = 0.10;
constexpr double kSlopeTol = 0.20;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

class Params {
public:
    Params& add(std::string_view key, double value) { return add(key, num(value)); }
    Params& add(std::string_view key, int value) { return add(key, std::to_string(value)); }
    Params& add(std::string_view key, std::size_t value) { return add(key, std::to_string(value)); }
    Params& add(std::string_view key, std::string_view value) {
        if (!text_.empty()) text_ += ';';
        text_.append(key).append("=").append(value);
        return *this;
    }
    std::string str() const { return text_; }

private:
    std::string text_;
};

struct Context {
    const ExperimentConfig& cfg;
    std::string name;
    McOptions opts;
    ExperimentResult result;

    void row(std::string check, const Params& params, double estimate, std::optional<double> se,
             std::optional<double> reference, Provenance prov, bool pass) {
        result.rows.push_back(ResultRow{name, std::move(check), params.str(), estimate, se, reference,
                                        prov, pass});
    }
    void info(std::string check, const Params& params, double estimate,
              std::optional<double> se = std::nullopt) {
        row(std::move(check), params, estimate, se, std::nullopt, Provenance::none, true);
    }
};

bool within(double value, double reference, double tolerance) {
    return std::isfinite(value) && std::abs(value - reference) <= tolerance;
}

SimConfig sim_config(const ExperimentConfig& cfg) {
    SimConfig sim;
    sim.dim = cfg.dim;
    sim.order = cfg.order;
    sim.eps = cfg.eps_grid.empty() ? 0.1 : cfg.eps_grid.front();
    sim.dt = cfg.dt;
    sim.horizon = cfg.time_grid.empty() ? cfg.dt : cfg.time_grid.back();
    sim.x0_mode = cfg.x0();
    sim.validate();
    return sim;
}

std::vector<std::size_t> grid_steps(const SimConfig& sim, std::span<const double> times) {
    std::vector<std::size_t> steps;
    for (double t : times) steps.push_back(static_cast<std::size_t>(std::llround(t / sim.dt)));
    return steps;
}

double rational_value(const Rational& r) { return to_double(r); }

// ---------------------------------------------------------------- tables

void table_checks(Context& ctx, const RationalTable& c) {
    struct Expected {
        int m, i;
        bool bar;
        Rational value;
        Provenance prov;
    };
    const std::vector<Expected> expected{
        {1, 1, false, Rational(0), Provenance::paper},
        {2, 2, false, Rational(1, 2), Provenance::paper},
        {2, 1, false, Rational(-3, 4), Provenance::derived},
        {2, 1, true, Rational(3, 4), Provenance::derived},
        {3, 1, false, Rational(0), Provenance::paper},
        {3, 2, false, Rational(0), Provenance::paper},
        {3, 3, false, Rational(0), Provenance::paper},
        {4, 4, false, Rational(3, 4), Provenance::derived},
        {4, 3, false, Rational(-15, 8), Provenance::derived},
        {4, 2, false, Rational(39, 16), Provenance::derived},
        {4, 1, false, Rational(-87, 32), Provenance::derived},
    };
    for (const auto& e : expected) {
        if (e.m > c.order()) continue;
        const Rational& got = e.bar ? c.minus(e.m, e.i) : c.plus(e.m, e.i);
        ctx.row(e.bar ? "cbar_entry" : "c_entry",
                Params().add("m", e.m).add("i", e.i).add("exact", to_string(got)),
                rational_value(got), std::nullopt, rational_value(e.value), e.prov, got == e.value);
    }
    std::size_t odd_nonzero = 0, parity_violations = 0;
    for (int m = 0; m <= c.order(); ++m)
        for (int i = 0; i <= m; ++i) {
            if (m % 2 == 1 && (c.plus(m, i) != 0 || c.minus(m, i) != 0)) ++odd_nonzero;
            const Rational signed_plus = (i % 2 == 0) ? c.plus(m, i) : Rational(-c.plus(m, i));
            if (c.minus(m, i) != signed_plus) ++parity_violations;
        }
    ctx.row("odd_rows_zero", Params().add("n", c.order()), static_cast<double>(odd_nonzero), std::nullopt,
            0.0, Provenance::paper, odd_nonzero == 0);
    ctx.row("parity_cbar", Params().add("n", c.order()), static_cast<double>(parity_violations),
            std::nullopt, 0.0, Provenance::derived, parity_violations == 0);
}

void consistency_check(Context& ctx, const RationalTable& c, const RationalTable& d) {
    std::size_t mismatches = 0;
    for (int m = 0; m <= c.order(); ++m)
        for (int i = 0; i <= m; ++i)
            if (c.plus(m, i) != d.plus(m, i) || c.minus(m, i) != d.minus(m, i)) ++mismatches;
    ctx.row("c_equals_d", Params().add("n", c.order()), static_cast<double>(mismatches), std::nullopt, 0.0,
            Provenance::paper, mismatches == 0 && c.same_entries(d));
}

void run_recursion_tables(Context& ctx) {
    const int n = ctx.cfg.order;
    auto c = recursions::c_table(n);
    auto d = recursions::d_table(n);
    table_checks(ctx, *c);
    consistency_check(ctx, *c, *d);
    ctx.result.tables = {c, d};
}

void run_consistency(Context& ctx) {
    const int n = ctx.cfg.order;
    auto c = recursions::c_table(n);
    auto d = recursions::d_table(n);
    consistency_check(ctx, *c, *d);
    const Observable F = Observable::parse(ctx.cfg.observable, 1);
    for (int m = 0; m <= n; ++m) {
        const Rational big = recursions::big_b_coeff_exact(m, F, *d);
        const Rational small = recursions::b_coeff_exact(m, F, Rational(1, 2), *c);
        ctx.row("B_equals_b", Params().add("m", m).add("F", ctx.cfg.observable).add("exact", to_string(big)),
                rational_value(big), std::nullopt, rational_value(small), Provenance::paper, big == small);
    }
    ctx.result.tables = {c, d};
}

// ----------------------------------------------------------- equilibrium

void run_equilibrium(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const Observable F = Observable::parse(cfg.observable, 1);
    const int m = cfg.order;
    const int q2 = (m % 2 == 0) ? m + 2 : m + 1;  // 2 x (power of the first omitted nonzero term)
    const double q = 0.5 * q2;
    auto d = recursions::d_table(std::min(kMaxOrder, std::max(q2, m)));

    for (double eps : cfg.eps_grid) {
        const auto spec = equilibrium::QuadratureSpec::for_eps(eps);
        const double value = equilibrium::gibbs_expectation(F, eps, spec);
        ctx.info("gibbs_expectation", Params().add("eps", eps).add("F", cfg.observable), value);
        ctx.info("tail_bound", Params().add("eps", eps).add("radius", spec.radius), spec.tail_bound);
        const auto st = equilibrium::stationarity_terms(F, eps, spec);
        const double rel = std::abs(st.defect()) / std::max(1.0, st.scale());
        ctx.row("stationarity", Params().add("eps", eps).add("F", cfg.observable).add("tol", kStationarityTol),
                rel, std::nullopt, 0.0, Provenance::paper, rel < kStationarityTol);
    }

    const auto fit = equilibrium::expansion_residual_order(F, m, cfg.eps_grid, *d);
    for (std::size_t k = 0; k < fit.eps.size(); ++k)
        ctx.info("expansion_residual", Params().add("eps", fit.eps[k]).add("m", m), fit.residuals[k]);
    ctx.row("residual_order",
            Params().add("m", m).add("F", cfg.observable).add("min", kResidualOrderFactor * q),
            fit.fit.exponent, std::nullopt, q, Provenance::paper,
            fit.fit.exponent >= kResidualOrderFactor * q);

    if (q2 <= d->order()) {
        const double lead = recursions::big_b_coeff(q2, F, *d);
        if (lead != 0.0) {
            const double powers[] = {q, q + 1.0};
            const auto coef = equilibrium::fit_power_series(fit.eps, fit.residuals, powers);
            ctx.row("residual_leading_coefficient",
                    Params().add("power", q).add("F", cfg.observable).add("rel_tol", kCoefficientTol),
                    coef[0], std::nullopt, lead, Provenance::derived,
                    within(coef[0], lead, kCoefficientTol * std::abs(lead)));
        }
    }
    ctx.result.tables.push_back(d);
}

// -------------------------------------------------------- Monte Carlo runs

RateFit safe_power_fit(std::span<const double> xs, std::span<const double> ys, bool& ok) {
    try {
        ok = true;
        return fit_power_law(xs, ys);
    } catch (const std::exception&) {
        ok = false;
        return RateFit{std::nan(""), std::nan(""), 0.0, 0};
    }
}

void run_strong(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const SimConfig sim = sim_config(cfg);
    const InitialLaw law = cfg.initial_law.build(cfg.dim);
    std::vector<int> orders;
    for (int m = 0; m <= cfg.order; ++m) orders.push_back(m);
    const auto steps = grid_steps(sim, cfg.time_grid);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const double t = cfg.time_grid[s];
        const auto est = estimate_strong_remainder(orders, steps[s], cfg.eps_grid, sim, law, ctx.opts);
        for (std::size_t j = 0; j < orders.size(); ++j) {
            std::vector<double> ys;
            for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
                const auto& z = est[e * orders.size() + j];
                ys.push_back(z.value);
                ctx.info("strong_moment", Params().add("t", t).add("m", orders[j]).add("eps", cfg.eps_grid[e]),
                         z.value, z.std_error);
            }
            bool ok = false;
            const auto fit = safe_power_fit(cfg.eps_grid, ys, ok);
            ctx.row("strong_slope", Params().add("t", t).add("m", orders[j]).add("min", kStrongSlopeMin),
                    fit.exponent, std::nullopt, 1.0, Provenance::paper, ok && fit.exponent >= kStrongSlopeMin);
        }
    }
}

void run_weak(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const SimConfig sim = sim_config(cfg);
    const InitialLaw law = cfg.initial_law.build(cfg.dim);
    const Observable F = Observable::parse(cfg.observable, cfg.dim);
    const int n = cfg.order;
    const auto steps = grid_steps(sim, cfg.time_grid);
    const bool has_reexpansion =
        n >= 2 && std::find(cfg.eps_grid.begin(), cfg.eps_grid.end(), kReexpansionEps) != cfg.eps_grid.end();

    for (std::size_t s = 0; s < steps.size(); ++s) {
        const double t = cfg.time_grid[s];
        const auto v = estimate_weak_remainder(n, steps[s], F, cfg.eps_grid, sim, law, ctx.opts);
        std::vector<double> ys;
        for (std::size_t e = 0; e < v.size(); ++e) {
            ys.push_back(std::abs(v[e].value));
            ctx.info("weak_remainder", Params().add("t", t).add("m", n).add("eps", cfg.eps_grid[e]), v[e].value,
                     v[e].std_error);
        }
        bool ok = false;
        const auto fit = safe_power_fit(cfg.eps_grid, ys, ok);
        ctx.row("weak_slope", Params().add("t", t).add("m", n).add("min", kWeakSlopeMin), fit.exponent,
                std::nullopt, 0.5, Provenance::paper, ok && fit.exponent >= kWeakSlopeMin);

        if (!has_reexpansion) continue;
        const double eps_one[] = {kReexpansionEps};
        const auto v0 = estimate_weak_remainder(0, steps[s], F, eps_one, sim, law, ctx.opts).front();
        const int orders[] = {1, 2};
        const std::size_t step_one[] = {steps[s]};
        const auto a = estimate_a_grid(orders, step_one, F, sim, law, ctx.opts);
        const double re = std::sqrt(kReexpansionEps);
        const double reference = re * a[0].value + kReexpansionEps * a[1].value;
        const double combined = std::sqrt(v0.std_error * v0.std_error + re * re * a[0].std_error * a[0].std_error +
                                          kReexpansionEps * kReexpansionEps * a[1].std_error * a[1].std_error);
        ctx.row("v0_reexpansion", Params().add("t", t).add("eps", kReexpansionEps).add("combined_stderr", combined),
                v0.value, v0.std_error, reference, Provenance::derived,
                within(v0.value, reference, 3.0 * combined));
    }
}

void run_longtime(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const SimConfig sim = sim_config(cfg);
    const InitialLaw law = cfg.initial_law.build(cfg.dim);
    const Observable F = Observable::parse(cfg.observable, 1);
    const auto steps = grid_steps(sim, cfg.time_grid);
    auto c = recursions::c_table(cfg.order);
    const double c22 = rational_value(c->plus(2, 2));

    // Plain conditional mean of S_{2,2}: convergence check.
    const auto plain = estimate_conditional_s(2, 2, steps, Sign::positive, sim, law, ctx.opts);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const double t = cfg.time_grid[s];
        const Params p = Params().add("t", t).add("m", 2).add("i", 2).add("sign", "+");
        if (t >= kSConvergenceTime)
            ctx.row("conditional_s", p, plain[s].value, plain[s].std_error, c22, Provenance::paper,
                    within(plain[s].value, c22, 3.0 * plain[s].std_error));
        else
            ctx.info("conditional_s", p, plain[s].value, plain[s].std_error);
    }

    // Control-variate estimate of the same mean: decay-rate fit.
    const auto cv = estimate_conditional_s(2, 2, steps, Sign::positive, sim, law, ctx.opts,
                                           ControlVariate::martingale);
    std::vector<double> ts, gaps, ses;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const double t = cfg.time_grid[s];
        ctx.info("conditional_s_cv", Params().add("t", t).add("m", 2).add("i", 2).add("sign", "+"), cv[s].value,
                 cv[s].std_error);
        if (t >= kRateWindowStart && t <= kRateWindowEnd) {
            ts.push_back(t);
            gaps.push_back(std::abs(cv[s].value - c22));
            ses.push_back(cv[s].std_error);
        }
    }
    try {
        const auto decay = fit_exponential_rate(ts, gaps, ses);
        ctx.row("s22_decay_rate",
                Params().add("min", kDecayRateMin).add("threshold", decay.threshold).add("dropped", decay.dropped),
                decay.fit.exponent, std::nullopt, 1.0, Provenance::paper, decay.fit.exponent >= kDecayRateMin);
    } catch (const EstimationError&) {
        ctx.row("s22_decay_rate", Params().add("min", kDecayRateMin).add("error", "too_few_points"),
                std::nan(""), std::nullopt, 1.0, Provenance::paper, false);
    }

    std::vector<int> orders;
    for (int m = 0; m <= cfg.order; ++m) orders.push_back(m);
    const auto a = estimate_a_grid(orders, steps, F, sim, law, ctx.opts);
    const double p_plus = law.prob_positive();
    const double b2 = recursions::b_coeff(2, F, Rational(p_plus), *c);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const double t = cfg.time_grid[s];
        for (std::size_t j = 0; j < orders.size(); ++j) {
            const int m = orders[j];
            const auto& z = a[s * orders.size() + j];
            const Params p = Params().add("t", t).add("m", m).add("F", cfg.observable);
            if (m % 2 == 1 && m <= 3 && law.is_symmetric())
                ctx.row("a_coefficient", p, z.value, z.std_error, 0.0, Provenance::paper,
                        within(z.value, 0.0, 3.0 * z.std_error));
            else if (m == 2 && t >= kAConvergenceTime)
                ctx.row("a_coefficient", p, z.value, z.std_error, b2, Provenance::derived,
                        within(z.value, b2, 3.0 * z.std_error));
            else
                ctx.info("a_coefficient", p, z.value, z.std_error);
        }
    }
    ctx.result.tables.push_back(c);
}

double closed_form_r2(double t, double d) {
    const double e2 = std::exp(-2.0 * t), e4 = std::exp(-4.0 * t);
    return -(0.75 * (1.0 - e2) - 0.75 * (e2 - e4) + (d - 1.0) * (t - 0.5 * (1.0 - e2)));
}

void run_vector(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& lc = cfg.initial_law;
    bool unit_e1 = lc.kind == "deterministic" && lc.point.size() == cfg.dim && lc.point[0] == 1.0;
    for (std::size_t a = 1; unit_e1 && a < lc.point.size(); ++a) unit_e1 = lc.point[a] == 0.0;
    for (double s : lc.higher_std) unit_e1 = unit_e1 && s == 0.0;
    if (!unit_e1)
        throw std::invalid_argument("vector_divergence closed forms assume the deterministic law xi = e1");

    const SimConfig sim = sim_config(cfg);
    const InitialLaw law = lc.build(cfg.dim);
    const Observable F = Observable::parse(cfg.observable, cfg.dim);
    const auto steps = grid_steps(sim, cfg.time_grid);
    RecordSpec record{steps, false};
    const std::size_t nt = steps.size();
    // Per time: a_2 term, r_1^2, |v_1|^2.
    const auto table = run_paths(sim, law, ctx.opts, record, 3 * nt,
                                 [&](const FluctuationPath& path, const Simulator&, std::span<double> out) {
                                     const auto rt = decompose_radial_tangential(path, 1);
                                     for (std::size_t r = 0; r < nt; ++r) {
                                         out[3 * r] = expansion_term(F, path, 2, r);
                                         out[3 * r + 1] = rt.radial[r] * rt.radial[r];
                                         double v2 = 0.0;
                                         for (std::size_t a = 0; a < cfg.dim; ++a) {
                                             const double v = rt.tangential[r * cfg.dim + a];
                                             v2 += v * v;
                                         }
                                         out[3 * r + 2] = v2;
                                     }
                                 });
    const double d = static_cast<double>(cfg.dim);
    std::vector<double> ts, ys;
    for (std::size_t r = 0; r < nt; ++r) {
        const double t = cfg.time_grid[r];
        const auto a2 = batch_means(table, 3 * r, ctx.opts.n_batches);
        const auto r1 = batch_means(table, 3 * r + 1, ctx.opts.n_batches);
        const auto v1 = batch_means(table, 3 * r + 2, ctx.opts.n_batches);
        const double ref_a2 = closed_form_r2(t, d);
        const double ref_r1 = 0.5 * (1.0 - std::exp(-4.0 * t));
        const double ref_v1 = 2.0 * (d - 1.0) * t;
        const Params p = Params().add("t", t).add("d", cfg.dim);
        ctx.row("a2_closed_form", Params(p).add("F", cfg.observable), a2.value, a2.std_error, ref_a2,
                Provenance::derived, within(a2.value, ref_a2, 3.0 * a2.std_error));
        ctx.row("var_r1", p, r1.value, r1.std_error, ref_r1, Provenance::paper,
                within(r1.value, ref_r1, 3.0 * r1.std_error));
        ctx.row("mean_sq_v1", p, v1.value, v1.std_error, ref_v1, Provenance::paper,
                within(v1.value, ref_v1, 3.0 * v1.std_error));
        if (t >= kSlopeWindowStart) {
            ts.push_back(t);
            ys.push_back(a2.value);
        }
    }
    const double ref_slope = -(d - 1.0);
    if (ts.size() >= 2) {
        const auto fit = fit_linear(ts, ys);
        ctx.row("a2_slope", Params().add("d", cfg.dim).add("t_min", kSlopeWindowStart).add("rel_tol", kSlopeTol),
                fit.exponent, std::nullopt, ref_slope, Provenance::derived,
                within(fit.exponent, ref_slope, kSlopeTol * std::abs(ref_slope)));
    } else {
        ctx.row("a2_slope", Params().add("d", cfg.dim).add("error", "too_few_points"), std::nan(""),
                std::nullopt, ref_slope, Provenance::derived, false);
    }
}

std::string join(std::span<const double> xs) {
    std::string out = "{";
    for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? "," : "") + num(xs[k]);
    return out + "}";
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

}  // namespace

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::paper: return "paper";
        case Provenance::derived: return "derived";
        case Provenance::trivial: return "trivial";
        case Provenance::none: return "none";
    }
    return "none";
}

bool ExperimentResult::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.pass; });
}

std::vector<PlanNode> plan_experiment(const ExperimentConfig& cfg) {
    std::vector<PlanNode> nodes;
    auto add = [&](std::string label, std::vector<std::size_t> deps = {}) {
        nodes.push_back(PlanNode{nodes.size() + 1, std::move(label), std::move(deps)});
        return nodes.size();
    };
    const std::string mc = "n_paths=" + std::to_string(cfg.n_paths) + " batches=" + std::to_string(cfg.batches()) +
                           " seed=" + std::to_string(cfg.seed) + " dt=" + num(cfg.dt) +
                           " order=" + std::to_string(cfg.order) + " dim=" + std::to_string(cfg.dim);
    const std::string times = join(cfg.time_grid), eps = join(cfg.eps_grid);
    switch (cfg.experiment) {
        case Experiment::recursion_tables: {
            const auto c = add("c_table(n=" + std::to_string(cfg.order) + ")");
            const auto d = add("d_table(n=" + std::to_string(cfg.order) + ")");
            const auto k = add("entry, odd-row and parity checks", {c});
            const auto e = add("c == d entrywise", {c, d});
            add("write tables.csv, results.csv, manifest.json", {k, e});
            break;
        }
        case Experiment::consistency: {
            const auto c = add("c_table(n=" + std::to_string(cfg.order) + ")");
            const auto d = add("d_table(n=" + std::to_string(cfg.order) + ")");
            const auto e = add("c == d entrywise", {c, d});
            const auto b = add("B_m(F) == b_m(F), p = 1/2, F = " + cfg.observable, {c, d});
            add("write tables.csv, results.csv, manifest.json", {e, b});
            break;
        }
        case Experiment::equilibrium_check: {
            const auto q = add("certify quadrature per eps in " + eps);
            const auto d = add("d_table");
            const auto g = add("gibbs_expectation(F = " + cfg.observable + ")", {q});
            const auto s = add("stationarity identity", {q});
            const auto r = add("residual vs sum eps^{k/2} B_k, m = " + std::to_string(cfg.order), {g, d});
            const auto f = add("power-law and leading-coefficient fits", {r});
            add("write tables.csv, results.csv, manifest.json", {s, f});
            break;
        }
        case Experiment::strong_rates: {
            const auto p = add("simulate chain X0..Xn: " + mc + " t=" + times);
            const auto x = add("full SDE per eps in " + eps + " on shared increments", {p});
            const auto w = add("E|w_{eps,m}|^2 by batch means", {p, x});
            const auto f = add("power-law fit per (t, m)", {w});
            add("write results.csv, manifest.json", {f});
            break;
        }
        case Experiment::weak_rates: {
            const auto p = add("simulate chain X0..Xn: " + mc + " t=" + times);
            const auto x = add("full SDE per eps in " + eps + " on shared increments", {p});
            const auto v = add("v_n^eps, F = " + cfg.observable, {p, x});
            const auto f = add("power-law fit of |v_n^eps|", {v});
            const auto a = add("a_1, a_2 and v_0 at eps = 0.1 (common paths)", {p, x});
            add("write results.csv, manifest.json", {f, a});
            break;
        }
        case Experiment::longtime_scalar: {
            const auto c = add("c_table(n=" + std::to_string(cfg.order) + ")");
            const auto p = add("simulate chain X0..Xn: " + mc + " t=" + times);
            const auto s = add("E[S_{2,2} | xi_0 > 0] plain and control variate", {p});
            const auto r = add("exponential-rate fit of |E S_{2,2} - c_{2,2}|", {s, c});
            const auto a = add("a_m(t, F), F = " + cfg.observable, {p});
            const auto b = add("compare with b_m(F)", {a, c});
            add("write tables.csv, results.csv, manifest.json", {r, b});
            break;
        }
        case Experiment::vector_divergence: {
            const auto p = add("simulate chain X0..X2: " + mc + " t=" + times);
            const auto r = add("radial/tangential decomposition of X1", {p});
            const auto a = add("a_2(t, F) vs closed form, F = " + cfg.observable, {p});
            const auto f = add("linear fit of a_2 over t >= 2", {a});
            add("write results.csv, manifest.json", {r, f});
            break;
        }
    }
    return nodes;
}

void print_plan(std::ostream& os, const ExperimentConfig& cfg) {
    os << "experiment " << experiment_name(cfg.experiment) << " -> " << cfg.output_dir << "\n";
    for (const auto& node : plan_experiment(cfg)) {
        os << "  [" << node.id << "] " << node.label;
        if (!node.deps.empty()) {
            os << "  <-";
            for (auto d : node.deps) os << " [" << d << "]";
        }
        os << "\n";
    }
}

ExperimentResult run_experiment_rows(const ExperimentConfig& cfg, unsigned workers) {
    const auto start = std::chrono::steady_clock::now();
    Context ctx{cfg, std::string(experiment_name(cfg.experiment)), McOptions{}, {}};
    ctx.opts.seed = cfg.seed;
    ctx.opts.n_paths = cfg.n_paths;
    ctx.opts.n_batches = cfg.batches();
    ctx.opts.workers = resolve_workers(workers);
    switch (cfg.experiment) {
        case Experiment::recursion_tables: run_recursion_tables(ctx); break;
        case Experiment::consistency: run_consistency(ctx); break;
        case Experiment::equilibrium_check: run_equilibrium(ctx); break;
        case Experiment::strong_rates: run_strong(ctx); break;
        case Experiment::weak_rates: run_weak(ctx); break;
        case Experiment::longtime_scalar: run_longtime(ctx); break;
        case Experiment::vector_divergence: run_vector(ctx); break;
    }
    ctx.result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(ctx.result);
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "experiment,check,params,estimate,stderr,reference,provenance,pass\n";
    for (const auto& r : rows) {
        os << csv_field(r.experiment) << ',' << csv_field(r.check) << ',' << csv_field(r.params) << ','
           << num(r.estimate) << ',' << (r.std_error ? num(*r.std_error) : "") << ','
           << (r.reference ? num(*r.reference) : "") << ',' << provenance_name(r.provenance) << ','
           << (r.pass ? "true" : "false") << '\n';
    }
}

void write_tables_csv(std::ostream& os, const std::vector<std::shared_ptr<const RationalTable>>& tables) {
    os << "family,m,i,numerator,denominator\n";
    for (const auto& t : tables) recursions::write_csv_rows(os, *t);
}

int run_experiment(const ExperimentConfig& cfg, unsigned workers) {
    const unsigned used = resolve_workers(workers);
    const auto result = run_experiment_rows(cfg, used);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("results.csv");
        write_results_csv(out, result.rows);
        if (!out) throw std::runtime_error("write failed for results.csv");
    }
    if (!result.tables.empty()) {
        auto out = open("tables.csv");
        write_tables_csv(out, result.tables);
        if (!out) throw std::runtime_error("write failed for tables.csv");
    }
    {
        nlohmann::json manifest;
        manifest["config"] = nlohmann::json::parse(to_json(cfg));
        manifest["experiment"] = std::string(experiment_name(cfg.experiment));
        manifest["seed"] = cfg.seed;
        manifest["workers"] = used;
        manifest["wall_seconds"] = result.wall_seconds;
        manifest["all_pass"] = result.all_pass();
        manifest["rows"] = result.rows.size();
        manifest["versions"] = {{"fluctx", "0.1.0"},
                                {"compiler", __VERSION__},
                                {"boost", BOOST_LIB_VERSION},
                                {"cxx_standard", static_cast<long>(__cplusplus)}};
        auto out = open("manifest.json");
        out << manifest.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed for manifest.json");
    }
    return result.all_pass() ? 0 : 2;
}

}  // namespace fluctx
