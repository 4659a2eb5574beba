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

// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "fluctx/combinatorics.hpp"
#include "fluctx/equilibrium.hpp"
#include "fluctx/estimators.hpp"
#include "fluctx/model.hpp"
#include "fluctx/observables.hpp"
#include "fluctx/recursions.hpp"

using namespace fluctx;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt2(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// Ordinary least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(y[k] > 0.0)) return std::nan("");
        lx.push_back(std::log(x[k]));
        ly.push_back(std::log(y[k]));
    }
    return ols_slope(lx, ly);
}

bool within3(const McEstimate& e, double ref) { return std::abs(e.value - ref) <= 3.0 * e.std_error; }

SimConfig scalar_setting(int order, double horizon) {
    SimConfig cfg;
    cfg.dim = 1;
    cfg.order = order;
    cfg.eps = 0.1;
    cfg.dt = 1e-3;
    cfg.horizon = horizon;
    return cfg;
}

InitialLaw scalar_law() { return InitialLaw::uniform_annulus(1, 0.6, 1.4).with_gaussian(1, 1.0); }

McOptions mc(std::uint64_t seed, std::size_t n_paths) {
    McOptions o;
    o.seed = seed;
    o.n_paths = n_paths;
    return o;
}

// ------------------------------------------------------------------ 1
Outcome recursion_table() {
    Outcome o;
    const auto c = recursions::c_table(8);
    o.require(c->plus(1, 1) == 0, "c11 = 0");
    o.require(c->plus(2, 2) == Rational(1, 2), "c22 = 1/2");
    o.require(c->plus(2, 1) == Rational(-3, 4), "c21 = -3/4");
    o.require(c->plus(4, 4) == Rational(3, 4), "c44 = 3/4");
    o.require(c->plus(4, 3) == Rational(-15, 8), "c43 = -15/8");
    o.require(c->plus(4, 2) == Rational(39, 16), "c42 = 39/16");
    o.require(c->plus(4, 1) == Rational(-87, 32), "c41 = -87/32");
    bool odd_zero = true;
    for (int m = 1; m <= 8; m += 2)
        for (int i = 0; i <= m; ++i) odd_zero = odd_zero && c->plus(m, i) == 0 && c->minus(m, i) == 0;
    o.require(odd_zero, "odd rows zero to n = 8");
    return o;
}

// ------------------------------------------------------------------ 2
Outcome table_consistency() {
    Outcome o;
    const auto c = recursions::c_table(8);
    const auto d = recursions::d_table(8);
    std::size_t mismatches = 0, compared = 0;
    for (int m = 0; m <= 8; ++m)
        for (int i = 0; i <= m; ++i) {
            ++compared;
            if (c->plus(m, i) != d->plus(m, i) || c->minus(m, i) != d->minus(m, i)) ++mismatches;
        }
    o.require(mismatches == 0, std::to_string(compared) + " entries per well compared, " +
                                   std::to_string(mismatches) + " mismatches");
    o.require(c->family() != d->family(), "tables come from distinct builders");
    return o;
}

// ------------------------------------------------------------------ 3
Outcome equilibrium_expansion() {
    Outcome o;
    const auto F = Observable::parse("x^2");
    const auto d = recursions::d_table(4);
    o.require(recursions::big_b_coeff_exact(4, F, *d) == -3, "B4(x^2) = -3 from the table");
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.02};
    std::vector<double> r, absr;
    for (double e : eps) {
        const double value = equilibrium::gibbs_expectation(F, e, equilibrium::QuadratureSpec::for_eps(e));
        r.push_back(value - (1.0 - e));
        absr.push_back(std::abs(r.back()));
    }
    const double order = loglog_slope(eps, absr);
    o.require(order >= 1.8, fmt("residual order %.3f (need >= 1.8)", order));
    // Least squares r = A eps^2 + B eps^3.
    double s44 = 0, s45 = 0, s55 = 0, s4r = 0, s5r = 0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const double a = eps[k] * eps[k], b = a * eps[k];
        s44 += a * a;
        s45 += a * b;
        s55 += b * b;
        s4r += a * r[k];
        s5r += b * r[k];
    }
    const double A = (s4r * s55 - s5r * s45) / (s44 * s55 - s45 * s45);
    o.require(std::abs(A + 3.0) <= 0.3, fmt("eps^2 coefficient %.3f (need -3 +/- 10%%)", A));
    return o;
}

// ------------------------------------------------------------------ 4
Outcome strong_expansion() {
    Outcome o;
    const auto cfg = scalar_setting(2, 2.0);
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    const int orders[] = {0, 1, 2};
    const auto est = estimate_strong_remainder(orders, 2000, eps, cfg, scalar_law(), mc(20260401, 100000));
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> y;
        for (std::size_t e = 0; e < eps.size(); ++e) y.push_back(est[e * 3 + j].value);
        const double slope = loglog_slope(eps, y);
        o.require(slope >= 0.9, "m=" + std::to_string(j) + fmt(" slope %.3f", slope) +
                                    fmt2(" (E|w|^2 %.4g .. %.4g)", y.front(), y.back()));
    }
    return o;
}

// ------------------------------------------------------------------ 5
Outcome weak_expansion() {
    Outcome o;
    const auto cfg = scalar_setting(2, 2.0);
    const auto F = Observable::parse("x^2");
    const auto law = scalar_law();
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    const auto v2 = estimate_weak_remainder(2, 2000, F, eps, cfg, law, mc(20260402, 100000));
    std::vector<double> y;
    for (const auto& v : v2) y.push_back(std::abs(v.value));
    const double slope = loglog_slope(eps, y);
    o.require(slope >= 0.4, fmt("|v2| exponent %.3f (need >= 0.4)", slope));

    const double one[] = {0.1};
    const auto v0 = estimate_weak_remainder(0, 2000, F, one, cfg, law, mc(20260402, 100000)).front();
    const int orders[] = {1, 2};
    const std::size_t step[] = {2000};
    const auto a = estimate_a_grid(orders, step, F, cfg, law, mc(20260402, 100000));
    const double s = std::sqrt(0.1);
    const double predicted = s * a[0].value + 0.1 * a[1].value;
    const double combined = std::sqrt(v0.std_error * v0.std_error + 0.1 * a[0].std_error * a[0].std_error +
                                      0.01 * a[1].std_error * a[1].std_error);
    const double z = (v0.value - predicted) / combined;
    o.require(std::abs(z) <= 3.0, fmt2("v0(0.1) = %.5f vs sqrt(eps) a1 + eps a2 = %.5f", v0.value, predicted) +
                                      fmt(" (%.2f combined stderr)", z));
    return o;
}

// ------------------------------------------------------------------ 6
Outcome longtime_limits() {
    Outcome o;
    const auto law = scalar_law();
    const auto c = recursions::c_table(4);
    const double c22 = to_double(c->plus(2, 2));

    const auto cfg_s = scalar_setting(2, 4.0);
    std::vector<std::size_t> steps_s;
    for (int k = 2; k <= 8; ++k) steps_s.push_back(static_cast<std::size_t>(k) * 500);
    const auto plain = estimate_conditional_s(2, 2, steps_s, Sign::positive, cfg_s, law, mc(20260403, 100000));
    o.require(within3(plain.back(), c22), fmt2("E[S22(4)|xi0>0] = %.5f +/- %.5f", plain.back().value,
                                               plain.back().std_error));

    const auto cv = estimate_conditional_s(2, 2, steps_s, Sign::positive, cfg_s, law, mc(20260403, 100000),
                                           ControlVariate::martingale);
    std::vector<double> ts, gaps, ses;
    for (std::size_t k = 0; k < steps_s.size(); ++k) {
        ts.push_back(static_cast<double>(steps_s[k]) * 1e-3);
        gaps.push_back(std::abs(cv[k].value - c22));
        ses.push_back(cv[k].std_error);
    }
    try {
        const auto rate = fit_exponential_rate(ts, gaps, ses, 5.0);
        o.require(rate.fit.exponent >= 0.8, fmt("S22 gap decay rate %.3f", rate.fit.exponent) +
                                                " over " + std::to_string(rate.fit.n_points) + " points");
    } catch (const std::exception& e) {
        o.require(false, std::string("S22 decay fit: ") + e.what());
    }

    const auto cfg_a = scalar_setting(3, 5.0);
    const auto F = Observable::parse("x^2");
    const int orders[] = {1, 2, 3};
    std::vector<std::size_t> steps_a;
    for (int k = 1; k <= 5; ++k) steps_a.push_back(static_cast<std::size_t>(k) * 1000);
    const auto a = estimate_a_grid(orders, steps_a, F, cfg_a, law, mc(20260404, 100000));
    const double b2 = -1.0;  // b_2(x^2) at p = 1/2, hand-assembled from c21 and c22
    const auto& a2_final = a[(steps_a.size() - 1) * 3 + 1];
    o.require(within3(a2_final, b2), fmt2("a2(5) = %.4f +/- %.4f vs -1", a2_final.value, a2_final.std_error));
    bool odd_ok = true;
    double worst = 0.0;
    for (std::size_t s = 0; s < steps_a.size(); ++s)
        for (std::size_t j : {0u, 2u}) {
            const auto& e = a[s * 3 + j];
            odd_ok = odd_ok && within3(e, 0.0);
            worst = std::max(worst, std::abs(e.value) / e.std_error);
        }
    o.require(odd_ok, fmt("a1, a3 consistent with 0 (max %.2f stderr)", worst));
    return o;
}

// ------------------------------------------------------------------ 7
Outcome vector_divergence() {
    Outcome o;
    for (std::size_t dim : {2u, 3u}) {
        SimConfig cfg;
        cfg.dim = dim;
        cfg.order = 2;
        cfg.eps = 0.1;
        cfg.dt = 1e-3;
        cfg.horizon = 6.0;
        const std::vector<double> times{1.0, 2.0, 4.0, 6.0};
        std::vector<std::size_t> steps;
        for (double t : times) steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));
        const auto F = Observable::coordinate(dim, 0);
        const std::size_t nt = times.size();
        const auto table = run_paths(
            cfg, InitialLaw::deterministic(StateVector::unit(dim, 0)), mc(20260405 + dim, 50000),
            RecordSpec{steps, false}, 3 * nt,
            [&](const FluctuationPath& path, const Simulator&, std::span<double> out) {
                for (std::size_t r = 0; r < nt; ++r) {
                    out[3 * r] = expansion_term(F, path, 2, r);
                    const auto x1 = path.xbar_at(1, r);
                    out[3 * r + 1] = x1[0] * x1[0];
                    double v = 0.0;
                    for (std::size_t c = 1; c < dim; ++c) v += x1[c] * x1[c];
                    out[3 * r + 2] = v;
                }
            });
        const double dm1 = static_cast<double>(dim) - 1.0;
        bool a2_ok = true, r1_ok = true, v1_ok = true;
        std::vector<double> fit_t, fit_y;
        for (std::size_t r = 0; r < nt; ++r) {
            const double t = times[r];
            const double e2 = std::exp(-2.0 * t), e4 = std::exp(-4.0 * t);
            const double ref = -(0.75 * (1.0 - e2) - 0.75 * (e2 - e4) + dm1 * (t - 0.5 * (1.0 - e2)));
            const auto a2 = batch_means(table, 3 * r, 100);
            a2_ok = a2_ok && within3(a2, ref);
            r1_ok = r1_ok && within3(batch_means(table, 3 * r + 1, 100), 0.5 * (1.0 - e4));
            v1_ok = v1_ok && within3(batch_means(table, 3 * r + 2, 100), 2.0 * dm1 * t);
            if (t >= 2.0) {
                fit_t.push_back(t);
                fit_y.push_back(a2.value);
            }
        }
        const double slope = ols_slope(fit_t, fit_y);
        const std::string tag = "d=" + std::to_string(dim) + " ";
        o.require(a2_ok, tag + "a2 matches closed form at t = 1, 2, 4, 6");
        o.require(std::abs(slope + dm1) <= 0.2 * dm1, tag + fmt("slope %.3f", slope));
        o.require(r1_ok, tag + "Var r1");
        o.require(v1_ok, tag + "E|v1|^2");
    }
    return o;
}

// Sup gap between an Euler step of the S_{m,i} Ito dynamics and the stored S series.
double s_gap(const FluctuationPath& p, int m, int i) {
    auto S = [&](int mm, int ii, std::size_t r) -> double {
        if (mm == 0 && ii == 0) return 1.0;
        if (ii < 1 || ii > mm) return 0.0;
        std::vector<double> x;
        for (int k = 1; k <= mm; ++k) x.push_back(p.xbar_at(k, r)[0]);
        return combinatorics::s_value(mm, ii, x);
    };
    double val = S(m, i, 0), g = 0.0;
    for (std::size_t r = 0; r + 1 < p.records(); ++r) {
        const double x0 = p.xbar_at(0, r)[0];
        val += (i * (1 - 3 * x0 * x0) * S(m, i, r) + i * (i - 1.0) * S(m - 2, i - 2, r) -
                i * (3 * x0 * S(m, i + 1, r) + S(m, i + 2, r))) * p.dt +
               i * std::sqrt(2.0) * S(m - 1, i - 1, r) * (*p.brownian_increments)[r];
        g = std::max(g, std::abs(val - S(m, i, r + 1)));
    }
    return g;
}

// ------------------------------------------------------------------ 8
Outcome property_suites() {
    Outcome o;
    PathStream rng(8, 0);

    // model: gradient and Jacobian against central differences
    double grad_err = 0.0, jac_err = 0.0;
    const double h = 1e-5;
    for (int trial = 0; trial < 50; ++trial) {
        StateVector x(3);
        for (std::size_t a = 0; a < 3; ++a) x[a] = 3.0 * rng.uniform() - 1.5;
        const auto b = model::drift(x);
        const auto J = model::linearized_drift(x);
        for (std::size_t a = 0; a < 3; ++a) {
            const auto e = StateVector::unit(3, a, h);
            const double fd = (model::potential_value(x + e) - model::potential_value(x - e)) / (2 * h);
            grad_err = std::max(grad_err, std::abs(b[a] + fd));
            const auto col = (1.0 / (2 * h)) * (model::drift(x + e) - model::drift(x - e));
            for (std::size_t r = 0; r < 3; ++r) jac_err = std::max(jac_err, std::abs(J(r, a) - col[r]));
        }
    }
    o.require(grad_err < 1e-7 && jac_err < 1e-7, fmt2("model FD gaps %.1e / %.1e", grad_err, jac_err));

    // observables: symmetry and finite differences of D^2
    const auto F = Observable::parse("x1^3*x2 - 2*x2^2*x3 + x1*x2*x3^2", 3);
    double sym = 0.0, fd2 = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        StateVector x(3), v(3), w(3);
        for (std::size_t a = 0; a < 3; ++a) {
            x[a] = 2 * rng.uniform() - 1;
            v[a] = 2 * rng.uniform() - 1;
            w[a] = 2 * rng.uniform() - 1;
        }
        const StateVector vw[] = {v, w}, wv[] = {w, v}, vv[] = {v};
        const double d2 = F.apply_derivative(2, x, vw);
        sym = std::max(sym, std::abs(d2 - F.apply_derivative(2, x, wv)));
        const double fd = (F.apply_derivative(1, x + h * w, vv) - F.apply_derivative(1, x - h * w, vv)) / (2 * h);
        fd2 = std::max(fd2, std::abs(d2 - fd));
    }
    o.require(sym < 1e-12 && fd2 < 1e-6, fmt2("observable symmetry %.1e, FD %.1e", sym, fd2));

    // combinatorics: counts and first-part splitting
    bool counts = true, split = true;
    std::vector<double> xs(8);
    for (double& x : xs) x = 2 * rng.uniform() - 1;
    for (int m = 1; m <= 8; ++m)
        for (int i = 1; i <= m; ++i) {
            long binom = 1;
            for (int j = 1; j <= i - 1; ++j) binom = binom * (m - 1 - (i - 1) + j) / j;
            counts = counts && static_cast<long>(combinatorics::compositions(m, i).size()) == binom;
            if (i >= 2) {
                double s = 0.0;
                for (int j = 1; j <= m - i + 1; ++j) s += xs[static_cast<std::size_t>(j - 1)] * combinatorics::s_value(m - j, i - 1, xs);
                split = split && std::abs(s - combinatorics::s_value(m, i, xs)) < 1e-12;
            }
        }
    o.require(counts && split, "composition counts and splitting identity");

    // hierarchy: S dynamics reconstruction, path-averaged, dt versus dt/4
    {
        const auto law = scalar_law();
        auto make = [](double dt) {
            SimConfig c = scalar_setting(4, 3.0);
            c.dt = dt;
            return c;
        };
        const auto fine_cfg = make(2.5e-4), coarse_cfg = make(1e-3);
        const std::pair<int, int> pairs[] = {{2, 2}, {3, 2}, {3, 3}, {4, 2}, {4, 3}, {4, 4}};
        std::vector<double> gc(std::size(pairs), 0.0), gf(std::size(pairs), 0.0);
        double exact21 = 0.0;
        PathStream s(81, 0);
        const int trials = 20;
        for (int trial = 0; trial < trials; ++trial) {
            const auto init = law.sample(s, 4);
            auto fine_inc = std::make_shared<std::vector<double>>(fine_cfg.steps());
            PathStream n(82, static_cast<std::uint64_t>(trial));
            n.normals(*fine_inc, std::sqrt(fine_cfg.dt));
            auto coarse_inc = std::make_shared<std::vector<double>>(coarse_cfg.steps());
            for (std::size_t k = 0; k < coarse_inc->size(); ++k)
                for (std::size_t j = 0; j < 4; ++j) (*coarse_inc)[k] += (*fine_inc)[4 * k + j];
            const auto fine = Simulator(fine_cfg).run(init, fine_inc);
            const auto coarse = Simulator(coarse_cfg).run(init, coarse_inc);
            exact21 = std::max(exact21, s_gap(coarse, 2, 1));
            for (std::size_t k = 0; k < std::size(pairs); ++k) {
                gc[k] += s_gap(coarse, pairs[k].first, pairs[k].second) / trials;
                gf[k] += s_gap(fine, pairs[k].first, pairs[k].second) / trials;
            }
        }
        double worst_ratio = 0.0;
        for (std::size_t k = 0; k < std::size(pairs); ++k) worst_ratio = std::max(worst_ratio, gf[k] / gc[k]);
        o.require(exact21 < 1e-12 && worst_ratio < 0.65,
                  fmt2("S reconstruction: S21 gap %.1e, worst dt/4 gap ratio %.2f", exact21, worst_ratio));
    }

    // equilibrium: stationarity identity
    double worst = 0.0;
    for (double eps : {0.2, 0.1, 0.05})
        for (int k = 1; k <= 8; ++k) {
            const auto st = equilibrium::stationarity_terms(Observable::monomial(1, {k}), eps,
                                                            equilibrium::QuadratureSpec::for_eps(eps));
            worst = std::max(worst, std::abs(st.defect()) / std::max(1.0, st.scale()));
        }
    o.require(worst < 1e-10, fmt("stationarity defect %.1e", worst));

    // estimators: bitwise reproducibility under worker counts
    {
        SimConfig cfg = scalar_setting(2, 1.0);
        cfg.dt = 1e-2;
        const int orders[] = {0, 1, 2};
        const std::size_t steps[] = {50, 100};
        auto run = [&](unsigned w) {
            McOptions opt = mc(99, 3000);
            opt.workers = w;
            return estimate_a_grid(orders, steps, Observable::parse("x^2"), cfg, scalar_law(), opt);
        };
        const auto base = run(1);
        bool same = true;
        for (unsigned w : {2u, 4u}) {
            const auto other = run(w);
            for (std::size_t k = 0; k < base.size(); ++k)
                same = same && other[k].value == base[k].value && other[k].std_error == base[k].std_error;
        }
        o.require(same, "bitwise identical estimates for 1, 2, 4 workers");
    }
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no runtime limit
    std::function<Outcome()> run;
};

}  // namespace

// Optional arguments select criteria by number; the default runs all.
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
    const std::vector<Criterion> criteria{
        {1, "recursion seeds and table", 1.0, recursion_table},
        {2, "dynamical/equilibrium table consistency", 1.0, table_consistency},
        {3, "equilibrium expansion order", 10.0, equilibrium_expansion},
        {4, "strong dynamical expansion", 0.0, strong_expansion},
        {5, "weak expansion", 0.0, weak_expansion},
        {6, "long-time limits and rates", 0.0, longtime_limits},
        {7, "vector-case divergence", 0.0, vector_divergence},
        {8, "property suites", 0.0, property_suites},
    };
    int failed = 0;
    std::size_t ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0) out.require(secs < c.budget_seconds, fmt("runtime %.2f s", secs) + fmt(" < %.0f s", c.budget_seconds));
        failed += !out.pass;
        std::printf("criterion %d %s: %s [%s] (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.name,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", ran - static_cast<std::size_t>(failed), ran);
    return failed == 0 ? 0 : 1;
}
