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

#include "fluctx/recursions.hpp"

#include <array>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fluctx/combinatorics.hpp"

namespace fluctx {

// ---------------------------------------------------------------------------
// RationalTable

RationalTable::RationalTable(Family family, int order) : family_(family), order_(order) {
    if (order < 0 || order > kMaxOrder)
        throw std::out_of_range("table order must lie in [0, " + std::to_string(kMaxOrder) + "]");
    const auto n = static_cast<std::size_t>(order) + 1;
    plus_.assign(n * (n + 1) / 2, Rational(0));
    minus_ = plus_;
}

std::size_t RationalTable::index(int m, int i) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(m + 1) / 2 + static_cast<std::size_t>(i);
}

const Rational& RationalTable::plus(int m, int i) const {
    static const Rational zero(0);
    if (m < 0 || m > order_ || i < 0 || i > m) return zero;
    return plus_[index(m, i)];
}

const Rational& RationalTable::minus(int m, int i) const {
    static const Rational zero(0);
    if (m < 0 || m > order_ || i < 0 || i > m) return zero;
    return minus_[index(m, i)];
}

void RationalTable::set(int m, int i, Rational plus_value, Rational minus_value) {
    if (m < 0 || m > order_ || i < 0 || i > m) throw std::out_of_range("table index out of range");
    plus_[index(m, i)] = std::move(plus_value);
    minus_[index(m, i)] = std::move(minus_value);
}

bool RationalTable::same_entries(const RationalTable& other) const {
    return order_ == other.order_ && plus_ == other.plus_ && minus_ == other.minus_;
}

namespace recursions {

namespace {

struct TableCache {
    std::mutex mu;
    std::map<int, std::shared_ptr<const RationalTable>> tables;
};

std::shared_ptr<const RationalTable> memoized(TableCache& cache, int n, RationalTable (*build)(int)) {
    if (n < 0 || n > kMaxOrder)
        throw std::out_of_range("table order must lie in [0, " + std::to_string(kMaxOrder) + "]");
    std::lock_guard lock(cache.mu);
    auto& slot = cache.tables[n];
    if (!slot) slot = std::make_shared<const RationalTable>(build(n));
    return slot;
}

// Exact Taylor coefficient F^{(i)}(x) / i! at an integer point; the double
// coefficients of F are converted exactly.
Rational taylor_coefficient(const Observable& F, int i, int x) {
    if (F.dim() != 1) throw DimensionMismatch("coefficient assembly is defined for d = 1");
    Rational sum(0);
    for (const auto& [alpha, c] : F.terms()) {
        const int k = alpha[0];
        if (k < i) continue;
        // binomial(k, i) * x^{k - i}
        BigInt binom = 1;
        for (int j = 0; j < i; ++j) binom = binom * (k - j) / (j + 1);
        BigInt power = 1;
        for (int j = 0; j < k - i; ++j) power *= x;
        sum += Rational(c) * Rational(binom * power);
    }
    return sum;
}

// --- dynamical limits ------------------------------------------------------

RationalTable build_c(int n) {
    RationalTable t(RationalTable::Family::dynamical, n);
    auto c = [&](int m, int i) -> Rational {
        if (m == 0 && i == 0) return t.plus(0, 0);
        if (m < 1 || i < 1 || i > m) return Rational(0);
        return t.plus(m, i);
    };
    auto cbar = [&](int m, int i) -> Rational {
        if (m == 0 && i == 0) return t.minus(0, 0);
        if (m < 1 || i < 1 || i > m) return Rational(0);
        return t.minus(m, i);
    };

    t.set(0, 0, Rational(1), Rational(1));
    const Rational half(1, 2), three_halves(3, 2);
    for (int m = 1; m <= n; ++m) {
        for (int i = m; i >= 1; --i) {
            if (m == 1 && i == 1) {
                t.set(1, 1, Rational(0), Rational(0));
                continue;
            }
            if (m == 2 && i == 2) {
                t.set(2, 2, half, half);
                continue;
            }
            const Rational lead(i - 1, 2);
            Rational plus = lead * c(m - 2, i - 2) - three_halves * c(m, i + 1) - half * c(m, i + 2);
            Rational minus =
                lead * cbar(m - 2, i - 2) + three_halves * cbar(m, i + 1) - half * cbar(m, i + 2);
            t.set(m, i, std::move(plus), std::move(minus));
        }
    }
    return t;
}

// --- equilibrium Laplace coefficients --------------------------------------
//
// Near the well at sigma = +-1, with x = sigma + sqrt(eps) z,
//   (V(x) - V(sigma)) / eps = z^2 + sigma s z^3 + s^2 z^4 / 4,   s = sqrt(eps).
// Expanding exp(-sigma s z^3 - s^2 z^4 / 4) in s and integrating each
// coefficient against e^{-z^2} gives formal series N_i(s) = <z^i ...> and
// D(s) = <...>; then d_{m,i} = [s^{m-i}] N_i(s) / D(s).

using Poly = std::vector<Rational>;  // coefficients in z

void add_scaled(Poly& acc, const Poly& p, const Rational& scale, int shift) {
    if (acc.size() < p.size() + static_cast<std::size_t>(shift))
        acc.resize(p.size() + static_cast<std::size_t>(shift), Rational(0));
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] != 0) acc[k + static_cast<std::size_t>(shift)] += scale * p[k];
}

// <z^k> under the normalized weight e^{-z^2}: (k-1)!! / 2^{k/2} for even k.
Rational gaussian_moment(int k) {
    if (k % 2 != 0) return Rational(0);
    Rational m(1);
    for (int j = 1; j < k; j += 2) m *= Rational(j, 2);
    return m;
}

Rational expect(const Poly& p, int extra_power) {
    Rational sum(0);
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] != 0) sum += p[k] * gaussian_moment(static_cast<int>(k) + extra_power);
    return sum;
}

// d_{m,i} for one well, m <= n, 0 <= i <= m.
std::vector<std::vector<Rational>> laplace_well(int n, int sigma) {
    // P_k(z): coefficient of s^k in exp(g1 s + g2 s^2), g1 = -sigma z^3, g2 = -z^4/4,
    // via k P_k = sum_{j=1,2} j g_j P_{k-j}.
    std::vector<Poly> P(static_cast<std::size_t>(n) + 1);
    P[0] = Poly{Rational(1)};
    for (int k = 1; k <= n; ++k) {
        Poly acc;
        add_scaled(acc, P[static_cast<std::size_t>(k - 1)], Rational(-sigma), 3);
        if (k >= 2) add_scaled(acc, P[static_cast<std::size_t>(k - 2)], Rational(-2, 4), 4);
        for (auto& c : acc) c /= k;
        P[static_cast<std::size_t>(k)] = std::move(acc);
    }

    std::vector<Rational> denom(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) denom[static_cast<std::size_t>(k)] = expect(P[static_cast<std::size_t>(k)], 0);

    std::vector<std::vector<Rational>> d(static_cast<std::size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) d[static_cast<std::size_t>(m)].assign(static_cast<std::size_t>(m) + 1, Rational(0));

    for (int i = 0; i <= n; ++i) {
        const int len = n - i + 1;
        std::vector<Rational> num(static_cast<std::size_t>(len)), q(static_cast<std::size_t>(len));
        for (int k = 0; k < len; ++k) num[static_cast<std::size_t>(k)] = expect(P[static_cast<std::size_t>(k)], i);
        for (int k = 0; k < len; ++k) {
            Rational v = num[static_cast<std::size_t>(k)];
            for (int j = 1; j <= k; ++j) v -= denom[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(k - j)];
            q[static_cast<std::size_t>(k)] = v / denom[0];
        }
        for (int k = 0; k < len; ++k) d[static_cast<std::size_t>(i + k)][static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(k)];
    }
    return d;
}

RationalTable build_d(int n) {
    RationalTable t(RationalTable::Family::equilibrium, n);
    const auto plus = laplace_well(n, +1);
    const auto minus = laplace_well(n, -1);
    for (int m = 0; m <= n; ++m)
        for (int i = 0; i <= m; ++i)
            t.set(m, i, plus[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)],
                  minus[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)]);
    return t;
}

void require_assembly_range(int m, const RationalTable& table) {
    if (m < 0 || m > table.order()) throw std::out_of_range("coefficient order exceeds table order");
}

}  // namespace

std::shared_ptr<const RationalTable> c_table(int n) {
    static TableCache cache;
    return memoized(cache, n, build_c);
}

std::shared_ptr<const RationalTable> d_table(int n) {
    static TableCache cache;
    return memoized(cache, n, build_d);
}

Rational b_coeff_exact(int m, const Observable& F, const Rational& p_plus, const RationalTable& table) {
    require_assembly_range(m, table);
    if (p_plus < 0 || p_plus > 1) throw std::domain_error("p_plus must lie in [0, 1]");
    Rational plus(0), minus(0);
    // c_{0,0} = 1 and c_{m,0} = 0 for m >= 1, so i = 0 only contributes at m = 0.
    const int first = m == 0 ? 0 : 1;
    for (int i = first; i <= m; ++i) {
        plus += table.plus(m, i) * taylor_coefficient(F, i, +1);
        minus += table.minus(m, i) * taylor_coefficient(F, i, -1);
    }
    return p_plus * plus + (Rational(1) - p_plus) * minus;
}

double b_coeff(int m, const Observable& F, const Rational& p_plus, const RationalTable& table) {
    return to_double(b_coeff_exact(m, F, p_plus, table));
}

Rational big_b_coeff_exact(int m, const Observable& F, const RationalTable& table) {
    require_assembly_range(m, table);
    Rational plus(0), minus(0);
    for (int i = 0; i <= m; ++i) {
        plus += table.plus(m, i) * taylor_coefficient(F, i, +1);
        minus += table.minus(m, i) * taylor_coefficient(F, i, -1);
    }
    return Rational(1, 2) * (plus + minus);
}

double big_b_coeff(int m, const Observable& F, const RationalTable& table) {
    return to_double(big_b_coeff_exact(m, F, table));
}

void write_csv_rows(std::ostream& os, const RationalTable& table) {
    const bool dyn = table.family() == RationalTable::Family::dynamical;
    const char* plus_name = dyn ? "c" : "d";
    const char* minus_name = dyn ? "cbar" : "dbar";
    for (int pass = 0; pass < 2; ++pass) {
        for (int m = 0; m <= table.order(); ++m) {
            const int first = (m == 0 || !dyn) ? 0 : 1;
            for (int i = first; i <= m; ++i) {
                const Rational& q = pass == 0 ? table.plus(m, i) : table.minus(m, i);
                os << (pass == 0 ? plus_name : minus_name) << ',' << m << ',' << i << ','
                   << boost::multiprecision::numerator(q) << ','
                   << boost::multiprecision::denominator(q) << '\n';
            }
        }
    }
}

}  // namespace recursions
}  // namespace fluctx
