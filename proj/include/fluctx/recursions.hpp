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

#include <iosfwd>
#include <memory>
#include <vector>

#include "fluctx/observables.hpp"
#include "fluctx/rational.hpp"

namespace fluctx {

/// Triangular tables of exact coefficients for the +1 well (`plus`) and the
/// -1 well (`minus`): either the dynamical limits c / c-bar or the Laplace
/// coefficients d / d-bar of the Gibbs expansion.
class RationalTable {
public:
    enum class Family { dynamical, equilibrium };

    RationalTable(Family family, int order);

    Family family() const noexcept { return family_; }
    int order() const noexcept { return order_; }

    /// Entry for the +1 well; zero outside the stored index range.
    const Rational& plus(int m, int i) const;
    /// Entry for the -1 well.
    const Rational& minus(int m, int i) const;

    void set(int m, int i, Rational plus_value, Rational minus_value);

    /// Entrywise exact equality of both wells, ignoring the family tag.
    bool same_entries(const RationalTable& other) const;

private:
    std::size_t index(int m, int i) const;

    Family family_;
    int order_;
    std::vector<Rational> plus_;
    std::vector<Rational> minus_;
};

namespace recursions {

/// Long-time conditional limits c_{m,i} (xi_0 > 0) and c-bar_{m,i}
/// (xi_0 < 0), built by increasing m and, for each m, downward in i.
/// Memoized; 0 <= n <= 12.
std::shared_ptr<const RationalTable> c_table(int n);

/// Laplace coefficients d_{m,i}, d-bar_{m,i} of the Gibbs expansion,
/// computed from formal Gaussian moment series around x = +1 and x = -1.
/// Shares no code with c_table. Memoized; 0 <= n <= 12.
std::shared_ptr<const RationalTable> d_table(int n);

/// b_m(F) assembled exactly from the dynamical table (d = 1).
double b_coeff(int m, const Observable& F, const Rational& p_plus, const RationalTable& table);
Rational b_coeff_exact(int m, const Observable& F, const Rational& p_plus, const RationalTable& table);

/// B_m(F) assembled from the equilibrium table with weights 1/2, 1/2 and
/// the i = 0 column included.
double big_b_coeff(int m, const Observable& F, const RationalTable& table);
Rational big_b_coeff_exact(int m, const Observable& F, const RationalTable& table);

/// CSV rows `family,m,i,numerator,denominator` for every stored entry;
/// families are c, cbar (dynamical) or d, dbar (equilibrium). No header.
void write_csv_rows(std::ostream& os, const RationalTable& table);

}  // namespace recursions
}  // namespace fluctx
