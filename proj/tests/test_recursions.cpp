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

#include <sstream>
#include <string>

#include "doctest.h"
#include "fluctx/observables.hpp"
#include "fluctx/recursions.hpp"

using namespace fluctx;

TEST_CASE("seeds and hand-derived entries of the dynamical table") {
    const auto c = recursions::c_table(8);
    CHECK(c->plus(0, 0) == 1);
    CHECK(c->plus(1, 1) == 0);
    CHECK(c->plus(2, 2) == Rational(1, 2));
    CHECK(c->minus(2, 2) == Rational(1, 2));
    CHECK(c->plus(2, 1) == Rational(-3, 4));
    CHECK(c->minus(2, 1) == Rational(3, 4));
    CHECK(c->plus(4, 4) == Rational(3, 4));
    CHECK(c->plus(4, 3) == Rational(-15, 8));
    CHECK(c->plus(4, 2) == Rational(39, 16));
    CHECK(c->plus(4, 1) == Rational(-87, 32));
    for (int i = 1; i <= 3; ++i) CHECK(c->plus(3, i) == 0);
}

TEST_CASE("table entries outside the index range are zero") {
    const auto c = recursions::c_table(6);
    CHECK(c->plus(2, 0) == 0);
    CHECK(c->plus(2, 3) == 0);
    CHECK(c->plus(7, 1) == 0);
    CHECK(c->plus(-1, 0) == 0);
    const auto d = recursions::d_table(6);
    for (int m = 1; m <= 6; ++m) CHECK(d->plus(m, 0) == 0);
    CHECK(d->plus(0, 0) == 1);
}

TEST_CASE("odd rows vanish and the two wells differ by (-1)^i") {
    const auto c = recursions::c_table(12);
    for (int m = 0; m <= 12; ++m)
        for (int i = 0; i <= m; ++i) {
            if (m % 2 == 1) {
                CHECK(c->plus(m, i) == 0);
                CHECK(c->minus(m, i) == 0);
            }
            CHECK(c->minus(m, i) == (i % 2 == 0 ? c->plus(m, i) : Rational(-c->plus(m, i))));
        }
}

TEST_CASE("dynamical and Laplace tables agree exactly") {
    for (int n : {0, 1, 2, 4, 8, 12}) CHECK(recursions::c_table(n)->same_entries(*recursions::d_table(n)));
    CHECK(recursions::c_table(8)->family() == RationalTable::Family::dynamical);
    CHECK(recursions::d_table(8)->family() == RationalTable::Family::equilibrium);
}

TEST_CASE("tables are memoized and order-checked") {
    CHECK(recursions::c_table(5).get() == recursions::c_table(5).get());
    CHECK_THROWS(recursions::c_table(13));
    CHECK_THROWS(recursions::d_table(-1));
}

TEST_CASE("b and B coefficients") {
    const auto c = recursions::c_table(8);
    const auto d = recursions::d_table(8);
    const auto x2 = Observable::parse("x^2");
    CHECK(recursions::b_coeff_exact(0, x2, Rational(1, 2), *c) == 1);
    CHECK(recursions::b_coeff_exact(2, x2, Rational(1, 2), *c) == -1);
    CHECK(recursions::big_b_coeff_exact(0, x2, *d) == 1);
    CHECK(recursions::big_b_coeff_exact(2, x2, *d) == -1);
    CHECK(recursions::big_b_coeff_exact(4, x2, *d) == -3);
    const auto F = Observable::parse("x^5 - 0.25*x^3 + 2*x - 1");
    for (int m = 0; m <= 8; ++m) {
        CHECK(recursions::big_b_coeff_exact(m, F, *d) == recursions::b_coeff_exact(m, F, Rational(1, 2), *c));
        for (auto p : {Rational(0), Rational(1, 3), Rational(1)})
            if (m % 2 == 1) CHECK(recursions::b_coeff_exact(m, F, p, *c) == 0);
    }
    // B_0 is the average of the two well values.
    CHECK(recursions::big_b_coeff(0, F, *d) == doctest::Approx((F.scalar_derivative(0, 1) + F.scalar_derivative(0, -1)) / 2));
    CHECK_THROWS(recursions::b_coeff(0, Observable::parse("x1", 2), Rational(1, 2), *c));
}

TEST_CASE("b with p = 1 only sees the +1 well") {
    const auto c = recursions::c_table(6);
    // Same Taylor data at +1 to order 6; different at -1.
    const auto F = Observable::parse("x^2 + 3*x");
    const auto G = Observable::parse("x^2 + 3*x + 5*x^7 - 35*x^6 + 105*x^5 - 175*x^4 + 175*x^3 - 105*x^2 + 35*x - 5");
    // G - F = 5 (x - 1)^7
    for (int m = 0; m <= 6; ++m) {
        CHECK(recursions::b_coeff_exact(m, F, Rational(1), *c) == recursions::b_coeff_exact(m, G, Rational(1), *c));
    }
    CHECK(recursions::b_coeff_exact(0, F, Rational(0), *c) != recursions::b_coeff_exact(0, G, Rational(0), *c));
}

TEST_CASE("csv dump rows") {
    std::ostringstream os;
    recursions::write_csv_rows(os, *recursions::c_table(2));
    const std::string s = os.str();
    CHECK(s.find("c,2,2,1,2\n") != std::string::npos);
    CHECK(s.find("cbar,2,1,3,4\n") != std::string::npos);
    CHECK(s.find("c,0,0,1,1\n") != std::string::npos);
    CHECK(s.find("c,1,0,") == std::string::npos);
    std::ostringstream od;
    recursions::write_csv_rows(od, *recursions::d_table(2));
    CHECK(od.str().find("d,1,0,0,1\n") != std::string::npos);
    CHECK(od.str().find("dbar,2,2,1,2\n") != std::string::npos);
}
