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

#include <span>
#include <utility>
#include <vector>

#include "fluctx/rational.hpp"

namespace fluctx {

/// Largest expansion order supported anywhere in the library.
inline constexpr int kMaxOrder = 12;

/// An ordered tuple of positive integers (j_1, ..., j_i).
struct Composition {
    std::vector<int> parts;

    int order() const noexcept {
        int s = 0;
        for (int p : parts) s += p;
        return s;
    }
    int length() const noexcept { return static_cast<int>(parts.size()); }

    friend bool operator==(const Composition&, const Composition&) = default;
    friend auto operator<=>(const Composition&, const Composition&) = default;
};

namespace combinatorics {

/// All compositions of m into exactly i positive parts, in lexicographic
/// order. Empty when i > m, i <= 0 or m <= 0.
const std::vector<Composition>& compositions(int m, int i);

/// S_{m,i} = sum over compositions of m into i parts of prod xbar[j_k].
/// `xbar[j - 1]` holds the order-j fluctuation value; entries beyond m are
/// ignored. Zero for degenerate (m, i).
double s_value(int m, int i, std::span<const double> xbar);

struct WeightedComposition {
    Composition composition;
    Rational weight;  ///< 1 / i!
};

/// The multilinear terms of order m with i derivative slots, each weighted
/// by 1 / i!.
std::vector<WeightedComposition> taylor_weights(int m, int i);

}  // namespace combinatorics
}  // namespace fluctx
