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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluctx/state.hpp"

namespace fluctx {

/// Exponent multi-index (alpha_1, ..., alpha_d).
using MultiIndex = std::vector<int>;

/// A sparse multivariate polynomial observable F : R^d -> R with exact
/// derivative tensors. Immutable after construction; copies share the
/// derivative memo, which is filled lazily and safely under concurrent use.
class Observable {
public:
    Observable() = default;
    Observable(std::size_t dim, std::map<MultiIndex, double> terms);

    /// Parses `c * x1^a1 * ... * xd^ad + ...`. Whitespace is ignored; `x` is
    /// accepted as an alias for `x1`. With dim = 0 the dimension is the
    /// largest variable index seen (at least 1). Errors carry the position.
    static Observable parse(std::string_view literal, std::size_t dim = 0);

    static Observable constant(std::size_t dim, double c);
    static Observable coordinate(std::size_t dim, std::size_t axis);
    static Observable monomial(std::size_t dim, MultiIndex exponents, double coeff = 1.0);

    std::size_t dim() const noexcept { return dim_; }
    int max_degree() const noexcept { return max_degree_; }
    const std::map<MultiIndex, double>& terms() const noexcept { return terms_; }

    double eval(const StateVector& x) const;
    double eval(std::span<const double> x) const;

    /// D^iF(x)(v_1, ..., v_i). Orders beyond the degree give 0.
    double apply_derivative(int order, const StateVector& x,
                            std::span<const StateVector> vs) const;
    /// Raw form used on hot paths: `vs[k]` is a d-vector for slot k.
    double apply_derivative(int order, std::span<const double> x,
                            std::span<const std::span<const double>> vs) const;

    /// F^{(i)}(x) for d = 1.
    double scalar_derivative(int order, double x) const;

    /// Partial derivative with respect to coordinate `axis`.
    Observable partial(std::size_t axis) const;

    std::string to_string() const;

    friend Observable operator+(const Observable& a, const Observable& b);
    friend Observable operator*(double s, const Observable& a);

private:
    struct Term {
        MultiIndex exponents;
        double coeff;
    };
    // One nonzero mixed partial d^i F / dx_{j_1} ... dx_{j_i}.
    struct TensorEntry {
        std::vector<int> axes;
        std::vector<Term> poly;
    };
    struct Memo;

    static double eval_terms(std::span<const Term> poly, std::span<const double> x);
    const std::vector<TensorEntry>& tensor(int order) const;

    std::size_t dim_ = 0;
    int max_degree_ = 0;
    std::map<MultiIndex, double> terms_;
    std::shared_ptr<Memo> memo_;
};

}  // namespace fluctx
