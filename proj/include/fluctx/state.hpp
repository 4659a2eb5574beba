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

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "fluctx/errors.hpp"

namespace fluctx {

/// A point of R^d. The dimension is fixed at construction.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
    StateVector(std::initializer_list<double> values) : coords_(values) {}
    explicit StateVector(std::span<const double> values)
        : coords_(values.begin(), values.end()) {}

    static StateVector unit(std::size_t dim, std::size_t axis, double scale = 1.0) {
        StateVector v(dim);
        v.coords_.at(axis) = scale;
        return v;
    }

    std::size_t dim() const noexcept { return coords_.size(); }
    double& operator[](std::size_t i) { return coords_[i]; }
    double operator[](std::size_t i) const { return coords_[i]; }

    std::span<double> coords() noexcept { return coords_; }
    std::span<const double> coords() const noexcept { return coords_; }

    double norm_squared() const noexcept {
        double s = 0.0;
        for (double c : coords_) s += c * c;
        return s;
    }
    double norm() const noexcept { return std::sqrt(norm_squared()); }

    bool is_finite() const noexcept {
        for (double c : coords_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    StateVector& operator+=(const StateVector& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += o.coords_[i];
        return *this;
    }
    StateVector& operator-=(const StateVector& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= o.coords_[i];
        return *this;
    }
    StateVector& operator*=(double s) noexcept {
        for (double& c : coords_) c *= s;
        return *this;
    }

    friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
    friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
    friend StateVector operator*(double s, StateVector a) { return a *= s; }
    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    void require_same_dim(const StateVector& o) const {
        if (o.dim() != dim()) throw DimensionMismatch("state vectors of different dimension");
    }

    std::vector<double> coords_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("dot: dimension mismatch");
    return dot(a.coords(), b.coords());
}

/// Dense row-major square matrix; only used for small d.
class SquareMatrix {
public:
    explicit SquareMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

    static SquareMatrix identity(std::size_t dim) {
        SquareMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

    StateVector apply(const StateVector& v) const {
        if (v.dim() != dim_) throw DimensionMismatch("matrix-vector dimension mismatch");
        StateVector out(dim_);
        for (std::size_t r = 0; r < dim_; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < dim_; ++c) s += (*this)(r, c) * v[c];
            out[r] = s;
        }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<double> data_;
};

}  // namespace fluctx
