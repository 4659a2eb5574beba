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

#include "fluctx/model.hpp"

#include <cmath>
#include <string>

namespace fluctx::model {

namespace {

void require_valid_start(double r2, double t) {
    if (r2 == 0.0) throw DomainError("flow started at the unstable equilibrium x = 0");
    if (!(t >= 0.0)) throw DomainError("negative time " + std::to_string(t));
}

// |X0(t)|^2 / |xi0|^2 = 1 / (|xi0|^2 + (1 - |xi0|^2) e^{-2t})
double flow_denominator(double r2, double t) {
    return r2 + (1.0 - r2) * std::exp(-2.0 * t);
}

}  // namespace

double potential_value(const StateVector& x) {
    const double r2 = x.norm_squared();
    return 0.25 * r2 * r2 - 0.5 * r2;
}

StateVector drift(const StateVector& x) {
    const double scale = 1.0 - x.norm_squared();
    StateVector out = x;
    out *= scale;
    return out;
}

SquareMatrix linearized_drift(const StateVector& x) {
    const std::size_t d = x.dim();
    SquareMatrix m = SquareMatrix::identity(d);
    const double diag = 1.0 - x.norm_squared();
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) m(r, c) = m(r, c) * diag - 2.0 * x[r] * x[c];
    return m;
}

StateVector flow_exact(const StateVector& xi0, double t) {
    const double r2 = xi0.norm_squared();
    require_valid_start(r2, t);
    StateVector out = xi0;
    out *= 1.0 / std::sqrt(flow_denominator(r2, t));
    return out;
}

double flow_exact(double xi0, double t) {
    require_valid_start(xi0 * xi0, t);
    return xi0 / std::sqrt(flow_denominator(xi0 * xi0, t));
}

double log_integrating_factor(double xi0, double t) {
    require_valid_start(xi0 * xi0, t);
    return 2.0 * t + 1.5 * std::log(flow_denominator(xi0 * xi0, t));
}

double integrating_factor(double xi0, double t) {
    return std::exp(log_integrating_factor(xi0, t));
}

double integrating_factor(const StateVector& xi0, double t) {
    if (xi0.dim() != 1) throw DimensionMismatch("integrating factor is defined for d = 1 only");
    return integrating_factor(xi0[0], t);
}

}  // namespace fluctx::model
