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

#include "fluctx/state.hpp"

/// The quartic double-well V(x) = |x|^4/4 - |x|^2/2 and its derived fields.
namespace fluctx::model {

double potential_value(const StateVector& x);

/// -grad V(x) = x - |x|^2 x.
StateVector drift(const StateVector& x);

/// Jacobian of the drift, (1 - |x|^2) I - 2 x (x)^T. Symmetric.
SquareMatrix linearized_drift(const StateVector& x);

/// Closed-form solution of the noiseless flow started at xi0.
/// Throws DomainError for xi0 = 0 (the unstable equilibrium) or t < 0.
StateVector flow_exact(const StateVector& xi0, double t);

/// Scalar version of flow_exact.
double flow_exact(double xi0, double t);

/// Lambda(t) = exp(int_0^t (3 X0(s)^2 - 1) ds) for the scalar flow started at
/// xi0; equals e^{2t} (xi0^2 + (1 - xi0^2) e^{-2t})^{3/2}.
double integrating_factor(double xi0, double t);
double integrating_factor(const StateVector& xi0, double t);

/// log Lambda(t); finite for horizons where Lambda itself overflows.
double log_integrating_factor(double xi0, double t);

}  // namespace fluctx::model
