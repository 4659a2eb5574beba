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
#include <stdexcept>
#include <string>

namespace fluctx {

/// Input outside the mathematical domain of an operation (e.g. a zero
/// initial condition for the explicit flow).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Polynomial literal could not be parsed. `position()` is the byte offset
/// into the input where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// A trajectory produced a non-finite value.
class SimulationAbort : public std::runtime_error {
public:
    SimulationAbort(std::size_t step, std::string component)
        : std::runtime_error("non-finite value in " + component + " at step " +
                             std::to_string(step)),
          step_(step), component_(std::move(component)) {}

    std::size_t step() const noexcept { return step_; }
    const std::string& component() const noexcept { return component_; }

private:
    std::size_t step_;
    std::string component_;
};

/// Monte Carlo run could not produce a usable estimate (too many aborted
/// paths, no paths in the conditioning event, too few fit points, ...).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fluctx
