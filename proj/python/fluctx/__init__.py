# Copyright 2026 The fluctx Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the fluctx core."""

from fractions import Fraction

from ._fluctx import (
    ConfigError,
    DomainError,
    EstimationError,
    Observable,
    b_coeff,
    big_b_coeff,
    estimate_a,
    estimate_strong_remainder,
    flow,
    gibbs_expectation,
    load_config,
    log_partition_function,
    potential,
    run_experiment,
    stationarity_defect,
    tables_agree,
)
from . import _fluctx

__all__ = [
    "ConfigError",
    "DomainError",
    "EstimationError",
    "Observable",
    "b_coeff",
    "big_b_coeff",
    "c_table",
    "d_table",
    "estimate_a",
    "estimate_strong_remainder",
    "flow",
    "gibbs_expectation",
    "load_config",
    "log_partition_function",
    "potential",
    "run_experiment",
    "stationarity_defect",
    "tables_agree",
]


def _as_fractions(raw):
    return {
        key: tuple(Fraction(int(num), int(den)) for num, den in pair)
        for key, pair in raw.items()
    }


def c_table(n):
    """Dynamical table: {(m, i): (c_plus, c_minus)} as Fractions."""
    return _as_fractions(_fluctx.c_table(n))


def d_table(n):
    """Equilibrium table built by Laplace expansion, same layout as c_table."""
    return _as_fractions(_fluctx.d_table(n))
