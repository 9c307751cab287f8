# Copyright 2026 The Subzero Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Zeroth-order optimization toolkit (Python bindings)."""

from ._core import (
    AcceptanceError,
    NumericalError,
    Quadratic,
    generate_hessian,
    heterogeneous_block_hessian,
    mix64,
    panel_names,
    peak_memory_params,
    reproduce,
    rho_distribution,
    run,
    traffic_per_step,
    update_block_idx,
    verify,
)

__all__ = [
    "AcceptanceError",
    "NumericalError",
    "Quadratic",
    "generate_hessian",
    "heterogeneous_block_hessian",
    "mix64",
    "panel_names",
    "peak_memory_params",
    "reproduce",
    "rho_distribution",
    "run",
    "traffic_per_step",
    "update_block_idx",
    "verify",
]
