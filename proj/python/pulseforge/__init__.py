# Copyright 2026 The PulseForge Authors
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


"""Python bindings for the pulseforge engine."""

from pulseforge._pulseforge import (
    DecouplingReport,
    GlobalRotation,
    ParseError,
    Pauli,
    PauliSum,
    PreconditionError,
    PulseSequence,
    __version__,
    average_hamiltonian,
    build_sequence,
    builtin_config,
    builtin_names,
    conjugate,
    drop_pulse,
    effective_beta,
    parse_sequence,
    power_law_couplings,
    run,
    time_dilution_factor,
    uniform_field,
    validate_decoupling,
)

__all__ = [
    "DecouplingReport",
    "GlobalRotation",
    "ParseError",
    "Pauli",
    "PauliSum",
    "PreconditionError",
    "PulseSequence",
    "__version__",
    "average_hamiltonian",
    "build_sequence",
    "builtin_config",
    "builtin_names",
    "conjugate",
    "drop_pulse",
    "effective_beta",
    "parse_sequence",
    "power_law_couplings",
    "run",
    "time_dilution_factor",
    "uniform_field",
    "validate_decoupling",
]
