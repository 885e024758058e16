"""Crash-rate estimation for error-corrected quantum programs.

Two engines over the same cycle-level program IR: an analytical
probability-tree model with configurable pruning thresholds
(:mod:`~paulitree.engine`) and a Monte Carlo fault-injection baseline
(:mod:`~paulitree.montecarlo`), with Steane-code recovery circuits and
the corresponding readout kernels in :mod:`~paulitree.qecc`.
"""

from .engine import FidelityReport, run_analytical, sweep
from .errormap import (
    ErrorMap,
    MergeMode,
    QubitSet,
    Thresholds,
    apply_cnot,
    apply_hadamard,
    apply_one_qubit_event,
    apply_two_qubit_event,
    merge,
    split,
    sum_matching,
    total_probability,
)
from .montecarlo import MCReport, run_mc, run_mc_parallel
from .noise import ConfigError, NoiseParams, decoherence_prob, load_params, serialize_params
from .pauli import Pauli, PauliString, compose
from .program import (
    Program,
    ProgramError,
    Schedule,
    build_basic_program,
    build_scaling_program,
    elaborate,
    parse_program,
    program_hash,
    serialize_program,
)
from .qecc import (
    CHECK_MATRIX,
    build_recovery,
    classify_crash,
    count_nonfailing_states,
    decode_table,
)

__all__ = [
    "CHECK_MATRIX",
    "ConfigError",
    "ErrorMap",
    "FidelityReport",
    "MCReport",
    "MergeMode",
    "NoiseParams",
    "Pauli",
    "PauliString",
    "Program",
    "ProgramError",
    "QubitSet",
    "Schedule",
    "Thresholds",
    "apply_cnot",
    "apply_hadamard",
    "apply_one_qubit_event",
    "apply_two_qubit_event",
    "build_basic_program",
    "build_recovery",
    "build_scaling_program",
    "classify_crash",
    "compose",
    "count_nonfailing_states",
    "decode_table",
    "decoherence_prob",
    "elaborate",
    "load_params",
    "merge",
    "parse_program",
    "program_hash",
    "run_analytical",
    "run_mc",
    "run_mc_parallel",
    "serialize_params",
    "serialize_program",
    "split",
    "sum_matching",
    "sweep",
    "total_probability",
]

__version__ = "0.1.0"
