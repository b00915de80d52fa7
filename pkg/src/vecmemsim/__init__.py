"""Trace-driven simulator for coalesced vector memory access.

Functional and timing models of a vector load/store path built around
layered byte-shift networks, a shift-count generator, a load/store data
organization pipeline and a row/column-accessible shifted register file,
verified against an element-wise reference semantics and compared with
element-wise and segment-buffer baselines.
"""

from .config import (
    ByteLane,
    ConfigError,
    Direction,
    InstrError,
    Pattern,
    SimError,
    VecMemInstr,
    VectorConfig,
    parse_config_file,
    validate_config,
    validate_instr,
)
from .bench import (
    ArchState,
    Model,
    StateMismatch,
    WorkloadKind,
    WorkloadSpec,
    gen_workload,
    initial_state,
    oracle_exec,
    run_model,
    sweep,
)
from .vlsu import MemoryModel, Metrics, Reorder, SegmentApproach, Simulator

__all__ = [
    "ArchState",
    "ByteLane",
    "ConfigError",
    "Direction",
    "InstrError",
    "MemoryModel",
    "Metrics",
    "Model",
    "Pattern",
    "Reorder",
    "SegmentApproach",
    "SimError",
    "Simulator",
    "StateMismatch",
    "VecMemInstr",
    "VectorConfig",
    "WorkloadKind",
    "WorkloadSpec",
    "gen_workload",
    "initial_state",
    "oracle_exec",
    "parse_config_file",
    "run_model",
    "sweep",
    "validate_config",
    "validate_instr",
]
