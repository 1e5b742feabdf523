"""Cycle-level model of a temporal-unary/binary GEMM unit, with an
analytical latency/energy model and a value-sparsity profiler."""

from .encoding import (
    EncodedOperand,
    Polarity,
    UnaryCycleEvent,
    decode,
    encode,
    pulse_cycles,
    worst_case_mult_cycles,
)
from .errors import (
    AccumulatorOverflowError,
    OperandRangeError,
    ParameterError,
    TubGemmError,
)
from .gemm import (
    CycleReport,
    GemmConfig,
    MatrixOperands,
    reference_gemm,
    simulate_gemm,
    step_cycles,
    vector_generator,
)
from .pe import PECycleInput, PEState, pe_cycle, pe_multiply
from .perf import (
    LatencyModel,
    PowerProfile,
    analytical_wc_latency,
    edp,
    energy,
    expected_latency,
    sweep_table,
)
from .sparsity import (
    MaxValueHistogram,
    cumulative,
    expected_max,
    histogram_from_matrices,
    load_fixture,
    profile_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "AccumulatorOverflowError",
    "analytical_wc_latency",
    "cumulative",
    "CycleReport",
    "decode",
    "edp",
    "encode",
    "EncodedOperand",
    "energy",
    "expected_latency",
    "expected_max",
    "GemmConfig",
    "histogram_from_matrices",
    "LatencyModel",
    "load_fixture",
    "MatrixOperands",
    "MaxValueHistogram",
    "OperandRangeError",
    "ParameterError",
    "pe_cycle",
    "pe_multiply",
    "PECycleInput",
    "PEState",
    "Polarity",
    "PowerProfile",
    "profile_simulation",
    "pulse_cycles",
    "reference_gemm",
    "simulate_gemm",
    "step_cycles",
    "sweep_table",
    "TubGemmError",
    "UnaryCycleEvent",
    "vector_generator",
    "worst_case_mult_cycles",
]
