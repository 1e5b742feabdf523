"""M x P PE array computing ``Y = A @ B + C`` in N outer-product steps.

Step ``k`` streams column ``k`` of A through one shared temporal-unary
encoder (one counter, M comparators) while row ``k`` of B is broadcast in
binary. The step lasts as long as the longest pulse in the column; an
all-zero column finishes in zero compute cycles. The index counter then
spends ``step_overhead_cycles`` on the done handshake, and after the last
step ``epilogue_cycles`` pass before ``output_valid`` rises.

The simulator is event-faithful: it tracks cycle counts, handshake cycle
indices and accumulator contents, not individual wires.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .encoding import (
    DEFAULT_UNARY_BASE,
    Polarity,
    check_bitwidth,
    check_unary_base,
    pulse_cycles,
    value_range,
    worst_case_mult_cycles,
)
from .errors import AccumulatorOverflowError, OperandRangeError, ParameterError, ShapeError
from .pe import acc_limit, default_acc_width, required_acc_width

DEFAULT_STEP_OVERHEAD_CYCLES = 2
DEFAULT_EPILOGUE_CYCLES = 4
# int64 holds the accumulator with one bit of slack for intermediate sums
MAX_ACC_WIDTH = 62

CYCLE_REPORT_SCHEMA = "tubgemm.cycle_report/1"


@dataclass(frozen=True)
class GemmConfig:
    M: int
    N: int
    P: int
    bitwidth: int = 8
    polarity: Polarity = Polarity.BIPOLAR
    unary_base: int = DEFAULT_UNARY_BASE
    step_overhead_cycles: int = DEFAULT_STEP_OVERHEAD_CYCLES
    epilogue_cycles: int = DEFAULT_EPILOGUE_CYCLES
    acc_width: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "polarity", Polarity.parse(self.polarity))
        for name in ("M", "N", "P"):
            dim = getattr(self, name)
            if not isinstance(dim, (int, np.integer)) or dim < 1:
                raise ParameterError(f"{name} must be a positive integer, got {dim!r}")
        check_bitwidth(self.bitwidth)
        check_unary_base(self.unary_base)
        if self.step_overhead_cycles < 0 or self.epilogue_cycles < 0:
            raise ParameterError("overhead cycle counts must be non-negative")
        if self.acc_width is None:
            object.__setattr__(self, "acc_width", default_acc_width(self.bitwidth, self.N))
        minimum = required_acc_width(self.bitwidth, self.N)
        if not minimum <= self.acc_width <= MAX_ACC_WIDTH:
            raise ParameterError(
                f"acc_width {self.acc_width} outside [{minimum}, {MAX_ACC_WIDTH}]"
            )

    @property
    def worst_case_step_cycles(self) -> int:
        return worst_case_mult_cycles(self.bitwidth, self.polarity, self.unary_base)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["polarity"] = self.polarity.value
        return d


@dataclass
class MatrixOperands:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray | None = None

    def __post_init__(self):
        self.A = _as_int_matrix(self.A, "A")
        self.B = _as_int_matrix(self.B, "B")
        if self.A.shape[1] != self.B.shape[0]:
            raise ShapeError(f"A is {self.A.shape}, B is {self.B.shape}: inner dimensions differ")
        shape = (self.A.shape[0], self.B.shape[1])
        if self.C is None:
            self.C = np.zeros(shape, dtype=np.int64)
        else:
            self.C = _as_int_matrix(self.C, "C")
            if self.C.shape != shape:
                raise ShapeError(f"C is {self.C.shape}, expected {shape}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.A.shape[0], self.A.shape[1], self.B.shape[1]

    def validate(self, config: GemmConfig) -> None:
        if self.shape != (config.M, config.N, config.P):
            raise ShapeError(f"operands are {self.shape}, config is {(config.M, config.N, config.P)}")
        lo, hi = value_range(config.bitwidth, config.polarity)
        for name, mat in (("A", self.A), ("B", self.B)):
            bad = (mat < lo) | (mat > hi)
            if bad.any():
                i, j = np.argwhere(bad)[0]
                raise OperandRangeError(
                    f"{name}[{i}][{j}] = {mat[i, j]} outside [{lo}, {hi}] for "
                    f"{config.bitwidth}-bit {config.polarity.value}"
                )
        limit = acc_limit(config.acc_width)
        if self.C.size and np.abs(self.C).max() >= limit:
            raise AccumulatorOverflowError(f"C does not fit {config.acc_width} signed bits")


def _as_int_matrix(mat, name: str) -> np.ndarray:
    arr = np.asarray(mat)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ShapeError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if arr.dtype.kind not in "iub":
        if arr.dtype.kind == "f" and np.all(np.mod(arr, 1) == 0):
            arr = arr.astype(np.int64)
        else:
            raise ShapeError(f"{name} must hold integers, got dtype {arr.dtype}")
    return arr.astype(np.int64)


@dataclass
class CycleReport:
    per_step_cycles: list[int]
    step_overhead_cycles: int
    epilogue_cycles: int
    done_cycles: list[int] = field(default_factory=list)
    step_accumulators: list[np.ndarray] | None = None

    @property
    def compute_cycles(self) -> int:
        return sum(self.per_step_cycles)

    @property
    def total_cycles(self) -> int:
        return (
            self.compute_cycles
            + len(self.per_step_cycles) * self.step_overhead_cycles
            + self.epilogue_cycles
        )

    @property
    def output_valid_cycle(self) -> int:
        return self.total_cycles

    @property
    def zero_steps(self) -> int:
        return sum(1 for c in self.per_step_cycles if c == 0)

    def latency_seconds(self, frequency_hz: float) -> float:
        return self.total_cycles / frequency_hz

    def to_dict(self) -> dict:
        return {
            "schema": CYCLE_REPORT_SCHEMA,
            "per_step_cycles": list(self.per_step_cycles),
            "compute_cycles": self.compute_cycles,
            "step_overhead_cycles": self.step_overhead_cycles,
            "epilogue_cycles": self.epilogue_cycles,
            "total_cycles": self.total_cycles,
            "done_cycles": list(self.done_cycles),
            "output_valid_cycle": self.output_valid_cycle,
            "zero_steps": self.zero_steps,
        }


def vector_generator(
    matrix, k: int, axis: Literal["column", "row"] = "column"
) -> np.ndarray:
    """Column ``k`` of A (``axis="column"``) or row ``k`` of B (``axis="row"``)."""
    mat = np.asarray(matrix)
    if axis == "column":
        length = mat.shape[1]
    elif axis == "row":
        length = mat.shape[0]
    else:
        raise ParameterError(f"axis must be 'column' or 'row', got {axis!r}")
    if not 0 <= k < length:
        raise IndexError(f"index {k} outside [0, {length})")
    return mat[:, k].copy() if axis == "column" else mat[k, :].copy()


def step_cycles(column, n: int = DEFAULT_UNARY_BASE) -> int:
    """Compute cycles of one step: the longest pulse in the A column."""
    col = np.asarray(column, dtype=np.int64)
    if col.size == 0:
        return 0
    return pulse_cycles(int(np.abs(col).max()), n)


def _run_step_per_cycle(acc, mag, sign_a, b_row, n, check=None):
    cycles = pulse_cycles(int(mag.max()), n)
    counter = 0
    for cycle in range(cycles):
        # comparator: pulse while mag > counter; the cycle is worth n, or the
        # residue when fewer than n units remain, i.e. clip(mag - counter, 0, n)
        weight = np.clip(mag - counter, 0, n)
        # sign_a * sign_b * weight * |b| == (sign_a * weight) * b
        acc += np.outer(sign_a * weight, b_row)
        if check is not None:
            check(acc, cycle)
        counter += n
    return cycles


def _run_step_event(acc, mag, sign_a, b_row, n, check=None):
    # Between two "last pulse cycle" events every cycle applies the same
    # increment, so each run is applied in one shot.
    pulses = -(-mag // n)
    cycles = int(pulses.max())
    last = pulses - 1
    residue = mag % n
    t = 0
    for event in np.unique(last[pulses > 0]):
        event = int(event)
        if event > t:
            active = last >= event
            acc += (event - t) * np.outer(sign_a * np.where(active, n, 0), b_row)
        weight = np.where(last > event, n, 0)
        ending = last == event
        weight = np.where(ending, np.where(residue > 0, residue, n), weight)
        acc += np.outer(sign_a * weight, b_row)
        t = event + 1
    return cycles


def simulate_gemm(
    config: GemmConfig,
    ops: MatrixOperands,
    *,
    mode: Literal["cycle", "event"] = "cycle",
    record: bool = False,
) -> tuple[np.ndarray, CycleReport]:
    """Run the array on ``ops`` and return ``(Y, report)``.

    ``mode="cycle"`` clocks every cycle; ``mode="event"`` skips over runs
    of identical cycles and gives the same result and cycle counts.
    ``record=True`` keeps a snapshot of the accumulators after each step.

    Raises :class:`AccumulatorOverflowError` naming the PE, step and cycle
    at which an accumulator first leaves ``acc_width`` signed bits.
    """
    if mode == "cycle":
        run_step = _run_step_per_cycle
    elif mode == "event":
        run_step = _run_step_event
    else:
        raise ParameterError(f"unknown simulation mode {mode!r}")
    ops.validate(config)
    n = config.unary_base
    limit = acc_limit(config.acc_width)

    acc = ops.C.copy()
    per_step = []
    done = []
    snapshots = [] if record else None
    clock = 0
    for k in range(config.N):
        a_col = vector_generator(ops.A, k, "column")
        b_row = vector_generator(ops.B, k, "row")
        mag = np.abs(a_col)
        sign_a = np.where(a_col < 0, -1, 1)
        before = acc.copy()
        cycles = run_step(acc, mag, sign_a, b_row, n)
        # All increments a PE sees within one step share the sign of a*b, so
        # |acc| peaks at a step boundary; replay per cycle only to locate a
        # detected overflow.
        if np.abs(acc).max() >= limit:
            _locate_overflow(before, mag, sign_a, b_row, n, limit, k)
        per_step.append(cycles)
        clock += cycles + config.step_overhead_cycles
        done.append(clock)
        if record:
            snapshots.append(acc.copy())

    report = CycleReport(
        per_step_cycles=per_step,
        step_overhead_cycles=config.step_overhead_cycles,
        epilogue_cycles=config.epilogue_cycles,
        done_cycles=done,
        step_accumulators=snapshots,
    )
    return acc, report


def _locate_overflow(acc, mag, sign_a, b_row, n, limit, step):
    def check(acc, cycle):
        peak = np.abs(acc)
        if peak.max() >= limit:
            i, j = np.unravel_index(peak.argmax(), acc.shape)
            raise AccumulatorOverflowError(
                f"PE[{i}][{j}] = {acc[i, j]} overflowed at step {step}, cycle {cycle}"
            )

    _run_step_per_cycle(acc, mag, sign_a, b_row, n, check)
    raise AssertionError("overflow detected at step end but not during replay")


def reference_gemm(ops: MatrixOperands) -> np.ndarray:
    """Textbook triple loop over Python ints; the exactness oracle."""
    A = ops.A.tolist()
    B = ops.B.tolist()
    C = ops.C.tolist()
    M, N, P = len(A), len(B), len(B[0])
    if len(A[0]) != N:
        raise ShapeError("inner dimensions differ")
    Y = [[0] * P for _ in range(M)]
    for i in range(M):
        for j in range(P):
            s = C[i][j]
            for k in range(N):
                s += A[i][k] * B[k][j]
            Y[i][j] = s
    return np.array(Y, dtype=object).astype(np.int64)


def analytical_compute_bound(config: GemmConfig) -> int:
    """Upper bound on compute cycles: every step hits the worst-case pulse."""
    return config.N * config.worst_case_step_cycles


def _nonzero_uniform(rng: np.random.Generator, lo: int, hi: int, shape) -> np.ndarray:
    x = rng.integers(lo, hi - 1, size=shape, endpoint=True)
    x[x >= 0] += 1
    return x


def random_operands(
    config: GemmConfig,
    rng: np.random.Generator,
    zero_fraction: float = 0.0,
    c_bound: int | None = None,
) -> MatrixOperands:
    """Uniform in-range A, B (optionally with a forced zero fraction) and a C that cannot overflow."""
    lo, hi = value_range(config.bitwidth, config.polarity)
    if zero_fraction:
        # P(zero) must equal zero_fraction exactly, so the other entries skip 0
        A = _nonzero_uniform(rng, lo, hi, (config.M, config.N))
        B = _nonzero_uniform(rng, lo, hi, (config.N, config.P))
        A[rng.random(A.shape) < zero_fraction] = 0
        B[rng.random(B.shape) < zero_fraction] = 0
    else:
        A = rng.integers(lo, hi, size=(config.M, config.N), endpoint=True)
        B = rng.integers(lo, hi, size=(config.N, config.P), endpoint=True)
    if c_bound is None:
        # the largest product magnitude; leaves room for N products plus C
        c_bound = max(lo * lo, hi * hi)
    C = rng.integers(-c_bound, c_bound, size=(config.M, config.P), endpoint=True)
    if config.polarity is Polarity.UNIPOLAR:
        C = np.abs(C)
    return MatrixOperands(A, B, C)


def random_config(
    rng: np.random.Generator, min_size: int = 2, max_size: int = 64, **overrides
) -> GemmConfig:
    """Draw shape, bit-width, polarity and unary base uniformly."""
    M, N, P = (int(x) for x in rng.integers(min_size, max_size, size=3, endpoint=True))
    params = dict(
        bitwidth=int(rng.choice([2, 4, 8])),
        polarity=(Polarity.UNIPOLAR, Polarity.BIPOLAR)[int(rng.integers(2))],
        unary_base=int(rng.choice([1, 2, 4, 8])),
    )
    params.update(overrides)
    return GemmConfig(M, N, P, **params)
