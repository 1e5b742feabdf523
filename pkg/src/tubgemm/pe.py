"""Single multiply-accumulate processing element.

Each enabled cycle the PE adds (or subtracts) ``n * |b|``, or
``residue * |b|`` on the residue-correction cycle. Add vs. subtract is the
XOR of the operand signs. Signs are applied to magnitudes explicitly; the
two's-complement datapath inside the adder is not modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .encoding import (
    DEFAULT_UNARY_BASE,
    Polarity,
    check_unary_base,
    check_value,
    encode,
)
from .errors import AccumulatorOverflowError, ParameterError


def required_acc_width(bitwidth: int, inner_dim: int) -> int:
    """Smallest accumulator width allowed for an ``inner_dim``-deep GEMM."""
    if inner_dim < 1:
        raise ParameterError(f"inner dimension must be positive, got {inner_dim}")
    return 2 * bitwidth + math.ceil(math.log2(inner_dim)) + 1


def default_acc_width(bitwidth: int, inner_dim: int) -> int:
    # two bits above the minimum leave headroom for a C term as wide as the
    # sum of products
    return 2 * bitwidth + math.ceil(math.log2(inner_dim + 1)) + 2


def acc_limit(acc_width: int) -> int:
    """Exclusive bound on ``|accumulator|`` for a signed ``acc_width`` register."""
    return 1 << (acc_width - 1)


@dataclass(frozen=True)
class PEState:
    accumulator: int
    acc_width: int = 32

    def __post_init__(self):
        if self.acc_width < 2:
            raise ParameterError(f"accumulator width must be >= 2, got {self.acc_width}")
        if abs(self.accumulator) >= acc_limit(self.acc_width):
            raise AccumulatorOverflowError(
                f"accumulator {self.accumulator} does not fit {self.acc_width} signed bits"
            )


@dataclass(frozen=True)
class PECycleInput:
    pulse: bool
    residue: int
    sign_flip: bool
    b_operand: int
    unary_base: int = DEFAULT_UNARY_BASE

    def __post_init__(self):
        if not 0 <= self.residue < self.unary_base:
            raise ParameterError(
                f"residue {self.residue} outside [0, {self.unary_base - 1}]"
            )
        if self.residue and not self.pulse:
            raise ParameterError("residue asserted on a cycle without a pulse")

    @property
    def enabled(self) -> bool:
        return self.pulse or self.residue != 0


def pe_cycle(state: PEState, inp: PECycleInput) -> PEState:
    """Advance one PE by one clock."""
    if not inp.enabled:
        return state
    # a_is_odd mux: residue * |b| on the correction cycle, n * |b| otherwise
    weight = inp.residue if inp.residue else inp.unary_base
    contribution = weight * abs(inp.b_operand)
    if inp.sign_flip:
        contribution = -contribution
    return PEState(state.accumulator + contribution, state.acc_width)


def pe_multiply(
    state: PEState,
    a: int,
    b: int,
    bitwidth: int = 8,
    n: int = DEFAULT_UNARY_BASE,
    polarity: Polarity | str = Polarity.BIPOLAR,
) -> tuple[PEState, int]:
    """Accumulate ``a * b`` into ``state`` through the cycle-level datapath.

    Returns the new state and the number of clock cycles consumed, which
    is ``ceil(|a| / n)`` regardless of ``b``.
    """
    check_unary_base(n)
    check_value(a, bitwidth, polarity)
    check_value(b, bitwidth, polarity)
    sign_flip = (a < 0) != (b < 0)
    cycles = 0
    for event in encode(a, bitwidth, n, polarity):
        state = pe_cycle(state, PECycleInput(event.pulse, event.residue, sign_flip, b, n))
        cycles += 1
    return state, cycles
