"""Temporal-unary (n-unary) operand encoding.

A magnitude ``m`` is sent as a pulse that stays high for ``ceil(m / n)``
cycles. Every asserted cycle is worth ``n``, except that the last one is
worth the residue ``m mod n`` when that residue is nonzero. The sign
travels separately (it only selects add vs. subtract in the PE).

The encoder is modeled the way the hardware builds it: one counter that
starts at zero and steps by ``n`` each cycle, and a strict greater-than
comparator per operand.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import OperandRangeError, ParameterError, StreamFormatError

SUPPORTED_BITWIDTHS = (2, 4, 8)
SUPPORTED_UNARY_BASES = (1, 2, 4, 8)
DEFAULT_UNARY_BASE = 2


class Polarity(str, enum.Enum):
    UNIPOLAR = "unipolar"
    BIPOLAR = "bipolar"

    @classmethod
    def parse(cls, value: "Polarity | str") -> "Polarity":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown polarity {value!r}") from None


class UnaryCycleEvent(NamedTuple):
    """What the encoder drives into a PE row during one cycle."""

    pulse: bool
    residue: int = 0


def check_bitwidth(bitwidth: int) -> int:
    if bitwidth not in SUPPORTED_BITWIDTHS:
        raise ParameterError(
            f"bit-width must be one of {SUPPORTED_BITWIDTHS}, got {bitwidth!r}"
        )
    return bitwidth


def check_unary_base(n: int) -> int:
    if not isinstance(n, int) or n < 1 or n & (n - 1):
        raise ParameterError(f"unary base must be a power of two, got {n!r}")
    if n not in SUPPORTED_UNARY_BASES:
        raise ParameterError(
            f"unary base must be one of {SUPPORTED_UNARY_BASES}, got {n!r}"
        )
    return n


def value_range(bitwidth: int, polarity: Polarity | str) -> tuple[int, int]:
    """Inclusive ``(lo, hi)`` range of representable integers."""
    check_bitwidth(bitwidth)
    if Polarity.parse(polarity) is Polarity.UNIPOLAR:
        return 0, (1 << bitwidth) - 1
    half = 1 << (bitwidth - 1)
    return -half, half - 1


def max_magnitude(bitwidth: int, polarity: Polarity | str) -> int:
    lo, hi = value_range(bitwidth, polarity)
    return max(-lo, hi)


def check_value(value: int, bitwidth: int, polarity: Polarity | str) -> int:
    lo, hi = value_range(bitwidth, polarity)
    if not lo <= value <= hi:
        raise OperandRangeError(
            f"{value} outside [{lo}, {hi}] for {bitwidth}-bit "
            f"{Polarity.parse(polarity).value}"
        )
    return int(value)


def pulse_cycles(value: int, n: int) -> int:
    """Number of asserted cycles for ``value``: ``ceil(|value| / n)``."""
    if n < 1:
        raise ParameterError(f"unary base must be >= 1, got {n!r}")
    return -(-abs(int(value)) // n)


def worst_case_mult_cycles(
    bitwidth: int, polarity: Polarity | str, n: int = DEFAULT_UNARY_BASE
) -> int:
    """Longest pulse any in-range operand can produce."""
    check_unary_base(n)
    return pulse_cycles(max_magnitude(bitwidth, polarity), n)


def encode(
    value: int,
    bitwidth: int = 8,
    n: int = DEFAULT_UNARY_BASE,
    polarity: Polarity | str = Polarity.BIPOLAR,
) -> list[UnaryCycleEvent]:
    """Run the counter/comparator encoder until the comparator drops.

    Only the asserted cycles are returned; the line is low afterwards.
    """
    check_unary_base(n)
    magnitude = abs(check_value(value, bitwidth, polarity))
    events = []
    counter = 0
    while magnitude > counter:
        remaining = magnitude - counter
        residue = remaining if remaining < n else 0
        events.append(UnaryCycleEvent(True, residue))
        counter += n
    return events


def decode(stream: Iterable[UnaryCycleEvent], n: int = DEFAULT_UNARY_BASE, sign: int = 1) -> int:
    """Inverse of :func:`encode`; validates the stream shape as it goes."""
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    check_unary_base(n)
    total = 0
    ended = False
    residue_seen = False
    for cycle, (pulse, residue) in enumerate(stream):
        if not 0 <= residue < n:
            raise StreamFormatError(f"cycle {cycle}: residue {residue} outside [0, {n - 1}]")
        if not pulse:
            if residue:
                raise StreamFormatError(f"cycle {cycle}: residue on a deasserted cycle")
            ended = True
            continue
        if ended:
            raise StreamFormatError(f"cycle {cycle}: pulse after the line went low")
        if residue_seen:
            raise StreamFormatError(f"cycle {cycle}: residue was not in the last pulse cycle")
        if residue:
            residue_seen = True
            total += residue
        else:
            total += n
    return sign * total


def edge_transitions(stream: Iterable[UnaryCycleEvent], length: int | None = None) -> int:
    """Count 0->1 and 1->0 edges of the pulse line, starting and ending low.

    ``length`` pads the stream with deasserted cycles (a fixed time window).
    """
    levels = [bool(ev.pulse) for ev in stream]
    if length is not None:
        levels += [False] * max(0, length - len(levels))
    prev = False
    edges = 0
    for level in levels + [False]:
        edges += level != prev
        prev = level
    return edges


@dataclass(frozen=True)
class EncodedOperand:
    """A value together with its temporal-unary view."""

    value: int
    bitwidth: int = 8
    unary_base: int = DEFAULT_UNARY_BASE
    polarity: Polarity = Polarity.BIPOLAR

    def __post_init__(self):
        object.__setattr__(self, "polarity", Polarity.parse(self.polarity))
        check_unary_base(self.unary_base)
        check_value(self.value, self.bitwidth, self.polarity)

    @property
    def magnitude(self) -> int:
        return abs(self.value)

    @property
    def sign(self) -> int:
        return -1 if self.value < 0 else 1

    @property
    def pulse_cycles(self) -> int:
        return pulse_cycles(self.value, self.unary_base)

    @property
    def residue(self) -> int:
        return self.magnitude % self.unary_base

    def stream(self) -> list[UnaryCycleEvent]:
        return encode(self.value, self.bitwidth, self.unary_base, self.polarity)
