"""Max-magnitude histograms of workload traces.

Every matrix-multiply operation in a workload is summarized by the largest
operand magnitude it touches, since that bounds its latency on the array.
The histogram of those maxima gives the cumulative distribution and the
expected maximum used by the average-case latency model.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Iterable, Iterator

import numpy as np

from .encoding import Polarity, max_magnitude, value_range
from .errors import EmptyHistogramError, OperandRangeError, TraceFormatError
from .gemm import GemmConfig
from .perf import (
    LatencyModel,
    PowerProfile,
    analytical_wc_latency,
    edp,
    energy,
    expected_latency,
)

FIXTURE_NAME = "mobilenetv2_synthetic_hist.csv"
SPARSITY_REPORT_SCHEMA = "tubgemm.sparsity_report/1"


@dataclass
class MaxValueHistogram:
    bitwidth: int
    polarity: Polarity
    counts: np.ndarray

    def __post_init__(self):
        self.polarity = Polarity.parse(self.polarity)
        size = max_magnitude(self.bitwidth, self.polarity) + 1
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or len(counts) > size:
            raise OperandRangeError(f"histogram has bins beyond magnitude {size - 1}")
        if (counts < 0).any():
            raise TraceFormatError("negative histogram count")
        self.counts = np.pad(counts, (0, size - len(counts)))

    @classmethod
    def empty(cls, bitwidth: int, polarity: Polarity | str) -> "MaxValueHistogram":
        return cls(bitwidth, polarity, np.zeros(0, dtype=np.int64))

    @classmethod
    def from_maxima(cls, maxima: Iterable[int], bitwidth: int, polarity) -> "MaxValueHistogram":
        hist = cls.empty(bitwidth, polarity)
        for m in maxima:
            hist.add(m)
        return hist

    @property
    def max_magnitude(self) -> int:
        return len(self.counts) - 1

    @property
    def total_ops(self) -> int:
        return int(self.counts.sum())

    def add(self, value: int, count: int = 1) -> None:
        if not 0 <= value <= self.max_magnitude:
            raise OperandRangeError(
                f"max magnitude {value} outside [0, {self.max_magnitude}] for "
                f"{self.bitwidth}-bit {self.polarity.value}"
            )
        if count < 0:
            raise TraceFormatError("negative histogram count")
        self.counts[value] += count

    def nonzero_bins(self) -> Iterator[tuple[int, int]]:
        for v in np.flatnonzero(self.counts):
            yield int(v), int(self.counts[v])

    def max_observed(self) -> int:
        nz = np.flatnonzero(self.counts)
        if not len(nz):
            raise EmptyHistogramError("histogram is empty")
        return int(nz[-1])

    def __eq__(self, other):
        if not isinstance(other, MaxValueHistogram):
            return NotImplemented
        return (
            self.bitwidth == other.bitwidth
            and self.polarity is other.polarity
            and np.array_equal(self.counts, other.counts)
        )


def histogram_from_matrices(ops: Iterable, bitwidth: int, polarity) -> MaxValueHistogram:
    """One count per matrix, at its largest absolute entry."""
    hist = MaxValueHistogram.empty(bitwidth, polarity)
    lo, hi = value_range(bitwidth, polarity)
    for idx, mat in enumerate(ops):
        arr = np.asarray(mat, dtype=np.int64)
        if arr.size == 0:
            raise TraceFormatError(f"matrix {idx} is empty")
        if arr.min() < lo or arr.max() > hi:
            raise OperandRangeError(f"matrix {idx} has entries outside [{lo}, {hi}]")
        hist.add(int(np.abs(arr).max()))
    return hist


def _require_ops(hist: MaxValueHistogram) -> int:
    total = hist.total_ops
    if total <= 0:
        raise EmptyHistogramError("histogram has no operations")
    return total


def probabilities(hist: MaxValueHistogram) -> list[tuple[int, Fraction]]:
    total = _require_ops(hist)
    return [(v, Fraction(c, total)) for v, c in hist.nonzero_bins()]


def cumulative(hist: MaxValueHistogram) -> list[tuple[int, float]]:
    """``(value, percent of ops whose max is <= value)`` for every bin."""
    total = _require_ops(hist)
    running = np.cumsum(hist.counts)
    return [(v, 100.0 * int(running[v]) / total) for v in range(len(running))]


def cumulative_at(hist: MaxValueHistogram, value: int) -> float:
    total = _require_ops(hist)
    value = min(value, hist.max_magnitude)
    return 100.0 * int(hist.counts[: value + 1].sum()) / total


def expected_max(hist: MaxValueHistogram) -> Fraction:
    """Mean of the per-operation maxima, exact."""
    total = _require_ops(hist)
    weighted = sum(v * c for v, c in hist.nonzero_bins())
    return Fraction(weighted, total)


# --------------------------------------------------------------------------
# file formats


def read_trace(path: str | os.PathLike, bitwidth: int, polarity) -> MaxValueHistogram:
    """Read either a per-op trace (``op_id,max_abs``) or a binned histogram
    (``value,count``); the header row decides which.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        if header == ["op_id", "max_abs"]:
            maxima = (max_abs for _, max_abs in _int_pairs(reader, path))
            return MaxValueHistogram.from_maxima(maxima, bitwidth, polarity)
        if header == ["value", "count"]:
            hist = MaxValueHistogram.empty(bitwidth, polarity)
            for value, count in _int_pairs(reader, path):
                hist.add(value, count)
            return hist
    raise TraceFormatError(f"{path}: header must be 'op_id,max_abs' or 'value,count', got {header}")


def _int_pairs(reader, path) -> Iterator[tuple[int, int]]:
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise TraceFormatError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            yield int(row[0]), int(row[1])
        except ValueError:
            raise TraceFormatError(f"{path}:{lineno}: non-integer field in {row}") from None


def write_histogram(hist: MaxValueHistogram, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "count"])
        for v, c in enumerate(hist.counts):
            w.writerow([v, int(c)])


def write_trace(maxima: Iterable[int], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["op_id", "max_abs"])
        for i, m in enumerate(maxima):
            w.writerow([i, int(m)])


def load_fixture() -> MaxValueHistogram:
    """Synthetic 8-bit unipolar histogram shaped like an INT8 MobileNetV2
    profile: 25% all-zero operations, mean maximum 82, 90% of maxima <= 150.
    Not measured data.
    """
    ref = resources.files("tubgemm.data").joinpath(FIXTURE_NAME)
    with resources.as_file(ref) as path:
        return read_trace(path, 8, Polarity.UNIPOLAR)


# --------------------------------------------------------------------------
# average-case report


def profile_simulation(
    config: GemmConfig,
    hist: MaxValueHistogram,
    model: LatencyModel = LatencyModel(),
    profile: PowerProfile | None = None,
    *,
    technology: str = "45nm",
    power_w: float | None = None,
) -> dict:
    """Average-case latency, energy and EDP next to the worst case."""
    if profile is None:
        profile = PowerProfile.default()
    source = "user-supplied"
    if power_w is None:
        entry = profile.lookup((config.M, config.P), config.bitwidth, config.polarity, technology)
        power_w, source = entry.power_w, entry.source

    e_max = expected_max(hist)
    avg_latency = expected_latency(config, hist, model, profile)
    avg_latency_full = expected_latency(config, hist, model, profile, full=True)
    wc_latency = analytical_wc_latency(config, model, profile)
    avg_energy = energy(power_w, avg_latency)
    wc_energy = energy(power_w, wc_latency)
    avg_edp = edp(avg_energy, avg_latency)
    wc_edp = edp(wc_energy, wc_latency)
    return {
        "schema": SPARSITY_REPORT_SCHEMA,
        "bitwidth": hist.bitwidth,
        "polarity": hist.polarity.value,
        "total_ops": hist.total_ops,
        "zero_fraction": float(hist.counts[0]) / hist.total_ops,
        "expected_max": float(e_max),
        "expected_max_exact": str(e_max),
        "power_w": power_w,
        "power_source": source,
        "avg_latency_s": avg_latency,
        "avg_latency_full_s": avg_latency_full,
        "avg_energy_j": avg_energy,
        "edp_js": avg_edp,
        "wc_latency_s": wc_latency,
        "wc_energy_j": wc_energy,
        "wc_edp_js": wc_edp,
        "wc_ratio": wc_latency / avg_latency if avg_latency else float("inf"),
        "edp_improvement": wc_edp / avg_edp if avg_edp else float("inf"),
    }
