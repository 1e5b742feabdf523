"""Analytical latency / energy / EDP model.

Latency of one GEMM is ``N * (pulse term + per-step overhead) / f``. The
overhead is a single fractional constant (9/4 cycles by default) so that
the worst-case figures of the N5 scaling sweep come out exactly. Power and
area are never computed here; they are looked up in a :class:`PowerProfile`
of published, source-tagged design points.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

from .encoding import Polarity, pulse_cycles, worst_case_mult_cycles
from .errors import ParameterError, ProfileMissError, TraceFormatError
from .gemm import GemmConfig

DEFAULT_FREQUENCY_HZ = 4.0e8
DEFAULT_STEP_OVERHEAD = Fraction(9, 4)
PROFILE_ENV_VAR = "TUBGEMM_PROFILE"
PROFILE_SCHEMA = "tubgemm.power_profile/1"


@dataclass(frozen=True)
class PowerEntry:
    array: tuple[int, int]
    bitwidth: int
    polarity: Polarity
    technology: str
    power_w: float
    source: str
    workload: str = "worst_case"
    area: float | None = None
    area_unit: str | None = None
    reported_latency_us: float | None = None
    reported_energy_nj: float | None = None
    reported_edp_uj_us: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "array", tuple(int(x) for x in self.array))
        object.__setattr__(self, "polarity", Polarity.parse(self.polarity))
        if not self.source:
            raise ParameterError("every power entry needs a source tag")
        if self.power_w < 0:
            raise ParameterError(f"negative power {self.power_w}")

    @property
    def key(self) -> tuple:
        return (self.array, self.bitwidth, self.polarity, self.technology, self.workload)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["array"] = list(self.array)
        d["polarity"] = self.polarity.value
        return d


@dataclass
class PowerProfile:
    frequency_hz: float = DEFAULT_FREQUENCY_HZ
    entries: list[PowerEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ParameterError(f"frequency must be positive, got {self.frequency_hz}")
        seen = set()
        for e in self.entries:
            if e.key in seen:
                raise ParameterError(f"duplicate profile entry {e.key}")
            seen.add(e.key)

    @classmethod
    def from_dict(cls, doc: dict) -> "PowerProfile":
        if doc.get("schema", PROFILE_SCHEMA) != PROFILE_SCHEMA:
            raise TraceFormatError(f"unsupported profile schema {doc.get('schema')!r}")
        try:
            entries = [PowerEntry(**e) for e in doc.get("entries", [])]
        except TypeError as exc:
            raise TraceFormatError(f"bad profile entry: {exc}") from None
        return cls(float(doc.get("frequency_hz", DEFAULT_FREQUENCY_HZ)), entries)

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "PowerProfile":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def default(cls) -> "PowerProfile":
        """The shipped dataset, or the file named by ``$TUBGEMM_PROFILE``."""
        override = os.environ.get(PROFILE_ENV_VAR)
        if override:
            return cls.from_json(override)
        text = resources.files("tubgemm.data").joinpath("power_profile.json").read_text()
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "schema": PROFILE_SCHEMA,
            "frequency_hz": self.frequency_hz,
            "entries": [e.to_dict() for e in self.entries],
        }

    def select(self, **criteria) -> list[PowerEntry]:
        out = []
        for e in self.entries:
            if all(getattr(e, k) == v for k, v in criteria.items() if v is not None):
                out.append(e)
        return out

    def lookup(
        self,
        array: tuple[int, int],
        bitwidth: int,
        polarity: Polarity | str,
        technology: str = "n5",
        workload: str = "worst_case",
    ) -> PowerEntry:
        key = (tuple(array), bitwidth, Polarity.parse(polarity), technology, workload)
        for e in self.entries:
            if e.key == key:
                return e
        raise ProfileMissError(
            f"no profile entry for {array[0]}x{array[1]} {bitwidth}-bit "
            f"{Polarity.parse(polarity).value} {technology} ({workload})"
        )


@dataclass(frozen=True)
class LatencyModel:
    step_overhead: Fraction = DEFAULT_STEP_OVERHEAD
    mode: str = "worst_case"

    def __post_init__(self):
        object.__setattr__(self, "step_overhead", Fraction(self.step_overhead))
        if self.step_overhead < 0:
            raise ParameterError("step overhead must be non-negative")
        if self.mode not in ("worst_case", "expected"):
            raise ParameterError(f"unknown latency mode {self.mode!r}")


def analytical_wc_cycles(config: GemmConfig, model: LatencyModel = LatencyModel()) -> Fraction:
    wc = worst_case_mult_cycles(config.bitwidth, config.polarity, config.unary_base)
    return config.N * (wc + model.step_overhead)


def analytical_wc_latency(
    config: GemmConfig,
    model: LatencyModel = LatencyModel(),
    profile: PowerProfile | None = None,
) -> float:
    """Worst-case latency in seconds."""
    freq = profile.frequency_hz if profile is not None else DEFAULT_FREQUENCY_HZ
    return float(analytical_wc_cycles(config, model) / Fraction(freq))


def _check_hist(config: GemmConfig, hist) -> None:
    if hist.bitwidth != config.bitwidth or hist.polarity is not config.polarity:
        raise ParameterError(
            f"histogram is {hist.bitwidth}-bit {hist.polarity.value}, config is "
            f"{config.bitwidth}-bit {config.polarity.value}"
        )


def expected_cycles(config: GemmConfig, hist, model: LatencyModel = LatencyModel()) -> Fraction:
    """``N * (ceil(E[max] / n) + overhead)``: the latency of the mean operation."""
    from .sparsity import expected_max

    _check_hist(config, hist)
    e_max = expected_max(hist)
    return config.N * (math.ceil(e_max / config.unary_base) + model.step_overhead)


def expected_cycles_full(config: GemmConfig, hist, model: LatencyModel = LatencyModel()) -> Fraction:
    """``sum_v p(v) * N * (ceil(v / n) + overhead)``: the mean latency over operations."""
    from .sparsity import probabilities

    _check_hist(config, hist)
    total = Fraction(0)
    for value, p in probabilities(hist):
        total += p * (pulse_cycles(value, config.unary_base) + model.step_overhead)
    return config.N * total


def expected_latency(
    config: GemmConfig,
    hist,
    model: LatencyModel = LatencyModel(),
    profile: PowerProfile | None = None,
    *,
    full: bool = False,
) -> float:
    """Average-case latency in seconds from a max-value histogram.

    By default the pulse term uses the expected maximum magnitude; with
    ``full=True`` the latency is averaged over the histogram instead.
    """
    freq = profile.frequency_hz if profile is not None else DEFAULT_FREQUENCY_HZ
    cycles = expected_cycles_full(config, hist, model) if full else expected_cycles(config, hist, model)
    return float(cycles / Fraction(freq))


def energy(power: float, latency: float) -> float:
    """Joules from watts and seconds."""
    if power < 0 or latency < 0:
        raise ParameterError("power and latency must be non-negative")
    return power * latency


def edp(energy_j: float, latency: float) -> float:
    if energy_j < 0 or latency < 0:
        raise ParameterError("energy and latency must be non-negative")
    return energy_j * latency


def estimate(
    config: GemmConfig,
    profile: PowerProfile,
    model: LatencyModel = LatencyModel(),
    *,
    technology: str = "n5",
    power_w: float | None = None,
) -> dict:
    """Worst-case latency / energy / EDP for one design point.

    ``power_w`` overrides the profile lookup (needed for sizes the profile
    does not cover).
    """
    entry = None
    if power_w is None:
        entry = profile.lookup((config.M, config.P), config.bitwidth, config.polarity, technology)
        power_w = entry.power_w
    latency = analytical_wc_latency(config, model, profile)
    e = energy(power_w, latency)
    report = {
        "array": [config.M, config.P],
        "inner_dim": config.N,
        "bitwidth": config.bitwidth,
        "polarity": config.polarity.value,
        "unary_base": config.unary_base,
        "technology": technology,
        "frequency_hz": profile.frequency_hz,
        "step_overhead_cycles": str(model.step_overhead),
        "wc_cycles": str(analytical_wc_cycles(config, model)),
        "power_w": power_w,
        "wc_latency_s": latency,
        "wc_energy_j": e,
        "wc_edp_js": edp(e, latency),
        "power_source": entry.source if entry else "user-supplied",
    }
    if entry is not None and entry.area is not None:
        report["area"] = entry.area
        report["area_unit"] = entry.area_unit
    return report


def sweep_table(
    profile: PowerProfile,
    model: LatencyModel = LatencyModel(),
    technology: str = "n5",
    entries: Iterable[PowerEntry] | None = None,
) -> list[dict]:
    """Model every worst-case entry of ``technology`` next to its published figures."""
    if entries is None:
        entries = profile.select(technology=technology, workload="worst_case")
    rows = []
    for e in entries:
        size = e.array[0]
        cfg = GemmConfig(e.array[0], size, e.array[1], e.bitwidth, e.polarity, 2)
        est = estimate(cfg, profile, model, technology=e.technology)
        rows.append(
            {
                **est,
                "reported_latency_us": e.reported_latency_us,
                "reported_energy_nj": e.reported_energy_nj,
            }
        )
    return rows
