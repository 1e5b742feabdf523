"""Check the models against published figures, one tolerance per check.

Used by ``tubgemm repro``. Published numbers live here as plain constants
in the units they were reported in.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import mean

import numpy as np

from .encoding import Polarity, max_magnitude
from .gemm import (
    GemmConfig,
    MatrixOperands,
    random_config,
    random_operands,
    reference_gemm,
    simulate_gemm,
)
from .perf import LatencyModel, PowerProfile, energy, sweep_table
from .sparsity import load_fixture, profile_simulation

US = 1e-6
NJ = 1e-9
UJ = 1e-6

# 45nm, 16x16, 8-bit worst case
WC_LATENCY_45NM_US = {Polarity.BIPOLAR: 2.65, Polarity.UNIPOLAR: 5.29}
# average case on a MobileNetV2-like value distribution (45nm, 16x16 unipolar)
AVG_CASE = {"expected_max": 82, "latency_us": 1.72, "energy_uj": 0.021, "edp": 0.036}
AVG_WC_RATIO = 3.0
EDP_IMPROVEMENT = 9.25
ENERGY_RATIO_8_TO_4 = 23.9
LATENCY_RATIO_8_TO_4 = 2.65 / 0.25
# 64x64 8-bit N5 workload runs: (power mW, latency us, energy uJ)
WORKLOADS = {"mobilenetv2": (49.43, 5.54, 0.27), "resnet50": (56.35, 4.66, 0.26)}


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    measured: float
    target: float
    tolerance: float
    relative: bool = True

    @property
    def error(self) -> float:
        diff = self.measured - self.target
        return diff / self.target if self.relative else diff

    @property
    def passed(self) -> bool:
        return abs(self.error) <= self.tolerance + 1e-12

    def line(self) -> str:
        tol = f"±{self.tolerance:.1%}" if self.relative else f"±{self.tolerance:g}"
        err = f"{self.error:+.2%}" if self.relative else f"{self.error:+.4g}"
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  [{self.group}] {self.name}: measured {self.measured:.6g}, "
            f"target {self.target:g} {tol} (err {err})"
        )

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "name": self.name,
            "measured": self.measured,
            "target": self.target,
            "tolerance": self.tolerance,
            "relative": self.relative,
            "error": self.error,
            "passed": self.passed,
        }


def sweep_checks(profile: PowerProfile, model: LatencyModel) -> list[Check]:
    checks = []
    for row in sweep_table(profile, model):
        label = f"{row['array'][0]}x{row['array'][1]} {row['bitwidth']}-bit"
        checks.append(
            Check("n5-wc-latency", label, row["wc_latency_s"] / US, row["reported_latency_us"], 0.01, False)
        )
        checks.append(
            Check("n5-wc-energy", label, row["wc_energy_j"] / NJ, row["reported_energy_nj"], 0.005)
        )
    return checks


def simulator_wc_checks(profile: PowerProfile) -> list[Check]:
    checks = []
    for polarity, target in WC_LATENCY_45NM_US.items():
        cfg = GemmConfig(16, 16, 16, 8, polarity, 2)
        mag = max_magnitude(8, polarity)
        a = -mag if polarity is Polarity.BIPOLAR else mag
        ops = MatrixOperands(np.full((16, 16), a), np.full((16, 16), 1))
        _, report = simulate_gemm(cfg, ops, mode="event")
        latency = report.latency_seconds(profile.frequency_hz)
        checks.append(Check("sim-wc-latency", f"16x16 8-bit {polarity.value}", latency / US, target, 0.05))
    return checks


def scaling_checks(profile: PowerProfile, model: LatencyModel) -> list[Check]:
    rows = {(r["array"][0], r["bitwidth"]): r for r in sweep_table(profile, model)}
    sizes = sorted({s for s, _ in rows})
    checks = []
    for s in sizes:
        ratio = rows[s, 8]["wc_latency_s"] / rows[s, 4]["wc_latency_s"]
        checks.append(Check("precision-scaling", f"{s}x{s} latency 8->4 bit", ratio, LATENCY_RATIO_8_TO_4, 0.01))
    energy_ratio = mean(rows[s, 8]["wc_energy_j"] / rows[s, 4]["wc_energy_j"] for s in sizes)
    checks.append(Check("precision-scaling", "mean energy 8->4 bit", energy_ratio, ENERGY_RATIO_8_TO_4, 0.05))
    return checks


def sparsity_checks(profile: PowerProfile, model: LatencyModel) -> list[Check]:
    cfg = GemmConfig(16, 16, 16, 8, Polarity.UNIPOLAR, 2)
    rep = profile_simulation(cfg, load_fixture(), model, profile, technology="45nm")
    return [
        Check("sparsity", "expected max", rep["expected_max"], AVG_CASE["expected_max"], 1, False),
        Check("sparsity", "average latency (us)", rep["avg_latency_s"] / US, AVG_CASE["latency_us"], 0.05),
        Check("sparsity", "average energy (uJ)", rep["avg_energy_j"] / UJ, AVG_CASE["energy_uj"], 0.05),
        Check("sparsity", "average EDP (uJ*us)", rep["edp_js"] / (UJ * US), AVG_CASE["edp"], 0.10),
        Check("sparsity", "worst/average latency", rep["wc_ratio"], AVG_WC_RATIO, 0.10),
        Check("sparsity", "EDP improvement", rep["edp_improvement"], EDP_IMPROVEMENT, 0.05),
    ]


def workload_checks() -> list[Check]:
    checks = []
    for name, (p_mw, lat_us, e_uj) in WORKLOADS.items():
        e = energy(p_mw * 1e-3, lat_us * US)
        checks.append(Check("workload-energy", name, e / UJ, e_uj, 0.02))
    return checks


def exactness_checks(instances: int = 50, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(instances):
        cfg = random_config(rng, max_size=16)
        ops = random_operands(cfg, rng)
        Y, _ = simulate_gemm(cfg, ops)
        mismatches += not np.array_equal(Y, reference_gemm(ops))
    return [Check("exactness", f"{instances} random instances, mismatches", mismatches, 0, 0, False)]


def run_all(profile: PowerProfile | None = None, model: LatencyModel = LatencyModel()) -> list[Check]:
    if profile is None:
        profile = PowerProfile.default()
    return (
        exactness_checks()
        + sweep_checks(profile, model)
        + simulator_wc_checks(profile)
        + scaling_checks(profile, model)
        + sparsity_checks(profile, model)
        + workload_checks()
    )
