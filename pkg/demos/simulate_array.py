"""
Cycle-level GEMM on a small array
=================================

Each step streams one column of A against one row of B. A step lasts as
long as the largest magnitude in its column, so zero columns cost nothing
beyond the fixed per-step overhead.
"""

import numpy as np

from tubgemm import GemmConfig, MatrixOperands, reference_gemm, simulate_gemm

rng = np.random.default_rng(3)
A = rng.integers(-128, 128, size=(4, 6))
A[:, 2] = 0  # a fully sparse step
A[:, 4] //= 16  # a step with small values
B = rng.integers(-128, 128, size=(6, 5))

cfg = GemmConfig(4, 6, 5, bitwidth=8, polarity="bipolar", unary_base=2)
Y, report = simulate_gemm(cfg, MatrixOperands(A, B))

print("exact:", np.array_equal(Y, reference_gemm(MatrixOperands(A, B))))
print("cycles per step:", list(report.per_step_cycles))
print("step done at:   ", list(report.done_cycles))
print("total cycles:", report.total_cycles)
print(f"latency at 400 MHz: {report.latency_seconds(4e8) * 1e6:.3f} us")

# the event mode skips identical cycles and must agree bit for bit
Y_event, report_event = simulate_gemm(cfg, MatrixOperands(A, B), mode="event")
print("event mode agrees:", np.array_equal(Y, Y_event) and report_event == report)
