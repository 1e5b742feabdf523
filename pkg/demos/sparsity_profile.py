"""
Average-case latency from a max-value histogram
===============================================

Each operation is bounded by its largest operand magnitude. Given how often
each maximum occurs, the expected latency follows directly. The shipped
histogram is synthetic and only shaped like a quantized vision workload.
"""

from tubgemm import GemmConfig, LatencyModel
from tubgemm.sparsity import cumulative_at, expected_max, load_fixture, profile_simulation

hist = load_fixture()
print("operations:", hist.total_ops)
print(f"all-zero operations: {hist.counts[0] / hist.total_ops:.0%}")
print(f"maxima <= 150: {cumulative_at(hist, 150):.1f}%")
print("expected maximum:", float(expected_max(hist)))

cfg = GemmConfig(16, 16, 16, bitwidth=8, polarity="unipolar", unary_base=2)
report = profile_simulation(cfg, hist, LatencyModel(), technology="45nm")
print(f"average latency: {report['avg_latency_s'] * 1e6:.2f} us")
print(f"worst case:      {report['wc_latency_s'] * 1e6:.2f} us ({report['wc_ratio']:.1f}x)")
print(f"EDP improvement: {report['edp_improvement']:.2f}x")
