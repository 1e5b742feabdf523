"""
Worst-case latency and energy across array sizes and bit-widths
===============================================================

The analytical model charges ceil(max/n) cycles plus a fixed overhead per
step. Multiplying by the shipped power figures gives energy.
"""

from tubgemm import LatencyModel, PowerProfile, sweep_table

profile = PowerProfile.default()
rows = sweep_table(profile, LatencyModel(), technology="n5")

print(f"{'array':>8} {'bits':>4} {'latency us':>11} {'energy nJ':>10} {'reported nJ':>12}")
for r in rows:
    size = "x".join(map(str, r["array"]))
    print(
        f"{size:>8} {r['bitwidth']:>4} {r['wc_latency_s'] * 1e6:>11.2f} "
        f"{r['wc_energy_j'] * 1e9:>10.2f} {r['reported_energy_nj']:>12.2f}"
    )

# halving the bit-width divides the pulse term by 16
by_key = {(r["array"][0], r["bitwidth"]): r for r in rows}
for size in (16, 32, 64, 128):
    ratio = by_key[size, 8]["wc_latency_s"] / by_key[size, 4]["wc_latency_s"]
    print(f"{size}x{size}: 8-bit is {ratio:.1f}x slower than 4-bit")
