"""
Encoding an operand as a pulse train and multiplying in one PE
==============================================================

A value is sent as a run of high cycles. With a base of n each high cycle
carries n units and the final one may carry a smaller residue.
"""

from tubgemm import PEState, encode, pe_multiply, pulse_cycles

# 13 in base 2: six full cycles and a residue of 1 in the seventh
stream = encode(13, bitwidth=8, n=2, polarity="unipolar")
for cycle, (pulse, residue) in enumerate(stream):
    print(cycle, "high" if pulse else "low", "residue" if residue else "")

# the PE adds n*b on full cycles and residue*b on the last one
state, cycles = pe_multiply(PEState(0), 13, -9, bitwidth=8, n=2, polarity="bipolar")
print("13 * -9 =", state.accumulator, "in", cycles, "cycles")

# larger bases shorten the train; latency never depends on b
for n in (1, 2, 4, 8):
    print(f"n={n}: 255 takes {pulse_cycles(255, n)} cycles")
