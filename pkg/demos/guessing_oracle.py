"""Brute-force check of the min-entropy guessing bound on small strings.

For a joint distribution of an n-bit string and classical side information,
the best chance of guessing the string to within r errors is at most the
Hamming-ball volume times 2^-H_min.

    python demos/guessing_oracle.py
"""

from qds.mathkernel import log2_binom_tail
from qds.oracle import guessing_oracle, noisy_copy_joint

n = 6
for flip in (0.0, 0.05, 0.2, 0.5):
    joint = noisy_copy_joint(n, flip)
    cells = []
    for r in range(n + 1):
        success, h_min = guessing_oracle(joint, r)
        bound = 2.0 ** (log2_binom_tail(n, r).log2_value - h_min)
        cells.append(f"{success:.3f}/{min(bound, 1.0):.3f}")
    print(f"flip={flip:.2f}  " + "  ".join(cells))
print("\neach cell is exact success / bound for r = 0..", n, sep="")

