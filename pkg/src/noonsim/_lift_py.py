"""Pure NumPy twin of the compiled expansion kernel."""

import numpy as np


def expand_coefficients(block, occ, succ, offsets):
    """Monomial coefficients of prod_j (sum_k block[k, j] a_k^dagger)^{occ_j}."""
    T = block.shape[0]
    cur = np.zeros(offsets[-1], dtype=np.complex128)
    cur[0] = 1.0
    s = 0
    for j in range(T):
        col = block[:, j]
        live = np.flatnonzero(col)
        for _ in range(occ[j]):
            lo, hi = offsets[s], offsets[s + 1]
            src = cur[lo:hi]
            for k in live:
                np.add.at(cur, succ[lo:hi, k], src * col[k])
            s += 1
    return cur[offsets[s]:offsets[s + 1]].copy()
