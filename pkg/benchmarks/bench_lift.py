"""Time the compiled expansion kernel against the NumPy fallback.

Run ``python benchmarks/bench_lift.py``; pass ``--repeat`` to change the
number of timing repetitions.  Each case expands one Fock term under a
Haar-random unitary on the touched modes.
"""

import argparse
import timeit

import numpy as np

from noonsim import _lift_py
from noonsim.lift import composition_tables
from noonsim.optics import random_unitary

try:
    from noonsim import _lift
except ImportError:
    _lift = None

CASES = [
    # (modes, occupation)
    (4, (1, 1, 1, 1)),
    (8, (1, 1, 1, 1, 0, 0, 0, 0)),
    (6, (2, 1, 1, 1, 1, 0)),
    (8, (1, 1, 1, 1, 1, 1, 0, 0)),
    (8, (2, 2, 1, 1, 1, 1, 0, 0)),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'modes':>5} {'photons':>7} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for m, occ in CASES:
        block = np.ascontiguousarray(random_unitary(m, rng))
        occ_arr = np.asarray(occ, dtype=np.int_)
        _, succ, offsets = composition_tables(sum(occ), m)
        call = lambda k: k.expand_coefficients(block, occ_arr, succ, offsets)  # noqa: E731
        t_py = min(timeit.repeat(lambda: call(_lift_py), number=1, repeat=args.repeat)) * 1e3
        if _lift is None:
            print(f"{m:>5} {sum(occ):>7} {t_py:>11.3f} {'n/a':>12} {'':>8}")
            continue
        assert np.allclose(call(_lift), call(_lift_py), atol=1e-12)
        t_c = min(timeit.repeat(lambda: call(_lift), number=1, repeat=args.repeat)) * 1e3
        print(f"{m:>5} {sum(occ):>7} {t_py:>11.3f} {t_c:>12.3f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
