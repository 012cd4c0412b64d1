"""Compiled kernel, NumPy fallback and a brute-force permanent oracle must agree."""

import itertools
import math

import numpy as np
import pytest

from noonsim import _lift_py, lift
from noonsim.optics import random_unitary


def permanent(m):
    n = m.shape[0]
    return sum(math.prod(m[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def oracle_amplitude(U, occ_in, occ_out):
    """<out|U|in> = perm(U[rows of out, cols of in]) / sqrt(prod n! prod m!)."""
    rows = [k for k, m in enumerate(occ_out) for _ in range(m)]
    cols = [j for j, n in enumerate(occ_in) for _ in range(n)]
    sub = U[np.ix_(rows, cols)]
    norm = math.sqrt(math.prod(math.factorial(n) for n in occ_in) * math.prod(math.factorial(m) for m in occ_out))
    return permanent(sub) / norm


def test_tables_enumerate_all_compositions():
    comps, succ, offsets = lift.composition_tables(3, 3)
    assert list(np.diff(offsets)) == [1, 3, 6, 10]
    top = comps[offsets[3]:offsets[4]]
    assert {tuple(r) for r in top} == {c for c in itertools.product(range(4), repeat=3) if sum(c) == 3}
    for i in range(offsets[3]):
        for k in range(3):
            expect = comps[i].copy()
            expect[k] += 1
            assert tuple(comps[succ[i, k]]) == tuple(expect)


@pytest.mark.parametrize("occ", [(1, 0), (1, 1), (2, 0), (0, 3), (2, 1, 1), (3, 0, 1, 0), (1, 1, 1, 1)])
def test_expand_term_matches_permanent_oracle(occ):
    rng = np.random.default_rng(sum(occ) * 7 + len(occ))
    U = random_unitary(len(occ), rng)
    patterns, amps = lift.expand_term(U, occ)
    assert abs(np.sum(np.abs(amps) ** 2) - 1) < 1e-12
    for row, a in zip(patterns, amps):
        assert abs(a - oracle_amplitude(U, occ, tuple(row))) < 1e-12


@pytest.mark.skipif(lift.BACKEND != "cython", reason="compiled kernel not built")
def test_compiled_and_fallback_agree():
    rng = np.random.default_rng(5)
    for T, occ in [(2, (2, 2)), (4, (1, 2, 0, 3)), (6, (1, 1, 1, 1, 1, 1))]:
        U = random_unitary(T, rng)
        _, a = lift.expand_term(U, occ)
        _, b = lift.expand_term(U, occ, kernel=_lift_py)
        assert np.max(np.abs(a - b)) < 1e-13


def test_vacuum_term_is_fixed():
    patterns, amps = lift.expand_term(np.eye(3), (0, 0, 0))
    assert patterns.tolist() == [[0, 0, 0]]
    assert amps.tolist() == [1]
