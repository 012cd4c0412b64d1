"""Fock-space lift of a mode unitary, with backend selection at import.

The compiled kernel (``noonsim._lift``) is used when it was built; set
``NOON_SIM_PURE=1`` to force the NumPy fallback.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np

from . import _lift_py

if os.environ.get("NOON_SIM_PURE"):
    _kernel = _lift_py
else:
    try:
        from . import _lift as _kernel
    except ImportError:
        _kernel = _lift_py

BACKEND = "cython" if _kernel is not _lift_py else "python"


@lru_cache(maxsize=None)
def composition_tables(n_photons: int, n_modes: int):
    """Index tables for all compositions of 0..n_photons over n_modes.

    Returns ``(comps, succ, offsets)``: ``comps[i]`` is the i-th
    occupation pattern, grouped by total photon number with group s
    spanning ``offsets[s]:offsets[s+1]``; ``succ[i, k]`` indexes the
    pattern obtained by adding one photon to mode k (-1 past the top).
    """
    groups = [[(0,) * n_modes]]
    for _ in range(n_photons):
        nxt = sorted({c[:k] + (c[k] + 1,) + c[k + 1:] for c in groups[-1] for k in range(n_modes)}, reverse=True)
        groups.append(nxt)
    comps = [c for g in groups for c in g]
    index = {c: i for i, c in enumerate(comps)}
    succ = np.full((len(comps), n_modes), -1, dtype=np.int_)
    for i, c in enumerate(comps):
        if sum(c) < n_photons:
            for k in range(n_modes):
                succ[i, k] = index[c[:k] + (c[k] + 1,) + c[k + 1:]]
    offsets = np.cumsum([0] + [len(g) for g in groups]).astype(np.int_)
    comps_arr = np.array(comps, dtype=np.int_).reshape(len(comps), n_modes)
    for arr in (comps_arr, succ, offsets):
        arr.setflags(write=False)
    return comps_arr, succ, offsets


@lru_cache(maxsize=None)
def composition_rows(n_photons: int, n_modes: int) -> tuple[tuple[int, ...], ...]:
    """The ``n_photons`` patterns of :func:`composition_tables` as plain tuples."""
    comps, _, offsets = composition_tables(n_photons, n_modes)
    return tuple(map(tuple, comps[offsets[n_photons]:offsets[n_photons + 1]].tolist()))


@lru_cache(maxsize=4096)
def _sqrt_factorial(n: int) -> float:
    return math.sqrt(math.factorial(n))


@lru_cache(maxsize=None)
def _output_norms(n_photons: int, n_modes: int) -> np.ndarray:
    comps, _, offsets = composition_tables(n_photons, n_modes)
    rows = comps[offsets[n_photons]:offsets[n_photons + 1]]
    norms = np.array([math.prod(_sqrt_factorial(int(m)) for m in row) for row in rows.tolist()])
    norms.setflags(write=False)
    return norms


def expand_term(block: np.ndarray, occ: tuple[int, ...], kernel=None) -> tuple[np.ndarray, np.ndarray]:
    """Image of the normalized Fock term ``|occ>`` under the block unitary.

    Each creation operator is substituted by the corresponding column of
    ``block`` and the product is expanded exactly; the resulting
    monomials are converted back to normalized Fock amplitudes.

    Returns ``(patterns, amplitudes)`` over the touched modes.
    """
    kernel = kernel or _kernel
    block = np.ascontiguousarray(block, dtype=np.complex128)
    n = int(sum(occ))
    comps, succ, offsets = composition_tables(n, block.shape[0])
    occ_arr = np.asarray(occ, dtype=np.int_)
    coeffs = kernel.expand_coefficients(block, occ_arr, succ, offsets)
    patterns = comps[offsets[n]:offsets[n + 1]]
    norm_out = _output_norms(n, block.shape[0])
    norm_in = math.prod(_sqrt_factorial(int(m)) for m in occ)
    return patterns, coeffs * norm_out / norm_in
