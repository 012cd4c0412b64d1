# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled photon-by-photon expansion of one Fock term under a mode block."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def expand_coefficients(const double complex[:, ::1] block,
                        const long[::1] occ,
                        const long[:, ::1] succ,
                        const long[::1] offsets):
    """Monomial coefficients of prod_j (sum_k block[k, j] a_k^dagger)^{occ_j}.

    Returns the coefficient vector over all compositions of
    ``sum(occ)`` photons (unnormalized monomial basis).
    """
    cdef Py_ssize_t T = block.shape[0]
    cdef Py_ssize_t n_total = offsets[offsets.shape[0] - 1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] buf = np.zeros(n_total, dtype=np.complex128)
    cdef double complex[::1] cur = buf
    cdef Py_ssize_t j, r, k, idx, s = 0
    cdef double complex c, u
    cur[0] = 1.0
    for j in range(T):
        for r in range(occ[j]):
            for idx in range(offsets[s], offsets[s + 1]):
                c = cur[idx]
                if c == 0:
                    continue
                for k in range(T):
                    u = block[k, j]
                    if u != 0:
                        cur[succ[idx, k]] += c * u
            s += 1
    return buf[offsets[s]:offsets[s + 1]]
