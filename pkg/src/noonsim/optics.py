"""Linear optical elements as mode unitaries and their action on kets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .fock import ConfigurationError, Ket, ModeId, ModeRegistry, Pol
from .lift import composition_rows, expand_term

UNITARY_TOL = 1e-12


def _components(sub: np.ndarray) -> list[list[int]]:
    """Connected groups of modes coupled by nonzero matrix entries."""
    n = sub.shape[0]
    coupled = (np.abs(sub) > 0) | (np.abs(sub.T) > 0)
    seen = [False] * n
    groups = []
    for start in range(n):
        if seen[start]:
            continue
        stack, group = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            group.append(i)
            for j in np.flatnonzero(coupled[i]):
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        groups.append(sorted(group))
    return groups


@dataclass(frozen=True)
class ModeTransform:
    """Unitary ``U`` acting as ``a_j^dagger -> sum_k U[k, j] a_k^dagger``.

    ``matrix`` spans every registered mode at construction time; modes
    outside ``touched`` must be left alone.
    """

    registry: ModeRegistry
    matrix: np.ndarray
    touched: tuple[int, ...] = field(default=())

    def __post_init__(self):
        U = np.array(self.matrix, dtype=complex)
        n = len(self.registry)
        if U.shape != (n, n):
            raise ConfigurationError(f"matrix shape {U.shape} does not match {n} registered modes")
        eye = np.eye(n)
        moved = np.flatnonzero(np.any(np.abs(U - eye) > 0, axis=0) | np.any(np.abs(U - eye) > 0, axis=1))
        touched = tuple(sorted(set(self.touched) | set(int(i) for i in moved)))
        block = U[np.ix_(touched, touched)]
        err = np.max(np.abs(block.conj().T @ block - np.eye(len(touched))), initial=0.0)
        if err > UNITARY_TOL:
            raise ConfigurationError(f"transform is not unitary (max |U^dagger U - I| = {err:.3g})")
        U.setflags(write=False)
        object.__setattr__(self, "matrix", U)
        object.__setattr__(self, "touched", touched)
        groups = [[touched[i] for i in g] for g in _components(block)]
        # identity sub-blocks need no expansion
        groups = [g for g in groups if not np.array_equal(U[np.ix_(g, g)], np.eye(len(g)))]
        object.__setattr__(self, "_groups", tuple(tuple(g) for g in groups))

    @classmethod
    def identity(cls, registry: ModeRegistry) -> "ModeTransform":
        return cls(registry, np.eye(len(registry)))

    @classmethod
    def from_block(cls, registry: ModeRegistry, indices, block) -> "ModeTransform":
        U = np.eye(len(registry), dtype=complex)
        U[np.ix_(indices, indices)] = block
        return cls(registry, U, tuple(indices))

    def _resized(self, n: int) -> np.ndarray:
        m = self.matrix.shape[0]
        if m == n:
            return self.matrix
        U = np.eye(n, dtype=complex)
        U[:m, :m] = self.matrix
        return U

    def __matmul__(self, other: "ModeTransform") -> "ModeTransform":
        """``(self @ other)`` applies ``other`` first."""
        if other.registry is not self.registry:
            raise ConfigurationError("transforms belong to different mode registries")
        n = len(self.registry)
        return ModeTransform(self.registry, self._resized(n) @ other._resized(n), self.touched + other.touched)

    def __repr__(self) -> str:
        names = [str(self.registry.modes[i]) for i in self.touched]
        return f"ModeTransform(touched=[{', '.join(names)}])"


def beamsplitter(registry: ModeRegistry, m1, m2, reflectivity: float) -> ModeTransform:
    """Beamsplitter with ``i`` on reflection: ``[[sqrt(T), i sqrt(R)], [i sqrt(R), sqrt(T)]]``."""
    if not 0.0 <= reflectivity <= 1.0:
        raise ConfigurationError(f"reflectivity must lie in [0, 1], got {reflectivity}")
    i1, i2 = registry.index(m1), registry.index(m2)
    if i1 == i2:
        raise ConfigurationError("beamsplitter needs two distinct modes")
    t, r = math.sqrt(1.0 - reflectivity), math.sqrt(reflectivity)
    return ModeTransform.from_block(registry, [i1, i2], [[t, 1j * r], [1j * r, t]])


def spatial_beamsplitter(registry: ModeRegistry, s1: str, s2: str, reflectivity: float) -> ModeTransform:
    """Polarization-independent beamsplitter between two spatial labels."""
    h = beamsplitter(registry, ModeId(s1, Pol.H), ModeId(s2, Pol.H), reflectivity)
    v = beamsplitter(registry, ModeId(s1, Pol.V), ModeId(s2, Pol.V), reflectivity)
    return v @ h


def pbs(registry: ModeRegistry, in1: str, in2: str, out1: str, out2: str,
        reflection_phase: complex = 1.0) -> ModeTransform:
    """Polarizing beamsplitter: transmits H, reflects V.

    ``in1_H -> out1_H``, ``in2_H -> out2_H``, ``in1_V -> out2_V``,
    ``in2_V -> out1_V``; reflected photons pick up ``reflection_phase``.
    """
    labels = (in1, in2, out1, out2)
    if len(set(labels)) != 4:
        raise ConfigurationError(f"pbs needs four distinct spatial labels, got {labels}")
    for label in labels:
        if not registry.has_spatial(label):
            raise ConfigurationError(f"pbs: spatial label {label!r} lacks registered H and V modes")
    if not math.isclose(abs(reflection_phase), 1.0, abs_tol=1e-15):
        raise ConfigurationError("reflection phase must have unit modulus")
    idx = lambda s, p: registry.index(ModeId(s, p))  # noqa: E731
    U = np.eye(len(registry), dtype=complex)
    routes = [
        (idx(in1, Pol.H), idx(out1, Pol.H), 1.0),
        (idx(in2, Pol.H), idx(out2, Pol.H), 1.0),
        (idx(in1, Pol.V), idx(out2, Pol.V), reflection_phase),
        (idx(in2, Pol.V), idx(out1, Pol.V), reflection_phase),
    ]
    for src, dst, _ in routes:
        U[src, src] = U[dst, dst] = 0.0
    # each route is a phased swap; ports on the output side feed back to the inputs
    for src, dst, amp in routes:
        U[dst, src] = U[src, dst] = amp
    return ModeTransform(registry, U)


def phase_shift(registry: ModeRegistry, modes: Iterable, phi: float) -> ModeTransform:
    """Diagonal ``exp(i phi)`` on the listed modes (ModeIds or spatial labels)."""
    indices = []
    for m in modes:
        if isinstance(m, str) and registry.has_spatial(m) and m not in registry:
            indices.extend(registry.spatial_indices(m))
        else:
            indices.append(registry.index(m))
    indices = sorted(set(indices))
    return ModeTransform.from_block(registry, indices, np.exp(1j * phi) * np.eye(len(indices)))


def polarization_rotation(registry: ModeRegistry, spatial: str, theta: float) -> ModeTransform:
    """Rotation ``[[cos, sin], [-sin, cos]]`` on the (H, V) pair of one label.

    At ``theta = pi/4`` this sends ``H -> (H - V)/sqrt(2)``; selecting H
    afterwards projects onto ``|+>`` and selecting V onto ``|->``.
    """
    if not registry.has_spatial(spatial):
        raise ConfigurationError(f"spatial label {spatial!r} lacks registered H and V modes")
    c, s = math.cos(theta), math.sin(theta)
    return ModeTransform.from_block(registry, list(registry.spatial_indices(spatial)), [[c, s], [-s, c]])


def apply_transform(ket: Ket, t: ModeTransform) -> Ket:
    """Lift a mode unitary to Fock space and apply it to ``ket``.

    Every coupled group of modes is expanded independently; expansions
    are memoized on the group's input occupation within one call.
    """
    if t.registry is not ket.registry:
        raise ConfigurationError("transform and ket belong to different mode registries")
    n = len(ket.registry)
    U = t._resized(n)
    terms = dict(ket.items())
    for group in t._groups:
        block = U[np.ix_(group, group)]
        cache: dict[tuple, tuple] = {}
        out: dict[tuple, complex] = {}
        # images of all terms sharing the untouched occupation and the local
        # photon number land on the same pattern list: sum them densely
        dense: dict[tuple, np.ndarray] = {}
        for occ, amp in terms.items():
            local = tuple(occ[i] for i in group)
            if not any(local):
                out[occ] = out.get(occ, 0j) + amp
                continue
            if local not in cache:
                cache[local] = expand_term(block, local)
            rest = list(occ)
            for i in group:
                rest[i] = 0
            key = (tuple(rest), sum(local))
            acc = dense.get(key)
            if acc is None:
                dense[key] = amp * cache[local][1]
            else:
                acc += amp * cache[local][1]
        for (rest, n_local), acc in dense.items():
            patterns = composition_rows(n_local, len(group))
            base = list(rest)
            for idx in np.flatnonzero(acc).tolist():
                for i, m in zip(group, patterns[idx]):
                    base[i] = m
                k = tuple(base)
                out[k] = out.get(k, 0j) + complex(acc[idx])
        terms = out
    return Ket(ket.registry, terms)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
