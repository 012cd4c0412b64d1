"""Coincidence post-selection and polarization-resolved detection.

Probabilities are conditional on the post-selected coincidence sector,
which is what a coincidence counter measures.  States may be passed as a
single ``Ket`` or as a mapping from emission-origin tag (``"ff"``,
``"fb"``, ``"bb"``, ...) to ``Ket``; the latter lets a visibility below 1
wash out interference between different origins.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .fock import ConfigurationError, Ket
from .optics import ModeTransform, apply_transform, polarization_rotation

State = Union[Ket, Mapping[str, Ket]]

DIAGONAL = math.pi / 4
PURITY_TOL = 1e-9


@dataclass(frozen=True)
class Analyzer:
    theta: float = DIAGONAL
    sign: str = "+"

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise ConfigurationError(f"analyzer sign must be '+' or '-', got {self.sign!r}")


@dataclass(frozen=True)
class DetectionSpec:
    """Photon counts per spatial label and optional polarization analyzers.

    With ``normalization="coincidence"`` probabilities are conditional on
    the count pattern; ``"total"`` divides by the full state weight instead,
    as for a single-port rate behind an interferometer.
    """

    counts: Mapping[str, int]
    analyzers: Mapping[str, Analyzer] = field(default_factory=dict)
    normalization: str = "coincidence"

    def __post_init__(self):
        if self.normalization not in ("coincidence", "total"):
            raise ConfigurationError(f"normalization must be 'coincidence' or 'total', got {self.normalization!r}")
        for label, a in self.analyzers.items():
            if self.counts.get(label, 0) < 1:
                raise ConfigurationError(f"analyzed label {label!r} needs a photon count >= 1")
            if not isinstance(a, Analyzer):
                raise ConfigurationError(f"analyzer for {label!r} must be an Analyzer")

    @classmethod
    def from_pattern(cls, counts: Mapping[str, int], labels: Iterable[str], pattern: str,
                     theta: float = DIAGONAL, normalization: str = "coincidence") -> "DetectionSpec":
        """Spec with ``pattern[i]`` (``'+'``/``'-'``) analyzing ``labels[i]``."""
        labels = list(labels)
        if len(pattern) != len(labels):
            raise ConfigurationError(f"pattern {pattern!r} does not match analyzed labels {labels}")
        return cls(dict(counts), {lab: Analyzer(theta, s) for lab, s in zip(labels, pattern)}, normalization)


@dataclass(frozen=True)
class VisibilityModel:
    """Coherence between emission origins; 1 is perfect overlap."""

    V: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.V <= 1.0:
            raise ConfigurationError(f"visibility must lie in [0, 1], got {self.V}")


def _components(state: State) -> dict[str, Ket]:
    if isinstance(state, Ket):
        return {"": state}
    return dict(state)


def postselect_counts(ket: Ket, counts: Mapping[str, int]) -> Ket:
    """Keep terms whose H+V occupation matches ``counts`` on every listed label."""
    reg = ket.registry
    checks = [(reg.spatial_indices(label), int(n)) for label, n in counts.items()]
    kept = {occ: amp for occ, amp in ket.items()
            if all(occ[h] + occ[v] == n for (h, v), n in checks)}
    return Ket(reg, kept)


def _rotation(registry, thetas: Mapping[str, float]) -> ModeTransform | None:
    """One transform applying every analyzer rotation at once."""
    if not thetas:
        return None
    U = np.eye(len(registry), dtype=complex)
    touched = []
    for label, theta in thetas.items():
        if not registry.has_spatial(label):
            # delegate the error message
            polarization_rotation(registry, label, theta)
        idx = list(registry.spatial_indices(label))
        c, s = math.cos(theta), math.sin(theta)
        U[np.ix_(idx, idx)] = [[c, s], [-s, c]]
        touched += idx
    return ModeTransform(registry, U, tuple(touched))


def _rotate(ket: Ket, rotation: ModeTransform | None) -> Ket:
    return ket if rotation is None else apply_transform(ket, rotation)


def _select(ket: Ket, selection: Mapping[str, tuple[int, int]]) -> Ket:
    """Keep terms with exactly ``(n_H, n_V)`` on each listed label."""
    reg = ket.registry
    checks = [(reg.spatial_indices(label), hv) for label, hv in selection.items()]
    return Ket(reg, {occ: amp for occ, amp in ket.items()
                     if all((occ[h], occ[v]) == hv for (h, v), hv in checks)})


def _mixed_weight(parts: list[Ket], V: float) -> float:
    """``Tr(rho)`` for ``rho = V |sum psi_g><sum psi_g| + (1 - V) sum_g |psi_g><psi_g|``."""
    incoherent = sum(p.norm() ** 2 for p in parts)
    if V == 0.0 or len(parts) == 1:
        return incoherent
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return V * total.norm() ** 2 + (1.0 - V) * incoherent


def _outcome_selection(spec: DetectionSpec) -> dict[str, tuple[int, int]]:
    sel = {}
    for label, a in spec.analyzers.items():
        n = spec.counts[label]
        sel[label] = (n, 0) if a.sign == "+" else (0, n)
    return sel


def detection_probability(state: State, spec: DetectionSpec,
                          vis: VisibilityModel = VisibilityModel()) -> float:
    """Probability of the analyzer outcome, conditional on the count sector.

    Returns 0 when nothing survives the count post-selection.
    """
    components = list(_components(state).values())
    parts = [postselect_counts(k, spec.counts) for k in components]
    parts = [p for p in parts if not p.is_empty()]
    if not parts:
        return 0.0
    if spec.normalization == "total":
        sector = _mixed_weight(components, vis.V)
    else:
        sector = _mixed_weight(parts, vis.V)
    if sector <= 0.0:
        return 0.0
    rotation = _rotation(parts[0].registry, {label: a.theta for label, a in spec.analyzers.items()})
    selection = _outcome_selection(spec)
    hits = [_select(_rotate(p, rotation), selection) for p in parts]
    return _mixed_weight(hits, vis.V) / sector


def pattern_distribution(state: State, counts: Mapping[str, int], labels: Iterable[str],
                         theta: float = DIAGONAL,
                         vis: VisibilityModel = VisibilityModel()) -> dict[str, float]:
    """Probabilities of all ``2^m`` sign patterns on the analyzed labels.

    Pattern strings list signs in the order of ``labels``.
    """
    labels = list(labels)
    for label in labels:
        if counts.get(label, 0) < 1:
            raise ConfigurationError(f"analyzed label {label!r} needs a photon count >= 1")
    patterns = ["".join(p) for p in itertools.product("+-", repeat=len(labels))]
    parts = [postselect_counts(k, counts) for k in _components(state).values()]
    parts = [p for p in parts if not p.is_empty()]
    if not parts:
        return {p: 0.0 for p in patterns}
    sector = _mixed_weight(parts, vis.V)
    rotation = _rotation(parts[0].registry, {label: theta for label in labels})
    rotated = [_rotate(p, rotation) for p in parts]
    out = {}
    for pattern in patterns:
        selection = {lab: ((counts[lab], 0) if s == "+" else (0, counts[lab]))
                     for lab, s in zip(labels, pattern)}
        out[pattern] = _mixed_weight([_select(r, selection) for r in rotated], vis.V) / sector
    return out


def harmonic_amplitudes(values: np.ndarray) -> np.ndarray:
    """Cosine amplitudes ``c_n`` of samples over one uniform ``[0, 2 pi)`` period.

    ``values ~ c_0 + sum_n c_n cos(n x + phi_n)``; index n is the harmonic.
    """
    values = np.asarray(values, dtype=float)
    spec = np.fft.rfft(values) / len(values)
    amps = 2 * np.abs(spec)
    amps[0] = abs(spec[0].real)
    if len(values) % 2 == 0:
        amps[-1] /= 2
    return amps


def default_phase_grid(n: int = 64) -> np.ndarray:
    return np.arange(n) * (2 * math.pi / n)


def find_pure_projections(state_at: Callable[[float], State], counts: Mapping[str, int],
                          labels: Iterable[str], harmonic: int,
                          phase_grid: np.ndarray | None = None,
                          theta: float = DIAGONAL) -> list[str]:
    """Sign patterns whose fringe contains only the requested harmonic.

    ``state_at(dphi)`` builds the state for a single-photon phase;
    ``phase_grid`` must sample one full period uniformly (end excluded).
    All other harmonics must stay below ``1e-9`` of the wanted one.
    """
    labels = list(labels)
    grid = default_phase_grid() if phase_grid is None else np.asarray(phase_grid, dtype=float)
    if harmonic < 1 or harmonic >= len(grid) // 2:
        raise ConfigurationError(f"harmonic {harmonic} is not resolvable on a {len(grid)}-point grid")
    curves: dict[str, list[float]] = {}
    for dphi in grid:
        dist = pattern_distribution(state_at(float(dphi)), counts, labels, theta)
        for pattern, p in dist.items():
            curves.setdefault(pattern, []).append(p)
    pure = []
    for pattern, values in curves.items():
        amps = harmonic_amplitudes(np.array(values))
        wanted = amps[harmonic]
        others = np.delete(amps[1:], harmonic - 1)
        if wanted > PURITY_TOL and np.max(others, initial=0.0) < PURITY_TOL * wanted:
            pure.append(pattern)
    return pure


def sign_parity(pattern: str) -> int:
    return -1 if pattern.count("-") % 2 else 1

