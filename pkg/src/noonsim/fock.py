"""Sparse multi-mode bosonic states and creation-operator algebra.

A state is stored as a mapping from occupation tuples (one entry per
registered mode, in registration order) to complex amplitudes.  Only a
handful of photons ever populate the sixteen or so modes of an
interferometer, so a sparse map is far cheaper than a dense tensor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

#: amplitudes below this magnitude are dropped after every operation
PRUNE_TOL = 1e-14


class ConfigurationError(ValueError):
    """Raised when modes, elements or experiment settings are inconsistent."""


class EmptySectorError(ValueError):
    """Raised when a post-selected sector has no weight left to normalize."""


class Pol(str, enum.Enum):
    H = "H"
    V = "V"


class ModeId(NamedTuple):
    spatial: str
    pol: Pol

    def __str__(self) -> str:
        return f"{self.spatial}_{self.pol.value}"

    @classmethod
    def parse(cls, text: str | "ModeId") -> "ModeId":
        """Accept ``ModeId`` instances or strings like ``"a1_H"``."""
        if isinstance(text, ModeId):
            return text
        try:
            spatial, pol = str(text).rsplit("_", 1)
            return cls(spatial, Pol(pol))
        except ValueError:
            raise ConfigurationError(f"cannot parse mode id {text!r}") from None


class ModeRegistry:
    """Append-only assignment of dense indices to modes.

    Kets built against a registry remain valid when more modes are
    registered later; their occupation tuples are zero-padded on use.
    """

    def __init__(self, modes: Iterable[ModeId] = ()):
        self._modes: list[ModeId] = []
        self._index: dict[ModeId, int] = {}
        for m in modes:
            self.register(m)

    def register(self, mode: ModeId | str) -> int:
        mode = ModeId.parse(mode)
        if mode not in self._index:
            self._index[mode] = len(self._modes)
            self._modes.append(mode)
        return self._index[mode]

    def register_spatial(self, *labels: str) -> None:
        """Register both polarization modes of each spatial label."""
        for label in labels:
            self.register(ModeId(label, Pol.H))
            self.register(ModeId(label, Pol.V))

    def index(self, mode: ModeId | str) -> int:
        mode = ModeId.parse(mode)
        try:
            return self._index[mode]
        except KeyError:
            raise ConfigurationError(f"mode {mode} is not registered") from None

    def has_spatial(self, label: str) -> bool:
        return ModeId(label, Pol.H) in self._index and ModeId(label, Pol.V) in self._index

    def spatial_indices(self, label: str) -> tuple[int, int]:
        """Dense indices of the (H, V) modes of a spatial label."""
        return self.index(ModeId(label, Pol.H)), self.index(ModeId(label, Pol.V))

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(self._modes)

    def __len__(self) -> int:
        return len(self._modes)

    def __contains__(self, mode) -> bool:
        try:
            return ModeId.parse(mode) in self._index
        except ConfigurationError:
            return False

    def __repr__(self) -> str:
        return f"ModeRegistry({', '.join(map(str, self._modes))})"


FockBasisState = tuple  # occupation numbers, one per registered mode


def _pad(occ: tuple, width: int) -> tuple:
    if len(occ) == width:
        return occ
    return occ + (0,) * (width - len(occ))


def _pruned(terms: Mapping[tuple, complex]) -> dict[tuple, complex]:
    return {k: complex(v) for k, v in terms.items() if abs(v) >= PRUNE_TOL}


@dataclass(frozen=True)
class Ket:
    """Sparse superposition of Fock basis states.

    Treat instances as immutable; every operation returns a new ket.
    """

    registry: ModeRegistry
    terms: Mapping[tuple, complex] = field(default_factory=dict)

    def __post_init__(self):
        width = len(self.registry)
        terms = {}
        for occ, amp in self.terms.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) > width or min(occ, default=0) < 0:
                raise ConfigurationError(f"invalid occupation vector {occ}")
            occ = _pad(occ, width)
            terms[occ] = terms.get(occ, 0j) + complex(amp)
        object.__setattr__(self, "terms", _pruned(terms))

    @classmethod
    def vacuum(cls, registry: ModeRegistry) -> "Ket":
        return cls(registry, {(0,) * len(registry): 1.0})

    @classmethod
    def basis(cls, registry: ModeRegistry, occupied: Mapping, amplitude: complex = 1.0) -> "Ket":
        """Single basis state from a ``{mode: count}`` mapping."""
        occ = [0] * len(registry)
        for mode, n in occupied.items():
            occ[registry.index(mode)] += int(n)
        return cls(registry, {tuple(occ): amplitude})

    @classmethod
    def empty(cls, registry: ModeRegistry) -> "Ket":
        return cls(registry, {})

    def items(self) -> Iterator[tuple[tuple, complex]]:
        width = len(self.registry)
        for occ, amp in self.terms.items():
            yield _pad(occ, width), amp

    def amplitude(self, occ: Iterable[int]) -> complex:
        occ = _pad(tuple(occ), len(self.registry))
        return dict(self.items()).get(occ, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self.terms}

    def sector(self, n_photons: int) -> "Ket":
        """Terms with exactly ``n_photons`` photons in total."""
        return Ket(self.registry, {k: v for k, v in self.terms.items() if sum(k) == n_photons})

    def is_empty(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def _check(self, other: "Ket") -> None:
        if other.registry is not self.registry:
            raise ConfigurationError("kets belong to different mode registries")

    def __add__(self, other: "Ket") -> "Ket":
        self._check(other)
        width = len(self.registry)
        out = dict(self.items())
        for occ, amp in other.items():
            out[occ] = out.get(occ, 0j) + amp
        return Ket(self.registry, {_pad(k, width): v for k, v in out.items()})

    def __sub__(self, other: "Ket") -> "Ket":
        return self + (-1) * other

    def __mul__(self, scalar: complex) -> "Ket":
        return Ket(self.registry, {k: scalar * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "Ket":
        return -1 * self

    def to_text(self) -> str:
        """Debug serialization, one ``"re im : n_1 ... n_M"`` line per term."""
        lines = []
        for occ, amp in sorted(self.items()):
            lines.append(f"{amp.real:.17g} {amp.imag:.17g} : {' '.join(map(str, occ))}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, registry: ModeRegistry, text: str) -> "Ket":
        terms = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                amp_part, occ_part = line.split(":")
                re_, im_ = amp_part.split()
                occ = tuple(int(n) for n in occ_part.split())
            except ValueError:
                raise ValueError(f"line {lineno}: malformed ket term {line!r}") from None
            terms[occ] = complex(float(re_), float(im_))
        return cls(registry, terms)

    def __repr__(self) -> str:
        body = ", ".join(f"{amp:.4g}|{','.join(map(str, occ))}>" for occ, amp in sorted(self.items()))
        return f"Ket({body or '0'})"


@dataclass(frozen=True)
class CreationMonomial:
    """``coefficient * prod_m (a_m^dagger)^{p_m}``."""

    powers: Mapping[ModeId, int]
    coefficient: complex = 1.0

    def __post_init__(self):
        powers = {}
        for mode, p in self.powers.items():
            if int(p) < 1:
                raise ConfigurationError(f"exponent for {mode} must be >= 1, got {p}")
            mode = ModeId.parse(mode)
            powers[mode] = powers.get(mode, 0) + int(p)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def degree(self) -> int:
        return sum(self.powers.values())

    def __mul__(self, other):
        if isinstance(other, CreationMonomial):
            powers = dict(self.powers)
            for mode, p in other.powers.items():
                powers[mode] = powers.get(mode, 0) + p
            return CreationMonomial(powers, self.coefficient * other.coefficient)
        return CreationMonomial(self.powers, self.coefficient * other)

    __rmul__ = __mul__


def apply_monomial(ket: Ket, m: CreationMonomial) -> Ket:
    """Act with a product of creation operators on every term of ``ket``."""
    reg = ket.registry
    shifts = [(reg.index(mode), p) for mode, p in m.powers.items()]
    out: dict[tuple, complex] = {}
    for occ, amp in ket.items():
        new = list(occ)
        factor = m.coefficient * amp
        for i, p in shifts:
            n = new[i]
            # a^dagger^p |n> = sqrt((n+1)...(n+p)) |n+p>
            factor *= math.sqrt(math.prod(range(n + 1, n + p + 1)))
            new[i] = n + p
        key = tuple(new)
        out[key] = out.get(key, 0j) + factor
    return Ket(reg, out)


def apply_polynomial(ket: Ket, monomials: Iterable[CreationMonomial]) -> Ket:
    """Linear action of a sum of creation monomials."""
    result = Ket.empty(ket.registry)
    for m in monomials:
        result = result + apply_monomial(ket, m)
    return result


def inner_product(x: Ket, y: Ket) -> complex:
    """``<x|y>``, conjugate-linear in ``x``."""
    x._check(y)
    width = len(x.registry)
    ys = dict(y.items())
    if len(x.terms) > len(ys):
        xs = dict(x.items())
        return sum((xs[k].conjugate() * v for k, v in ys.items() if k in xs), 0j)
    return sum((a.conjugate() * ys[_pad(k, width)] for k, a in x.terms.items() if _pad(k, width) in ys), 0j)


def normalize(ket: Ket) -> Ket:
    nrm = ket.norm()
    if nrm <= PRUNE_TOL:
        raise EmptySectorError("cannot normalize an empty (post-selected) state")
    return ket * (1.0 / nrm)


def to_dense(ket: Ket, basis: list[tuple]) -> np.ndarray:
    """Amplitude vector of ``ket`` over an explicit list of basis states."""
    lookup = dict(ket.items())
    width = len(ket.registry)
    return np.array([lookup.get(_pad(tuple(b), width), 0j) for b in basis], dtype=complex)
