"""Double-pass SPDC emission and ideal NOON states.

The pump crosses the crystal twice.  Pairs born on the forward pass go
into spatial modes (a1, a2); pairs born on the way back, after the pump
mirror, go into (b1, b2) and carry the mirror phase twice, once per
photon.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .fock import (
    ConfigurationError,
    CreationMonomial,
    Ket,
    ModeId,
    ModeRegistry,
    Pol,
    apply_polynomial,
    inner_product,
)

DEFAULT_WAVELENGTH_NM = 790.0
SPDC_LABELS = ("a1", "a2", "b1", "b2", "a3", "a4", "b3", "b4")


def phase_from_mirror(dx_nm: float, wavelength_nm: float = DEFAULT_WAVELENGTH_NM) -> float:
    """Single-photon phase for a pump-mirror displacement.

    The back-reflection doubles the path change: ``2 pi (2 dx) / lambda``.
    """
    return 2.0 * math.pi * (2.0 * dx_nm) / wavelength_nm


@dataclass(frozen=True)
class PhaseConfig:
    mirror_displacement_nm: float = 0.0
    lambda_single_nm: float = DEFAULT_WAVELENGTH_NM

    @classmethod
    def from_phase(cls, dphi: float, lambda_single_nm: float = DEFAULT_WAVELENGTH_NM) -> "PhaseConfig":
        return cls(dphi * lambda_single_nm / (4.0 * math.pi), lambda_single_nm)

    @property
    def optical_path_nm(self) -> float:
        return 2.0 * self.mirror_displacement_nm

    @property
    def dphi(self) -> float:
        return phase_from_mirror(self.mirror_displacement_nm, self.lambda_single_nm)


@dataclass(frozen=True)
class EmissionConfig:
    pair_amplitude: float = 0.01
    max_pairs: int = 2
    forward_modes: tuple[str, str] = ("a1", "a2")
    backward_modes: tuple[str, str] = ("b1", "b2")

    def __post_init__(self):
        if not 0.0 < self.pair_amplitude < 1.0:
            raise ConfigurationError(f"pair_amplitude must lie in (0, 1), got {self.pair_amplitude}")
        if not 1 <= self.max_pairs <= 3:
            raise ConfigurationError(f"max_pairs must be 1, 2 or 3, got {self.max_pairs}")


@dataclass(frozen=True)
class NoonSpec:
    n_photons: int
    mode_a: ModeId | str = ModeId("a1", Pol.H)
    mode_b: ModeId | str = ModeId("b1", Pol.H)
    dphi: float = 0.0

    def __post_init__(self):
        if self.n_photons < 1:
            raise ConfigurationError(f"NOON photon number must be >= 1, got {self.n_photons}")


def spdc_registry(extra: tuple[str, ...] = ()) -> ModeRegistry:
    """Registry holding H and V modes for the eight labels of the double-pass setup."""
    reg = ModeRegistry()
    reg.register_spatial(*SPDC_LABELS, *extra)
    return reg


def pair_operator(registry: ModeRegistry, cfg: EmissionConfig, direction: str,
                  phase: PhaseConfig) -> list[CreationMonomial]:
    """Phi+ pair creation operator for one pass through the crystal.

    ``(a_H a_H + a_V a_V) / sqrt 2`` on the chosen mode pair, times
    ``exp(2i dphi)`` for the backward pass.
    """
    if direction == "forward":
        m1, m2 = cfg.forward_modes
        coeff = 1 / math.sqrt(2)
    elif direction == "backward":
        m1, m2 = cfg.backward_modes
        coeff = cmath.exp(2j * phase.dphi) / math.sqrt(2)
    else:
        raise ConfigurationError(f"direction must be 'forward' or 'backward', got {direction!r}")
    for label in (m1, m2):
        if not registry.has_spatial(label):
            raise ConfigurationError(f"pair mode {label!r} is not registered with H and V")
    return [
        CreationMonomial({ModeId(m1, pol): 1, ModeId(m2, pol): 1}, coeff)
        for pol in (Pol.H, Pol.V)
    ]


def _apply_power(ket: Ket, op: list[CreationMonomial], power: int) -> Ket:
    for _ in range(power):
        ket = apply_polynomial(ket, op)
    return ket


def emit_by_origin(registry: ModeRegistry, cfg: EmissionConfig, phase: PhaseConfig,
                   sectors: tuple[int, ...] | None = None) -> dict[str, Ket]:
    """Emission series split by which pass produced each pair.

    ``K^k / k! = sum_j S_f^j S_b^(k-j) / (j! (k-j)!)`` since the forward
    and backward pair operators commute; the key is ``"f" * j + "b" * (k-j)``
    (empty string for vacuum).  Each component carries ``sqrt(p)^k``.
    """
    s_f = pair_operator(registry, cfg, "forward", phase)
    s_b = pair_operator(registry, cfg, "backward", phase)
    wanted = range(cfg.max_pairs + 1) if sectors is None else sectors
    vac = Ket.vacuum(registry)
    out: dict[str, Ket] = {}
    for k in wanted:
        if k > cfg.max_pairs:
            raise ConfigurationError(f"sector k={k} lies beyond max_pairs={cfg.max_pairs}")
        for j in range(k, -1, -1):
            weight = math.sqrt(cfg.pair_amplitude) ** k / (math.factorial(j) * math.factorial(k - j))
            ket = _apply_power(_apply_power(vac, s_b, k - j), s_f, j)
            out["f" * j + "b" * (k - j)] = weight * ket
    return out


def emit(registry: ModeRegistry, cfg: EmissionConfig, phase: PhaseConfig,
         sectors: tuple[int, ...] | None = None) -> Ket:
    """Truncated ``sum_k sqrt(p)^k K^k / k! |vac>`` with ``K = S_f + S_b`` (unnormalized)."""
    total = Ket.empty(registry)
    for ket in emit_by_origin(registry, cfg, phase, sectors).values():
        total = total + ket
    return total


def path_number_form(ket: Ket, cfg: EmissionConfig, n_pairs: int) -> dict[tuple[int, int], complex]:
    """Coefficients of ``ket`` in the basis ``S_f^j S_b0^(k-j) |vac>``.

    ``S_b0`` is the backward pair operator without the mirror phase.  Keys
    are ``(photons forward, photons backward)``; values are normalized so
    the all-forward coefficient is 1, e.g. ``{(4,0): 1, (2,2): 2 e^{2i dphi},
    (0,4): e^{4i dphi}}`` for two pairs.
    """
    registry = ket.registry
    s_f = pair_operator(registry, cfg, "forward", PhaseConfig())
    s_b0 = pair_operator(registry, cfg, "backward", PhaseConfig())
    vac = Ket.vacuum(registry)
    coeffs = {}
    for j in range(n_pairs, -1, -1):
        ref = _apply_power(_apply_power(vac, s_b0, n_pairs - j), s_f, j)
        coeffs[(2 * j, 2 * (n_pairs - j))] = inner_product(ref, ket) / inner_product(ref, ref)
    lead = coeffs[(2 * n_pairs, 0)]
    if abs(lead) == 0:
        raise ConfigurationError("state has no all-forward component to normalize against")
    return {key: c / lead for key, c in coeffs.items()}


def noon_state(registry: ModeRegistry, spec: NoonSpec) -> Ket:
    """``(|N,0> + exp(i N dphi) |0,N>) / sqrt 2`` across two modes."""
    n = spec.n_photons
    a = Ket.basis(registry, {spec.mode_a: n})
    b = Ket.basis(registry, {spec.mode_b: n}, cmath.exp(1j * n * spec.dphi))
    return (a + b) * (1 / math.sqrt(2))


def single_photon(registry: ModeRegistry, mode: ModeId | str = ModeId("a1", Pol.H)) -> Ket:
    return Ket.basis(registry, {mode: 1})
