"""Declarative experiments: JSON config, phase sweeps, shot noise, CSV I/O.

Config documents (``version: 1``) look like::

    {
      "version": 1,
      "source": {"type": "spdc", "pair_amplitude": 0.01, "max_pairs": 2, "sector": 2},
      "circuit": [
        {"type": "pbs", "in1": "a1", "in2": "b1", "out1": "a3", "out2": "b3"},
        {"type": "pbs", "in1": "a2", "in2": "b2", "out1": "a4", "out2": "b4"}
      ],
      "detection": {"counts": {"a3": 1, "a4": 1, "b3": 1, "b4": 1},
                    "analyzed": ["a3", "a4", "b3", "b4"], "patterns": ["+-++"]},
      "sweep": {"start_nm": 0, "stop_nm": 400, "steps": 161},
      "sampling": {"shots": 10000},
      "visibility": 1.0,
      "seed": 0
    }

Sweep bounds are pump-mirror displacements; every output axis is the
optical path, twice the displacement.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .fock import ConfigurationError, Ket, ModeId, ModeRegistry
from .measurement import (
    DIAGONAL,
    DetectionSpec,
    State,
    VisibilityModel,
    detection_probability,
    pattern_distribution,
)
from .optics import (
    ModeTransform,
    apply_transform,
    beamsplitter,
    pbs,
    phase_shift,
    polarization_rotation,
    spatial_beamsplitter,
)
from .source import (
    DEFAULT_WAVELENGTH_NM,
    SPDC_LABELS,
    EmissionConfig,
    NoonSpec,
    PhaseConfig,
    emit_by_origin,
    noon_state,
    phase_from_mirror,
    single_photon,
)

SCHEMA_VERSION = 1
REP_RATE_HZ = 76e6


class SeriesFormatError(ValueError):
    """Malformed fringe-series CSV."""


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _require(mapping: dict, key: str, where: str):
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{where}: expected an object")
    if key not in mapping:
        raise ConfigurationError(f"{where}.{key}: required key missing")
    return mapping[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _complex(value, where: str) -> complex:
    if value in ("i", "1j"):
        return 1j
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_number(value[0], where), _number(value[1], where))
    return complex(_number(value, where))


@dataclass(frozen=True)
class Element:
    """One circuit element; ``build(registry, dphi)`` returns its transform."""

    kind: str
    params: dict
    sweep_dependent: bool = False

    def build(self, registry: ModeRegistry, dphi: float) -> ModeTransform:
        p = self.params
        if self.kind == "pbs":
            return pbs(registry, p["in1"], p["in2"], p["out1"], p["out2"],
                       _complex(p.get("reflection_phase", 1.0), "circuit.pbs.reflection_phase"))
        if self.kind == "bs":
            m1, m2 = p["modes"]
            r = float(p.get("reflectivity", 0.5))
            if m1 in registry:
                return beamsplitter(registry, m1, m2, r)
            return spatial_beamsplitter(registry, m1, m2, r)
        if self.kind == "phase":
            phi = float(p.get("phi", 0.0)) + float(p.get("sweep_multiple", 0.0)) * dphi
            return phase_shift(registry, p["modes"], phi)
        if self.kind == "rotation":
            return polarization_rotation(registry, p["spatial"], float(p["theta"]))
        raise ConfigurationError(f"circuit: unknown element type {self.kind!r}")


_ELEMENT_KEYS = {
    "pbs": ("in1", "in2", "out1", "out2"),
    "bs": ("modes",),
    "phase": ("modes",),
    "rotation": ("spatial", "theta"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict
    source: dict
    circuit: tuple[Element, ...]
    counts: dict[str, int]
    analyzed: tuple[str, ...]
    theta: float
    patterns: tuple[str, ...]
    normalization: str
    sweep_start_nm: float
    sweep_stop_nm: float
    sweep_steps: int
    shots: int | None
    visibility: float
    seed: int
    lambda_single_nm: float
    rates: dict = field(default_factory=dict)

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("config: top level must be an object")
        raw = copy.deepcopy(raw)
        version = _require(raw, "version", "config")
        if version != SCHEMA_VERSION:
            raise ConfigurationError(f"config.version: unsupported schema version {version!r}")

        source = _require(raw, "source", "config")
        kind = _require(source, "type", "source")
        if kind == "spdc":
            emission = EmissionConfig(
                pair_amplitude=_number(source.get("pair_amplitude", 0.01), "source.pair_amplitude"),
                max_pairs=int(source.get("max_pairs", 2)),
            )
            sector = int(source.get("sector", emission.max_pairs))
            if not 1 <= sector <= emission.max_pairs:
                raise ConfigurationError(f"source.sector: must lie in 1..max_pairs, got {sector}")
        elif kind == "noon":
            if int(_require(source, "n_photons", "source")) < 1:
                raise ConfigurationError("source.n_photons: must be >= 1")
            for key in ("mode_a", "mode_b"):
                ModeId.parse(source.get(key, "a1_H"))
        elif kind == "single_photon_mz":
            ModeId.parse(source.get("mode", "a1_H"))
        else:
            raise ConfigurationError(f"source.type: unknown source {kind!r}")

        circuit_raw = _require(raw, "circuit", "config")
        if not isinstance(circuit_raw, list):
            raise ConfigurationError("config.circuit: expected a list of elements")
        circuit = []
        for i, el in enumerate(circuit_raw):
            where = f"circuit[{i}]"
            etype = _require(el, "type", where)
            if etype not in _ELEMENT_KEYS:
                raise ConfigurationError(f"{where}.type: unknown element {etype!r}")
            for key in _ELEMENT_KEYS[etype]:
                _require(el, key, where)
            if etype == "bs" and len(el["modes"]) != 2:
                raise ConfigurationError(f"{where}.modes: a beamsplitter needs exactly two modes")
            params = {k: v for k, v in el.items() if k != "type"}
            circuit.append(Element(etype, params, bool(el.get("sweep_multiple", 0))))

        detection = _require(raw, "detection", "config")
        counts = _require(detection, "counts", "detection")
        if not isinstance(counts, dict) or not counts:
            raise ConfigurationError("detection.counts: expected a non-empty object")
        counts = {str(k): int(v) for k, v in counts.items()}
        if any(v < 0 for v in counts.values()):
            raise ConfigurationError("detection.counts: counts must be non-negative")
        analyzed = tuple(detection.get("analyzed", ()))
        for label in analyzed:
            if counts.get(label, 0) < 1:
                raise ConfigurationError(f"detection.analyzed: {label!r} needs a count >= 1")
        patterns = tuple(detection.get("patterns", ("+" * len(analyzed),) if analyzed else ("",)))
        for pat in patterns:
            if len(pat) != len(analyzed) or set(pat) - {"+", "-"}:
                raise ConfigurationError(f"detection.patterns: {pat!r} does not fit analyzed labels {list(analyzed)}")

        sweep = _require(raw, "sweep", "config")
        start = _number(_require(sweep, "start_nm", "sweep"), "sweep.start_nm")
        stop = _number(_require(sweep, "stop_nm", "sweep"), "sweep.stop_nm")
        steps = _require(sweep, "steps", "sweep")
        if not isinstance(steps, int) or steps < 2:
            raise ConfigurationError(f"sweep.steps: must be an integer >= 2, got {steps!r}")
        if not stop > start:
            raise ConfigurationError("sweep.stop_nm: must exceed sweep.start_nm")

        sampling = raw.get("sampling")
        shots = None
        if sampling is not None:
            shots = _require(sampling, "shots", "sampling")
            if not isinstance(shots, int) or shots <= 0:
                raise ConfigurationError(f"sampling.shots: must be a positive integer, got {shots!r}")

        visibility = _number(raw.get("visibility", 1.0), "config.visibility")
        VisibilityModel(visibility)

        if detection.get("normalization", "coincidence") not in ("coincidence", "total"):
            raise ConfigurationError("detection.normalization: must be 'coincidence' or 'total'")

        cfg = cls(
            raw=raw, source=dict(source), circuit=tuple(circuit), counts=counts,
            analyzed=analyzed, theta=_number(detection.get("theta", DIAGONAL), "detection.theta"),
            patterns=patterns, normalization=str(detection.get("normalization", "coincidence")),
            sweep_start_nm=start, sweep_stop_nm=stop, sweep_steps=steps,
            shots=shots, visibility=visibility, seed=int(raw.get("seed", 0)),
            lambda_single_nm=_number(raw.get("lambda_single_nm", DEFAULT_WAVELENGTH_NM), "config.lambda_single_nm"),
            rates=dict(raw.get("rates") or {}),
        )
        cfg._check_modes()
        return cfg

    def with_overrides(self, *, patterns=None, shots=None, seed=None) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        if patterns is not None:
            raw["detection"]["patterns"] = list(patterns)
        if shots is not None:
            raw["sampling"] = {"shots": shots}
        if seed is not None:
            raw["seed"] = seed
        return ExperimentConfig.from_dict(raw)

    def registry(self) -> ModeRegistry:
        labels = list(SPDC_LABELS)
        extra = list(self.counts)
        for el in self.circuit:
            p = el.params
            extra += [p[k] for k in ("in1", "in2", "out1", "out2", "spatial") if k in p]
            extra += [ModeId.parse(m).spatial if "_" in str(m) else m for m in p.get("modes", ())]
        for key in ("mode_a", "mode_b", "mode"):
            if key in self.source:
                extra.append(ModeId.parse(self.source[key]).spatial)
        reg = ModeRegistry()
        reg.register_spatial(*dict.fromkeys(labels + [str(x) for x in extra]))
        return reg

    def _check_modes(self) -> None:
        reg = self.registry()
        try:
            for i, el in enumerate(self.circuit):
                el.build(reg, 0.0)
        except ConfigurationError as exc:
            raise ConfigurationError(f"circuit[{i}]: {exc}") from None

    def sweep_positions(self) -> np.ndarray:
        return np.linspace(self.sweep_start_nm, self.sweep_stop_nm, self.sweep_steps)

    def source_state(self, registry: ModeRegistry, dphi: float) -> State:
        src = self.source
        kind = src["type"]
        if kind == "spdc":
            emission = EmissionConfig(float(src.get("pair_amplitude", 0.01)), int(src.get("max_pairs", 2)))
            sector = int(src.get("sector", emission.max_pairs))
            phase = PhaseConfig.from_phase(dphi, self.lambda_single_nm)
            return emit_by_origin(registry, emission, phase, sectors=(sector,))
        if kind == "noon":
            spec = NoonSpec(int(src["n_photons"]), ModeId.parse(src.get("mode_a", "a1_H")),
                            ModeId.parse(src.get("mode_b", "b1_H")), dphi)
            ket = noon_state(registry, spec)
            # tag the two arms so a visibility below 1 can dephase them
            a_idx = registry.index(spec.mode_a)
            return {
                "a": Ket(registry, {o: v for o, v in ket.items() if o[a_idx]}),
                "b": Ket(registry, {o: v for o, v in ket.items() if not o[a_idx]}),
            }
        return single_photon(registry, ModeId.parse(src.get("mode", "a1_H")))

    def detection_specs(self) -> dict[str, DetectionSpec]:
        return {pat: DetectionSpec.from_pattern(self.counts, self.analyzed, pat, self.theta, self.normalization)
                for pat in self.patterns}


@dataclass(frozen=True)
class FringeSeries:
    optical_path_nm: tuple[float, ...]
    probability: tuple[float, ...]
    counts: tuple[int, ...] | None = None
    metadata: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        x = tuple(float(v) for v in self.optical_path_nm)
        p = tuple(float(v) for v in self.probability)
        if len(x) != len(p):
            raise ValueError("optical path and probability columns differ in length")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ValueError("optical path must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in p):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "optical_path_nm", x)
        object.__setattr__(self, "probability", p)
        if self.counts is not None:
            c = tuple(int(v) for v in self.counts)
            if len(c) != len(x) or any(v < 0 for v in c):
                raise ValueError("counts must be non-negative integers, one per point")
            object.__setattr__(self, "counts", c)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.optical_path_nm)

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.probability)

    @property
    def pattern(self) -> str:
        return self.metadata.get("pattern", "")

    def __len__(self) -> int:
        return len(self.optical_path_nm)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NOON_SIM_THREADS", "1")))
    except ValueError:
        return 1


def _point_probabilities(cfg: ExperimentConfig, registry: ModeRegistry,
                         static: list[ModeTransform | None], dphi: float) -> dict[str, float]:
    state = cfg.source_state(registry, dphi)
    parts = {"": state} if isinstance(state, Ket) else dict(state)
    for el, t in zip(cfg.circuit, static):
        t = t or el.build(registry, dphi)
        parts = {tag: apply_transform(k, t) for tag, k in parts.items()}
    vis = VisibilityModel(cfg.visibility)
    if cfg.analyzed and len(cfg.patterns) > 1 and cfg.normalization == "coincidence":
        dist = pattern_distribution(parts, cfg.counts, cfg.analyzed, cfg.theta, vis)
        return {pat: dist[pat] for pat in cfg.patterns}
    return {pat: detection_probability(parts, spec, vis) for pat, spec in cfg.detection_specs().items()}


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> list[FringeSeries]:
    """Evaluate the configured detection patterns at every sweep position.

    Returns one noiseless series per pattern; points are independent and
    may be evaluated on ``workers`` threads (default ``NOON_SIM_THREADS``).
    """
    registry = cfg.registry()
    static = [None if el.sweep_dependent else el.build(registry, 0.0) for el in cfg.circuit]
    dx = cfg.sweep_positions()
    dphis = [phase_from_mirror(float(v), cfg.lambda_single_nm) for v in dx]
    task: Callable[[float], dict] = lambda d: _point_probabilities(cfg, registry, static, d)  # noqa: E731
    workers = workers or _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, dphis))
    else:
        results = [task(d) for d in dphis]
    xs = tuple(float(v) for v in 2.0 * dx)
    out = []
    for pat in cfg.patterns:
        probs = tuple(min(1.0, max(0.0, r[pat])) for r in results)
        out.append(FringeSeries(xs, probs, None, {"config_hash": cfg.hash, "pattern": pat}))
    return out


def sample_counts(series: FringeSeries, shots: int, seed: int) -> FringeSeries:
    """Poisson counts with mean ``shots * probability`` (NumPy PCG64 generator)."""
    if not isinstance(shots, (int, np.integer)) or shots <= 0:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.poisson(shots * series.y)
    meta = dict(series.metadata, shots=int(shots), seed=int(seed))
    return replace(series, counts=tuple(int(c) for c in counts), metadata=meta)


def series_to_csv(series: FringeSeries) -> str:
    buf = io.StringIO()
    for key in sorted(series.metadata):
        buf.write(f"# {key}={series.metadata[key]}\n")
    has_counts = series.counts is not None
    buf.write("optical_path_nm,probability" + (",counts" if has_counts else "") + "\n")
    for i, (x, p) in enumerate(zip(series.optical_path_nm, series.probability)):
        row = f"{x:.17g},{p:.17g}"
        if has_counts:
            row += f",{series.counts[i]}"
        buf.write(row + "\n")
    return buf.getvalue()


def write_series(series: FringeSeries, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.write_text(series_to_csv(series))
    return path


def _meta_value(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def parse_series(text: str) -> FringeSeries:
    meta: dict[str, Any] = {}
    header = None
    xs, ps, cs = [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = _meta_value(value.strip())
            continue
        row = next(csv.reader([line]))
        if header is None:
            if row not in (["optical_path_nm", "probability"], ["optical_path_nm", "probability", "counts"]):
                raise SeriesFormatError(f"line {lineno}: unexpected header {line!r}")
            header = row
            continue
        if len(row) != len(header):
            raise SeriesFormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            xs.append(float(row[0]))
            ps.append(float(row[1]))
            if len(header) == 3:
                cs.append(int(row[2]))
        except ValueError:
            raise SeriesFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
    if header is None:
        raise SeriesFormatError("line 1: missing header row")
    try:
        return FringeSeries(tuple(xs), tuple(ps), tuple(cs) if len(header) == 3 else None, meta)
    except ValueError as exc:
        raise SeriesFormatError(f"invalid series: {exc}") from None


def read_series(path: str | os.PathLike) -> FringeSeries:
    return parse_series(Path(path).read_text())


def summarize(series: FringeSeries, cfg: ExperimentConfig | None = None) -> dict:
    """Small JSON-ready report: pattern, probability range, point count, rates."""
    y = series.y
    out = {
        "pattern": series.pattern,
        "points": len(series),
        "min_probability": float(y.min()) if len(y) else None,
        "max_probability": float(y.max()) if len(y) else None,
        "config_hash": series.metadata.get("config_hash"),
    }
    if series.counts is not None:
        out["total_counts"] = int(sum(series.counts))
    if cfg is not None and cfg.source["type"] == "spdc" and cfg.rates.get("efficiency") is not None:
        # illustrative only: rep_rate * p^k * eta^(2k) * P
        k = int(cfg.source.get("sector", cfg.source.get("max_pairs", 2)))
        p = float(cfg.source.get("pair_amplitude", 0.01))
        eta = float(cfg.rates["efficiency"])
        rep = float(cfg.rates.get("rep_rate_hz", REP_RATE_HZ))
        out["expected_rate_hz_at_max"] = rep * p ** k * eta ** (2 * k) * out["max_probability"]
    return out


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return ExperimentConfig.from_dict(raw)


def run_experiment(cfg: ExperimentConfig) -> list[FringeSeries]:
    """Sweep plus optional sampling (seeded per pattern index)."""
    series = run_sweep(cfg)
    if cfg.shots:
        series = [sample_counts(s, cfg.shots, cfg.seed + i) for i, s in enumerate(series)]
    return series

