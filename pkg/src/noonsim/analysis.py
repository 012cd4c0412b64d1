"""Fringe wavelength and visibility extraction.

The fit model is ``A + B cos(k x + phi0)`` with x the optical path in nm.
For fixed k the model is linear in ``(A, B cos phi0, -B sin phi0)``, so k
is located by a scan of the separable residual, polished by golden-section
search and a final Gauss-Newton pass over all four parameters.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .experiment import FringeSeries

SCAN_HALF_WIDTH = 0.30
SCAN_POINTS = 2001
FLAT_TOL = 1e-9


class NoOscillationError(ValueError):
    """Series carries no oscillating component."""


class FitError(RuntimeError):
    """Cosine fit did not converge inside its scan bracket."""


def _data(series: FringeSeries) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = series.x
    if series.counts is not None:
        y = np.asarray(series.counts, dtype=float)
        sigma = np.sqrt(y + 1.0)
    else:
        y = series.y
        sigma = np.ones_like(y)
    return x, y, sigma


def _spacing(x: np.ndarray) -> float:
    steps = np.diff(x)
    dx = float(np.mean(steps))
    if not np.allclose(steps, dx, rtol=1e-6, atol=0):
        raise ValueError("series must be uniformly spaced")
    return dx


def spectrum(series: FringeSeries) -> tuple[np.ndarray, np.ndarray]:
    """``(periods_nm, amplitudes)`` of the mean-subtracted series, zero bin dropped."""
    x, y, _ = _data(series)
    if len(x) < 8:
        raise ValueError(f"need at least 8 points, got {len(x)}")
    dx = _spacing(x)
    amps = np.abs(np.fft.rfft(y - y.mean())) * 2 / len(y)
    bins = np.arange(len(amps))
    return len(y) * dx / bins[1:], amps[1:]


def dominant_period(series: FringeSeries) -> float:
    """Period (nm) of the strongest nonzero-frequency DFT bin; ties go low."""
    periods, amps = spectrum(series)
    _, y, _ = _data(series)
    scale = max(float(np.max(np.abs(y))), np.finfo(float).tiny)
    top = float(np.max(amps))
    if top <= FLAT_TOL * scale:
        raise NoOscillationError("no oscillation: series is constant")
    first = int(np.flatnonzero(amps >= top * (1 - 1e-12))[0])
    return float(periods[first])


def harmonic_content(series: FringeSeries, base_period_nm: float,
                     harmonics: Sequence[int] = (1, 2, 3, 4)) -> dict[int, float]:
    """Amplitudes of ``cos(n 2 pi x / base)`` terms by a joint linear fit.

    Exact for noiseless multi-harmonic series even when the sweep does not
    span an integer number of periods.
    """
    x, y, sigma = _data(series)
    cols = [np.ones_like(x)]
    for n in harmonics:
        w = 2 * math.pi * n / base_period_nm
        cols += [np.cos(w * x), np.sin(w * x)]
    X = np.column_stack(cols) / sigma[:, None]
    beta, *_ = np.linalg.lstsq(X, y / sigma, rcond=None)
    return {n: float(math.hypot(beta[1 + 2 * i], beta[2 + 2 * i])) for i, n in enumerate(harmonics)}


@dataclass(frozen=True)
class FitResult:
    offset: float
    amplitude: float
    k: float
    phase: float
    wavelength: float
    visibility: float
    residual_rms: float
    uncertainties: dict = field(default_factory=dict)
    k_identifiable: bool = True
    n_points: int = 0
    scan_bounds: tuple[float, float] | None = None

    @property
    def wavelength_sigma(self) -> float:
        return self.uncertainties.get("wavelength", float("nan"))

    def model(self, x) -> np.ndarray:
        return self.offset + self.amplitude * np.cos(self.k * np.asarray(x, dtype=float) + self.phase)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scan_bounds"] = list(self.scan_bounds) if self.scan_bounds else None
        return d

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    def to_text(self) -> str:
        u = self.uncertainties
        rows = [
            ("offset A", self.offset, u.get("offset")),
            ("amplitude B", self.amplitude, u.get("amplitude")),
            ("wavenumber k [rad/nm]", self.k, u.get("k")),
            ("phase phi0 [rad]", self.phase, u.get("phase")),
            ("wavelength [nm]", self.wavelength, u.get("wavelength")),
            ("visibility", self.visibility, u.get("visibility")),
            ("residual rms", self.residual_rms, None),
        ]
        lines = []
        for name, value, err in rows:
            err_txt = f" +/- {err:.4g}" if err is not None and math.isfinite(err) else ""
            lines.append(f"{name:<24}{value:.10g}{err_txt}")
        if not self.k_identifiable:
            lines.append("wavenumber unidentifiable: series carries no oscillation")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _linear_solve(k, x, y, w):
    X = np.column_stack([np.ones_like(x), np.cos(k * x), np.sin(k * x)]) * w[:, None]
    beta, *_ = np.linalg.lstsq(X, y * w, rcond=None)
    r = y * w - X @ beta
    return beta, float(r @ r)


def _scan(ks, x, y, w):
    """Separable residual for every k in ``ks`` (batched normal equations)."""
    phase = np.outer(ks, x)
    X = np.stack([np.broadcast_to(w, phase.shape), np.cos(phase) * w, np.sin(phase) * w], axis=-1)
    gram = np.einsum("kni,knj->kij", X, X)
    rhs = np.einsum("kni,n->ki", X, y * w)
    beta = np.linalg.solve(gram, rhs[..., None])[..., 0]
    resid = y * w - np.einsum("kni,ki->kn", X, beta)
    return np.einsum("kn,kn->k", resid, resid)


def _gauss_newton(params, x, y, w, max_iter=30):
    """Polish ``(A, c, s, k)`` of ``A + c cos kx + s sin kx`` by damped Gauss-Newton."""
    def resid(p):
        A, c, s, k = p
        return (y - (A + c * np.cos(k * x) + s * np.sin(k * x))) * w

    p = np.array(params, dtype=float)
    cost = float(resid(p) @ resid(p))
    for _ in range(max_iter):
        A, c, s, k = p
        ckx, skx = np.cos(k * x), np.sin(k * x)
        J = np.column_stack([np.ones_like(x), ckx, skx, x * (-c * skx + s * ckx)]) * w[:, None]
        step, *_ = np.linalg.lstsq(J, resid(p), rcond=None)
        for damping in (1.0, 0.5, 0.25, 0.125):
            trial = p + damping * step
            new_cost = float(resid(trial) @ resid(trial))
            if new_cost <= cost:
                break
        else:
            break
        done = np.all(np.abs(damping * step) <= 1e-15 * np.maximum(np.abs(p), 1e-300))
        p, cost = trial, new_cost
        if done:
            break
    return p, cost


def fit_cosine(series: FringeSeries, initial_k: float | None = None,
               lambda_hint: float | None = None) -> FitResult:
    """Least-squares fit of ``A + B cos(k x + phi0)`` to a fringe series.

    The wavenumber is scanned over +/-30 % of the initializer (from
    ``initial_k``, ``lambda_hint`` in nm, or the dominant DFT period).
    Counts, when present, are fitted with sigma = sqrt(count + 1).
    """
    x, y, sigma = _data(series)
    w = 1.0 / sigma
    n = len(x)
    if n < 5:
        raise ValueError(f"need at least 5 points to fit, got {n}")
    if initial_k is None and lambda_hint is not None:
        initial_k = 2 * math.pi / lambda_hint

    scale = max(float(np.max(np.abs(y))), np.finfo(float).tiny)
    flat = float(np.ptp(y)) <= FLAT_TOL * scale
    if initial_k is None and not flat:
        try:
            initial_k = 2 * math.pi / dominant_period(series)
        except NoOscillationError:
            flat = True
    if flat:
        return _unidentified(x, y, w, initial_k)

    lo, hi = (1 - SCAN_HALF_WIDTH) * initial_k, (1 + SCAN_HALF_WIDTH) * initial_k
    ks = np.linspace(lo, hi, SCAN_POINTS)
    ssr = _scan(ks, x, y, w)
    i = int(np.argmin(ssr))
    if i in (0, len(ks) - 1):
        raise FitError(f"residual minimum sits on the scan edge; k scanned over [{lo:.6g}, {hi:.6g}] rad/nm")
    k_best = optimize.golden(lambda k: _linear_solve(k, x, y, w)[1],
                             brack=(ks[i - 1], ks[i], ks[i + 1]), tol=1e-12)
    beta, _ = _linear_solve(k_best, x, y, w)
    p, cost = _gauss_newton([beta[0], beta[1], beta[2], k_best], x, y, w)
    A, c, s, k = p
    if not lo <= k <= hi:
        raise FitError(f"refinement left the scan bracket [{lo:.6g}, {hi:.6g}] rad/nm")

    B = math.hypot(c, s)
    phi0 = math.atan2(-s, c)
    span = float(x[-1] - x[0])
    if span * k / (2 * math.pi) < 2:
        warnings.warn("fit covers fewer than two full periods", stacklevel=2)
    if B <= FLAT_TOL * scale:
        return _unidentified(x, y, w, initial_k)

    model = A + B * np.cos(k * x + phi0)
    rms = float(np.sqrt(np.mean((y - model) ** 2)))
    unc = _uncertainties(x, w, A, B, k, phi0, cost, n)
    return FitResult(
        offset=float(A), amplitude=float(B), k=float(k), phase=float(phi0),
        wavelength=2 * math.pi / float(k), visibility=float(B / A) if A > 0 else float("nan"),
        residual_rms=rms, uncertainties=unc, k_identifiable=True, n_points=n,
        scan_bounds=(float(lo), float(hi)),
    )


def _uncertainties(x, w, A, B, k, phi0, cost, n) -> dict:
    arg = k * x + phi0
    J = np.column_stack([np.ones_like(x), np.cos(arg), -B * x * np.sin(arg), -B * np.sin(arg)]) * w[:, None]
    dof = max(n - 4, 1)
    try:
        cov = np.linalg.inv(J.T @ J) * (cost / dof)
    except np.linalg.LinAlgError:
        cov = np.full((4, 4), np.nan)
    sA, sB, sk, sp = np.sqrt(np.abs(np.diag(cov)))
    vis_var = (sB / A) ** 2 + (B * sA / A ** 2) ** 2 - 2 * B / A ** 3 * cov[0, 1] if A else float("nan")
    return {
        "offset": float(sA), "amplitude": float(sB), "k": float(sk), "phase": float(sp),
        "wavelength": float(2 * math.pi * sk / k ** 2),
        "visibility": float(math.sqrt(max(vis_var, 0.0))),
    }


def _unidentified(x, y, w, initial_k) -> FitResult:
    A = float(np.sum(y * w ** 2) / np.sum(w ** 2))
    k = float(initial_k) if initial_k else float("nan")
    rms = float(np.sqrt(np.mean((y - A) ** 2)))
    return FitResult(
        offset=A, amplitude=0.0, k=k, phase=0.0,
        wavelength=2 * math.pi / k if initial_k else float("nan"),
        visibility=0.0, residual_rms=rms, k_identifiable=False, n_points=len(x),
    )


@dataclass(frozen=True)
class DeBroglieRow:
    n_photons: int
    wavelength: float
    wavelength_sigma: float
    ratio: float
    ratio_sigma: float
    deviation: float

    @property
    def consistent(self) -> bool | None:
        """Whether the ratio matches N within one propagated sigma (None if unknown)."""
        if not math.isfinite(self.ratio_sigma):
            return None
        return abs(self.deviation) <= self.ratio_sigma


@dataclass(frozen=True)
class DeBroglieReport:
    reference_wavelength: float
    rows: tuple[DeBroglieRow, ...]

    def to_dict(self) -> dict:
        return {
            "reference_wavelength_nm": self.reference_wavelength,
            "rows": [dict(asdict(r), consistent=r.consistent) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    def to_text(self) -> str:
        head = f"{'N':>3}  {'lambda_eff [nm]':>18}  {'lambda(1)/lambda(N)':>20}  {'deviation':>10}  consistent"
        lines = [head]
        for r in self.rows:
            lam = f"{r.wavelength:.6g}"
            if math.isfinite(r.wavelength_sigma):
                lam += f" +/- {r.wavelength_sigma:.2g}"
            ratio = f"{r.ratio:.6g}"
            if math.isfinite(r.ratio_sigma):
                ratio += f" +/- {r.ratio_sigma:.2g}"
            flag = {True: "yes", False: "no", None: "-"}[r.consistent]
            lines.append(f"{r.n_photons:>3}  {lam:>18}  {ratio:>20}  {r.deviation:>+10.4g}  {flag}")
        return "\n".join(lines)


def _as_measurement(entry) -> tuple[float, float]:
    if isinstance(entry, FitResult):
        return entry.wavelength, entry.wavelength_sigma
    if isinstance(entry, (tuple, list)):
        lam, sig = entry
        return float(lam), float(sig)
    return float(entry), float("nan")


def debroglie_report(fits: Iterable[tuple[int, object]]) -> DeBroglieReport:
    """Tabulate ``lambda(1)/lambda(N)`` against N.

    Entries are ``(N, FitResult)``, ``(N, (wavelength, sigma))`` or
    ``(N, wavelength)``.  Without an N=1 entry the single-photon wavelength
    is inferred from the smallest N as ``N * lambda(N)``.
    """
    entries = sorted(((int(n), *_as_measurement(f)) for n, f in fits), key=lambda e: e[0])
    if not entries:
        return DeBroglieReport(float("nan"), ())
    n0, lam0, sig0 = entries[0]
    ref, ref_sig = n0 * lam0, n0 * sig0
    rows = []
    for n, lam, sig in entries:
        ratio = ref / lam
        if n == n0:
            rsig = 0.0 if math.isfinite(sig0) else float("nan")
        else:
            rsig = ratio * math.hypot(ref_sig / ref, sig / lam)
        rows.append(DeBroglieRow(n, lam, sig, ratio, rsig, ratio - n))
    return DeBroglieReport(ref, tuple(rows))


def dump_columns(series: FringeSeries, fit: FitResult | None = None) -> str:
    """Whitespace-separated ``x y [model]`` columns for gnuplot and friends."""
    x, y, _ = _data(series)
    lines = ["# optical_path_nm value" + (" model" if fit else "")]
    model = fit.model(x) if fit else None
    for i in range(len(x)):
        row = f"{x[i]:.10g} {y[i]:.10g}"
        if model is not None:
            row += f" {model[i]:.10g}"
        lines.append(row)
    return "\n".join(lines) + "\n"
