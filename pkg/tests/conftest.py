import math

import numpy as np
import pytest

from noonsim.fock import Ket, ModeRegistry
from noonsim.optics import apply_transform, pbs
from noonsim.source import EmissionConfig, PhaseConfig, emit_by_origin, spdc_registry

FOURFOLD = {"a3": 1, "a4": 1, "b3": 1, "b4": 1}
TWOFOLD = {"a3": 1, "a4": 1}
OUTPUTS = ["a3", "a4", "b3", "b4"]


def through_pbs(state, registry, reflection_phase=1.0):
    p1 = pbs(registry, "a1", "b1", "a3", "b3", reflection_phase)
    p2 = pbs(registry, "a2", "b2", "a4", "b4", reflection_phase)
    return {tag: apply_transform(apply_transform(k, p1), p2) for tag, k in state.items()}


def spdc_after_pbs(registry, dphi, sector, reflection_phase=1.0, p=0.01):
    cfg = EmissionConfig(pair_amplitude=p, max_pairs=max(2, sector))
    state = emit_by_origin(registry, cfg, PhaseConfig.from_phase(dphi), sectors=(sector,))
    return through_pbs(state, registry, reflection_phase)


def merged(state):
    kets = list(state.values())
    total = kets[0]
    for k in kets[1:]:
        total = total + k
    return total


@pytest.fixture
def reg():
    return spdc_registry()


@pytest.fixture
def small_reg():
    r = ModeRegistry()
    r.register_spatial("a", "b", "c")
    return r


def random_ket(registry, rng, n_photons, n_terms, modes=None):
    modes = list(range(len(registry))) if modes is None else list(modes)
    terms = {}
    for _ in range(n_terms):
        occ = [0] * len(registry)
        for _ in range(n_photons):
            occ[modes[rng.integers(len(modes))]] += 1
        terms[tuple(occ)] = complex(rng.standard_normal(), rng.standard_normal())
    ket = Ket(registry, terms)
    return ket * (1 / ket.norm())


def sweep_phases(n=161):
    # optical path 0..800 nm at 790 nm single-photon wavelength
    return 2 * math.pi * np.linspace(0, 800, n) / 790


def occ(registry, modes):
    """Occupation tuple for a ``{mode: count}`` mapping."""
    return next(iter(Ket.basis(registry, modes).terms))


# acceptance bookkeeping: one line per criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
SUITE_BUDGET_S = 60.0
_T0 = [0.0]


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_sessionstart(session):
    import time
    _T0[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _T0[0]
    terminalreporter.section("acceptance")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        if n == 8:
            ok = ok and elapsed < SUITE_BUDGET_S
            detail = f"{detail}; suite runtime {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)"
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_sessionfinish(session, exitstatus):
    import time
    if ACCEPTANCE and time.perf_counter() - _T0[0] >= SUITE_BUDGET_S:
        session.exitstatus = 1
