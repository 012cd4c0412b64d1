"""Embedded experiment configs reproducing the one/two/four-photon fringe figures."""

from __future__ import annotations

import copy

PBS_PAIR = [
    {"type": "pbs", "in1": "a1", "in2": "b1", "out1": "a3", "out2": "b3"},
    {"type": "pbs", "in1": "a2", "in2": "b2", "out1": "a4", "out2": "b4"},
]
FOURFOLD = {"a3": 1, "a4": 1, "b3": 1, "b4": 1}
TWOFOLD = {"a3": 1, "a4": 1}

# two full single-photon fringes at 5 nm optical-path resolution
LONG_SWEEP = {"start_nm": 0.0, "stop_nm": 800.0, "steps": 321}
DEFAULT_SWEEP = {"start_nm": 0.0, "stop_nm": 400.0, "steps": 161}


def _base(source, circuit, counts, analyzed, patterns, sweep):
    return {
        "version": 1,
        "source": source,
        "circuit": circuit,
        "detection": {"counts": counts, "analyzed": analyzed, "patterns": patterns},
        "sweep": dict(sweep),
        "visibility": 1.0,
        "seed": 0,
    }


def single_photon_mz(sweep=LONG_SWEEP) -> dict:
    circuit = [
        {"type": "bs", "modes": ["a1", "b1"], "reflectivity": 0.5},
        {"type": "phase", "modes": ["b1"], "sweep_multiple": 1},
        {"type": "bs", "modes": ["a1", "b1"], "reflectivity": 0.5},
    ]
    cfg = _base({"type": "single_photon_mz", "mode": "a1_H"}, circuit, {"b1": 1}, [], [""], sweep)
    cfg["detection"]["normalization"] = "total"
    return cfg


def two_photon(patterns=("+-",), sweep=LONG_SWEEP) -> dict:
    src = {"type": "spdc", "pair_amplitude": 0.01, "max_pairs": 2, "sector": 1}
    return _base(src, copy.deepcopy(PBS_PAIR), dict(TWOFOLD), ["a3", "a4"], list(patterns), sweep)


def four_photon(patterns=("+-++",), sweep=LONG_SWEEP) -> dict:
    src = {"type": "spdc", "pair_amplitude": 0.01, "max_pairs": 2, "sector": 2}
    return _base(src, copy.deepcopy(PBS_PAIR), dict(FOURFOLD), ["a3", "a4", "b3", "b4"], list(patterns), sweep)


def figure_configs(figure: str) -> dict[str, tuple[int, dict]]:
    """``{stem: (N, config)}`` for ``"fig3"`` (pure fringes) or ``"fig4"`` (impure)."""
    if figure == "fig3":
        return {
            "fig3_n1": (1, single_photon_mz()),
            "fig3_n2": (2, two_photon(("+-",))),
            "fig3_n4": (4, four_photon(("+-++",))),
        }
    if figure == "fig4":
        return {
            "fig4_twofold": (2, two_photon(("++",), DEFAULT_SWEEP)),
            "fig4_fourfold": (4, four_photon(("++++",), DEFAULT_SWEEP)),
        }
    raise KeyError(figure)


FIGURES = ("fig3", "fig4")
