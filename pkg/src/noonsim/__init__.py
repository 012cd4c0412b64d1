"""Exact Fock-space simulation of post-selected multiphoton interferometry."""

__version__ = "0.1.0"

from .fock import (
    ConfigurationError,
    CreationMonomial,
    EmptySectorError,
    Ket,
    ModeId,
    ModeRegistry,
    Pol,
    apply_monomial,
    inner_product,
    normalize,
)
from .lift import BACKEND
from .optics import (
    ModeTransform,
    apply_transform,
    beamsplitter,
    pbs,
    phase_shift,
    polarization_rotation,
)
from .source import EmissionConfig, NoonSpec, PhaseConfig, emit, noon_state, phase_from_mirror
from .measurement import (
    DetectionSpec,
    VisibilityModel,
    detection_probability,
    find_pure_projections,
    pattern_distribution,
    postselect_counts,
)
