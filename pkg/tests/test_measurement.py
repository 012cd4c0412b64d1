import cmath
import itertools
import math

import numpy as np
import pytest

from noonsim.fock import ConfigurationError, CreationMonomial, Ket, apply_monomial
from noonsim.measurement import (
    Analyzer,
    DetectionSpec,
    VisibilityModel,
    default_phase_grid,
    detection_probability,
    find_pure_projections,
    harmonic_amplitudes,
    pattern_distribution,
    postselect_counts,
    sign_parity,
)
from noonsim.optics import apply_transform, phase_shift, spatial_beamsplitter
from noonsim.source import NoonSpec, noon_state

from conftest import FOURFOLD, OUTPUTS, TWOFOLD, merged, occ, spdc_after_pbs, through_pbs

ODD = sorted(p for p in ("".join(s) for s in itertools.product("+-", repeat=4)) if sign_parity(p) == -1)


def test_detection_spec_validation():
    with pytest.raises(ConfigurationError):
        DetectionSpec({"a3": 0}, {"a3": Analyzer()})
    with pytest.raises(ConfigurationError):
        Analyzer(sign="x")
    with pytest.raises(ConfigurationError):
        VisibilityModel(1.5)


def test_postselection_keeps_four_one_per_mode_terms(reg):
    sel = postselect_counts(merged(spdc_after_pbs(reg, 0.4, 2)), FOURFOLD)
    assert len(sel) == 4
    assert postselect_counts(Ket.vacuum(reg), {"a3": 1}).is_empty()


def test_forward_double_pair_alone_misses_fourfold(reg):
    x = CreationMonomial({"a1_H": 1, "a2_H": 1})
    k = apply_monomial(apply_monomial(Ket.vacuum(reg), x), x)
    out = through_pbs({"": k}, reg)[""]
    assert postselect_counts(out, FOURFOLD).is_empty()


def test_two_photon_fringe(reg):
    for dphi in np.linspace(0, 2 * math.pi, 13):
        state = spdc_after_pbs(reg, dphi, 1)
        spec = DetectionSpec.from_pattern(TWOFOLD, ["a3", "a4"], "+-")
        assert detection_probability(state, spec) == pytest.approx((1 - math.cos(2 * dphi)) / 4, abs=1e-12)


def test_four_photon_fringes(reg):
    for dphi in np.linspace(0, 2 * math.pi, 17):
        state = spdc_after_pbs(reg, dphi, 2)
        odd = detection_probability(state, DetectionSpec.from_pattern(FOURFOLD, OUTPUTS, "+-++"))
        even = detection_probability(state, DetectionSpec.from_pattern(FOURFOLD, OUTPUTS, "++++"))
        assert odd == pytest.approx((1 - math.cos(4 * dphi)) / 32, abs=1e-12)
        assert even == pytest.approx((1 + math.cos(2 * dphi)) ** 2 / 16, abs=1e-12)
        assert even == pytest.approx((1.5 + 2 * math.cos(2 * dphi) + 0.5 * math.cos(4 * dphi)) / 16, abs=1e-12)


def test_single_photon_mach_zehnder(reg):
    bs = spatial_beamsplitter(reg, "a1", "b1", 0.5)
    for dphi in (0.0, 0.5, 2.0):
        k = apply_transform(Ket.basis(reg, {"a1_H": 1}), bs)
        k = apply_transform(apply_transform(k, phase_shift(reg, ["b1"], dphi)), bs)
        pa = detection_probability(k, DetectionSpec({"a1": 1}, normalization="total"))
        pb = detection_probability(k, DetectionSpec({"b1": 1}, normalization="total"))
        assert pa == pytest.approx((1 - math.cos(dphi)) / 2, abs=1e-12)
        assert pb == pytest.approx((1 + math.cos(dphi)) / 2, abs=1e-12)


def test_noon_one_through_output_beamsplitter(reg):
    # the i on reflection moves the fringe origin by a quarter period
    bs = spatial_beamsplitter(reg, "a1", "b1", 0.5)
    for dphi in (0.0, 0.5, 2.0):
        out = apply_transform(noon_state(reg, NoonSpec(1, dphi=dphi)), bs)
        pa = detection_probability(out, DetectionSpec({"a1": 1}, normalization="total"))
        assert pa == pytest.approx((1 - math.sin(dphi)) / 2, abs=1e-12)


def test_coincidence_normalization_conditions_on_counts(reg):
    out = apply_transform(noon_state(reg, NoonSpec(1, dphi=0.3)), spatial_beamsplitter(reg, "a1", "b1", 0.5))
    assert detection_probability(out, DetectionSpec({"a1": 1})) == pytest.approx(1.0)


def test_pattern_distribution_values(reg):
    d0 = pattern_distribution(spdc_after_pbs(reg, 0.0, 2), FOURFOLD, OUTPUTS)
    assert d0["++++"] == pytest.approx(0.25, abs=1e-14)
    assert d0["+-++"] == pytest.approx(0.0, abs=1e-14)
    d = pattern_distribution(spdc_after_pbs(reg, math.pi / 4, 2), FOURFOLD, OUTPUTS)
    for p in ODD:
        assert d[p] == pytest.approx(1 / 16, abs=1e-14)
    assert sum(d.values()) == pytest.approx(1, abs=1e-12)


def test_completeness_on_random_states(reg):
    rng = np.random.default_rng(4)
    for _ in range(5):
        dphi = rng.uniform(0, 2 * math.pi)
        for sector, counts, labels in ((1, TWOFOLD, ["a3", "a4"]), (2, FOURFOLD, OUTPUTS)):
            d = pattern_distribution(spdc_after_pbs(reg, dphi, sector), counts, labels,
                                     theta=rng.uniform(0, math.pi))
            assert sum(d.values()) == pytest.approx(1, abs=1e-12)


def test_parity_law_and_hom_erasure(reg):
    for dphi in (0.3, 1.9):
        state = spdc_after_pbs(reg, dphi, 2)
        d = pattern_distribution(state, FOURFOLD, OUTPUTS)
        for p in ODD:
            assert d[p] == pytest.approx((1 - math.cos(4 * dphi)) / 32, abs=1e-12)
            # the one-pair-each-side component alone contributes nothing
            fb_only = {"fb": state["fb"]}
            sel = DetectionSpec.from_pattern(FOURFOLD, OUTPUTS, p)
            assert detection_probability(fb_only, sel) == pytest.approx(0.0, abs=1e-14)


def test_visibility_endpoints(reg):
    spec = DetectionSpec.from_pattern(FOURFOLD, OUTPUTS, "+-++")
    vals0 = [detection_probability(spdc_after_pbs(reg, d, 2), spec, VisibilityModel(0.0)) for d in np.linspace(0, 3, 9)]
    assert np.ptp(vals0) < 1e-14
    for d in (0.2, 1.3):
        state = spdc_after_pbs(reg, d, 2)
        assert detection_probability(state, spec, VisibilityModel(1.0)) == pytest.approx(
            detection_probability(merged(state), spec), abs=1e-15)
    # an intermediate visibility scales the fringe contrast
    half = [detection_probability(spdc_after_pbs(reg, d, 2), spec, VisibilityModel(0.5)) for d in (0.0, math.pi / 4)]
    assert half[1] - half[0] == pytest.approx(0.5 / 16, abs=1e-12)


def test_independent_of_pair_amplitude(reg):
    spec = DetectionSpec.from_pattern(FOURFOLD, OUTPUTS, "++++")
    base = detection_probability(spdc_after_pbs(reg, 0.8, 2), spec)
    assert detection_probability(spdc_after_pbs(reg, 0.8, 2, p=0.001), spec) == pytest.approx(base, abs=1e-14)


def test_pbs_reflection_phase_shifts_fringe_origin(reg):
    """Phase i per reflection: odd patterns unchanged, others move by dphi -> dphi + pi/2.

    HHVV and VVHH see two reflections, HHHH none and VVVV four, so the
    one-pair-each-side terms flip sign relative to the double-pair terms.
    """
    for dphi in (0.2, 0.8, 2.1):
        for sector, counts, labels in ((1, TWOFOLD, ["a3", "a4"]), (2, FOURFOLD, OUTPUTS)):
            real = pattern_distribution(spdc_after_pbs(reg, dphi, sector), counts, labels)
            imag = pattern_distribution(spdc_after_pbs(reg, dphi, sector, reflection_phase=1j), counts, labels)
            shifted = pattern_distribution(spdc_after_pbs(reg, dphi + math.pi / 2, sector), counts, labels)
            for pat in real:
                assert imag[pat] == pytest.approx(shifted[pat], abs=1e-13)
                if sector == 2 and sign_parity(pat) == -1:
                    assert imag[pat] == pytest.approx(real[pat], abs=1e-13)


def test_harmonic_amplitudes():
    x = default_phase_grid(32)
    amps = harmonic_amplitudes(1.5 + 2 * np.cos(2 * x) + 0.5 * np.cos(4 * x + 1))
    assert amps[0] == pytest.approx(1.5)
    assert amps[2] == pytest.approx(2)
    assert amps[4] == pytest.approx(0.5)
    assert np.max(np.delete(amps, [0, 2, 4])) < 1e-14


def test_find_pure_projections(reg):
    pure4 = find_pure_projections(lambda d: spdc_after_pbs(reg, d, 2), FOURFOLD, OUTPUTS, 4,
                                  default_phase_grid(32))
    assert sorted(pure4) == ODD
    assert "++++" not in pure4
    pure2 = find_pure_projections(lambda d: spdc_after_pbs(reg, d, 1), TWOFOLD, ["a3", "a4"], 2,
                                  default_phase_grid(32))
    assert sorted(pure2) == ["++", "+-", "-+", "--"]
    with pytest.raises(ConfigurationError):
        find_pure_projections(lambda d: spdc_after_pbs(reg, d, 1), TWOFOLD, ["a3", "a4"], 20,
                              default_phase_grid(32))
