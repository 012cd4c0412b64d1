import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noonsim.analysis import (
    FitError,
    NoOscillationError,
    debroglie_report,
    dominant_period,
    dump_columns,
    fit_cosine,
    harmonic_content,
    spectrum,
)
from noonsim.experiment import FringeSeries, sample_counts

X = np.linspace(0, 800, 161)


def series(y, x=X, counts=None):
    return FringeSeries(tuple(x), tuple(np.clip(y, 0, 1)), counts)


def test_dominant_period_within_one_bin():
    s = series(0.5 + 0.5 * np.cos(2 * np.pi * X / 197.5))
    period = dominant_period(s)
    bin_width = 1 / (len(X) * 5.0)
    assert abs(1 / period - 1 / 197.5) <= bin_width


def test_dominant_period_constant():
    with pytest.raises(NoOscillationError):
        dominant_period(series(np.full_like(X, 0.3)))


def test_dominant_period_of_mixed_harmonics():
    dphi = 2 * np.pi * X / 790
    s = series((1 + np.cos(2 * dphi)) ** 2 / 16)
    periods, amps = spectrum(s)
    assert abs(1 / dominant_period(s) - 1 / 395) <= 1 / 805


def test_harmonic_content_on_partial_periods():
    dphi = 2 * np.pi * X / 790
    s = series((1.5 + 2 * np.cos(2 * dphi) + 0.5 * np.cos(4 * dphi)) / 16)
    h = harmonic_content(s, 790, (1, 2, 3, 4))
    assert h[2] / h[4] == pytest.approx(4, rel=1e-9)
    assert h[1] < 1e-12 and h[3] < 1e-12


def test_fit_noiseless_synthetic():
    s = series(1 / 2 + 1 / 2 * np.cos(2 * np.pi * X / 197.5 + 0.4))
    f = fit_cosine(s)
    assert abs(f.wavelength / 197.5 - 1) < 1e-6
    assert abs(f.visibility - 1) < 1e-9
    assert f.phase == pytest.approx(0.4, abs=1e-9)
    assert f.residual_rms < 1e-12


def test_fit_flat_series_flags_k():
    f = fit_cosine(series(np.full_like(X, 0.5)))
    assert f.visibility == 0 and not f.k_identifiable
    assert "unidentifiable" in f.to_text()
    g = fit_cosine(series(np.full_like(X, 0.5)), lambda_hint=200)
    assert not g.k_identifiable and g.wavelength == pytest.approx(200)


def test_fit_warns_on_short_data():
    x = np.linspace(0, 300, 61)
    with pytest.warns(UserWarning, match="two full periods"):
        fit_cosine(series(0.5 + 0.4 * np.cos(2 * np.pi * x / 197.5), x))


def test_fit_edge_of_scan_raises():
    s = series(0.5 + 0.4 * np.cos(2 * np.pi * X / 197.5))
    with pytest.raises(FitError, match="scan"):
        fit_cosine(s, lambda_hint=400)


def test_poisson_fits_stay_within_two_percent():
    clean = series((1 - np.cos(2 * np.pi * X / 197.5)) / 32)
    good = 0
    for seed in range(30):
        f = fit_cosine(sample_counts(clean, 10_000, seed))
        good += abs(f.wavelength / 197.5 - 1) < 0.02
        assert f.uncertainties["wavelength"] > 0
    assert good >= 28


def test_fit_idempotence():
    s = series(0.3 + 0.2 * np.cos(2 * np.pi * X / 395 - 1.0))
    f = fit_cosine(s)
    g = fit_cosine(series(f.model(X)))
    for a, b in ((f.offset, g.offset), (f.amplitude, g.amplitude), (f.k, g.k), (f.phase, g.phase)):
        assert a == pytest.approx(b, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.05, 1.0), delta=st.floats(-300, 300), phase=st.floats(-3, 3),
       lam=st.floats(150, 260))
def test_scale_and_shift_equivariance(c, delta, phase, lam):
    y = 0.45 + 0.35 * np.cos(2 * np.pi * X / lam + phase)
    base = fit_cosine(series(y))
    scaled = fit_cosine(series(c * y))
    assert scaled.offset == pytest.approx(c * base.offset, abs=1e-9)
    assert scaled.amplitude == pytest.approx(c * base.amplitude, abs=1e-9)
    assert scaled.k == pytest.approx(base.k, abs=1e-9)
    assert scaled.visibility == pytest.approx(base.visibility, abs=1e-9)
    assert math.remainder(scaled.phase - base.phase, 2 * math.pi) == pytest.approx(0, abs=1e-9)
    shifted = fit_cosine(series(y, X + delta))
    assert shifted.k == pytest.approx(base.k, abs=1e-9)
    assert math.remainder(shifted.phase - (base.phase - base.k * delta), 2 * math.pi) == pytest.approx(0, abs=1e-9)


def test_debroglie_ideal_and_measured():
    ideal = []
    for n in (1, 2, 4):
        lam = 790 / n
        x = np.linspace(0, 1600, 321)
        ideal.append((n, fit_cosine(series(0.5 + 0.5 * np.cos(2 * np.pi * x / lam), x))))
    report = debroglie_report(ideal)
    assert [r.ratio for r in report.rows] == pytest.approx([1, 2, 4], rel=1e-9)
    measured = debroglie_report([(1, (823, 46)), (2, (395, 16)), (4, (194, 9))])
    ratios = [r.ratio for r in measured.rows]
    assert ratios == pytest.approx([1, 2.0835, 4.2423], abs=1e-4)
    assert all(r.consistent for r in measured.rows)
    single = debroglie_report([(1, 790.0)])
    assert single.rows[0].ratio == 1 and single.rows[0].consistent is None
    assert "lambda(1)/lambda(N)" in measured.to_text()
    assert '"reference_wavelength_nm": 823' in measured.to_json()


def test_dump_columns():
    s = series(0.5 + 0.5 * np.cos(2 * np.pi * X / 197.5))
    text = dump_columns(s, fit_cosine(s))
    lines = text.splitlines()
    assert lines[0].startswith("#") and len(lines) == 162
    assert len(lines[1].split()) == 3
