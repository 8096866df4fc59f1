import numpy as np
import pytest
from sklearn.base import clone

from rydbeat import (
    BeatAnalyzer,
    ContrastDecayFitter,
    FringeFitter,
    LifetimeFitter,
    default_catalog,
)
from rydbeat.fitting.models import contrast_decay_profile, fringe_profile
from rydbeat.reproduce import BEAT_REFERENCE, simulate_beat_trace, simulate_state_trace


def test_estimators_clone_and_get_params():
    for est in (LifetimeFitter(irf_fwhm=2.0), FringeFitter(snr_threshold=30.0),
                ContrastDecayFitter(shape="gaussian"), BeatAnalyzer(pad_factor=8)):
        params = est.get_params()
        twin = clone(est)
        assert twin.get_params() == params


def test_lifetime_fitter_on_trace():
    trace = simulate_state_trace(default_catalog(), "4S", seed=21)
    est = LifetimeFitter(irf_fwhm=2.5678, fix_sigma=True).fit(trace)
    assert est.tau_ == pytest.approx(5.1, abs=0.2)
    assert est.tau_err_ < 0.1
    prediction = est.predict(trace.t)
    assert prediction.shape == trace.t.shape
    # accepts bare arrays too
    est2 = LifetimeFitter(irf_fwhm=2.5678, fix_sigma=True).fit(trace.t, trace.intensity)
    assert est2.tau_ == pytest.approx(est.tau_, rel=1e-12)


def test_fringe_fitter_contrast():
    x = np.arange(400.0)
    row = fringe_profile(x, A=500.0, x0=190.0, sigma=85.0, C=0.62, k=0.45, phi=0.3)
    est = FringeFitter().fit(row)
    assert est.contrast_ == pytest.approx(0.62, abs=1e-6)
    assert est.predict(x).shape == x.shape


def test_contrast_decay_fitter():
    delays = np.arange(0.0, 16.0, 1.0)
    contrasts = contrast_decay_profile(delays, C0=0.9, T2=3.5, floor=0.0)
    est = ContrastDecayFitter(fit_floor=False).fit(delays, contrasts)
    assert est.t2_ == pytest.approx(3.5, rel=1e-6)
    assert est.resolution_limited_  # below the ~4 ps instrument floor
    assert est.predict(delays) == pytest.approx(contrasts, rel=1e-6)


def test_beat_analyzer_pipeline():
    catalog = default_catalog()
    row = next(r for r in BEAT_REFERENCE if r["trace"] == "6S")
    trace = simulate_beat_trace(catalog, row)
    est = BeatAnalyzer(state="6S").fit(trace)
    assert est.peaks_[0].rank == "major"
    assert est.peaks_[0].nu == pytest.approx(0.095, abs=0.01)
    assert {s.label for s in est.assignments_[0].candidates[0].pair} == {"6S", "6D"}
    spectrum = est.transform()
    assert spectrum.shape == (est.spectrum_.freq.size, 2)
