import numpy as np
import pytest
import scipy.integrate

from rydbeat import EmgModel, emg_eval
from rydbeat.errors import InvalidInputError
from rydbeat.fitting.models import emg_profile


def quadrature_oracle(t, t0, sigma, tau, amp, ds=0.001):
    """Brute-force convolution of the one-sided exponential with the
    Gaussian response on a 1 fs grid."""
    out = []
    for tv in np.atleast_1d(t):
        hi = max(tv - t0, 0.0) + 14.0 * sigma
        s = np.arange(0.0, hi, ds)
        g = np.exp(-((tv - t0 - s) ** 2) / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))
        out.append(amp * scipy.integrate.simpson(np.exp(-s / tau) * g / tau, x=s))
    return np.array(out)


def test_closed_form_matches_quadrature_spot_checks():
    t0 = 10.0
    for sigma, tau in [(0.3, 0.5), (1.1, 5.1), (3.0, 25.0), (2.0, 0.7)]:
        t = t0 + np.array([-2 * sigma, -sigma, 0.0, sigma, 2 * sigma,
                           3 * sigma + tau, 3 * sigma + 3 * tau])
        closed = emg_profile(t, t0, sigma, tau, amp=7.0)
        oracle = quadrature_oracle(t, t0, sigma, tau, amp=7.0)
        assert np.max(np.abs(closed - oracle) / oracle) < 1e-8


def test_delta_response_limit_is_plain_exponential():
    tau, t0, amp, baseline = 5.0, 2.0, 3.0, 0.4
    sigma = 1e-4 * tau
    t = t0 + np.array([0.5, 1.0, 3.0, 10.0])
    values = emg_profile(t, t0, sigma, tau, amp, baseline)
    expected = amp / tau * np.exp(-(t - t0) / tau) + baseline
    assert np.allclose(values, expected, rtol=1e-6)


def test_far_leading_edge_returns_baseline():
    model = EmgModel(t0=50.0, sigma=1.0, tau=4.0, amp=100.0, baseline=2.5)
    assert emg_eval(model, np.array([-1000.0]))[0] == pytest.approx(2.5, rel=1e-12)


def test_finite_and_nonnegative_everywhere():
    t = np.linspace(-1e4, 1e4, 20001)
    values = emg_profile(t, t0=0.0, sigma=2.0, tau=10.0, amp=5.0,
                         baseline=0.1, prompt_amp=1.0)
    assert np.all(np.isfinite(values))
    assert np.all(values >= 0.0)


def test_monotone_decreasing_beyond_peak_region():
    t0, sigma, tau = 5.0, 1.5, 6.0
    t = np.arange(t0 + 3 * sigma + tau, 120.0, 0.05)
    values = emg_profile(t, t0, sigma, tau, amp=10.0)
    assert np.all(np.diff(values) < 0.0)


def test_prompt_and_baseline_contributions():
    t = np.arange(-5.0, 30.0, 0.05)  # grid contains t0 = 0 exactly
    base = emg_profile(t, 0.0, 1.0, 5.0, 10.0)
    full = emg_profile(t, 0.0, 1.0, 5.0, 10.0, baseline=1.0, prompt_amp=2.0)
    extra = full - base
    assert extra[np.argmin(np.abs(t))] == pytest.approx(3.0, abs=1e-9)
    assert extra[-1] == pytest.approx(1.0, rel=1e-6)


def test_model_invariants():
    with pytest.raises(InvalidInputError):
        EmgModel(t0=0.0, sigma=-1.0, tau=3.0, amp=1.0)
    with pytest.raises(InvalidInputError):
        EmgModel(t0=0.0, sigma=1.0, tau=0.0, amp=1.0)
    with pytest.raises(InvalidInputError):
        EmgModel(t0=0.0, sigma=1.0, tau=3.0, amp=-2.0)
