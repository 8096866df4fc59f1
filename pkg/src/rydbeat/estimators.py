"""Estimator-style front ends for the analysis pipelines.

Thin wrappers following the scikit-learn conventions (constructor holds the
configuration, ``fit`` learns and stores trailing-underscore attributes,
``get_params``/``set_params``/``clone`` work), so the fitters drop into
ecosystem tooling.  The underlying functional pipelines stay available in
:mod:`rydbeat.fitting` and :mod:`rydbeat.beats`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .beats import DEFAULT_TOLERANCE_MEV, beat_report
from .catalog import default_catalog
from .emitters import DEFAULT_TIME_FWHM
from .fitting.models import contrast_decay_profile, emg_profile, fringe_profile
from .fitting.pipelines import fit_contrast_decay, fit_fringe_slice, fit_lifetime
from .signals import TimeTrace


def _as_xy(X, y, x_name="X"):
    x = np.asarray(X, dtype=float).ravel()
    if y is None:
        raise ValueError(f"{x_name} values require a matching y array")
    yy = np.asarray(y, dtype=float).ravel()
    if x.shape != yy.shape:
        raise ValueError("X and y must have the same length")
    return x, yy


class LifetimeFitter(BaseEstimator):
    """Decay-lifetime estimator for time traces.

    Parameters mirror :func:`rydbeat.fitting.fit_lifetime`; after ``fit`` the
    lifetime is in ``tau_`` (ps) with uncertainty ``tau_err_``.
    """

    def __init__(self, irf_fwhm=DEFAULT_TIME_FWHM, fix_sigma=False,
                 fit_prompt=False, weighting="poisson", max_iter=200):
        self.irf_fwhm = irf_fwhm
        self.fix_sigma = fix_sigma
        self.fit_prompt = fit_prompt
        self.weighting = weighting
        self.max_iter = max_iter

    def fit(self, X, y=None):
        trace = X if isinstance(X, TimeTrace) else TimeTrace(*_as_xy(X, y, "time"))
        self.result_ = fit_lifetime(
            trace, irf_hint=self.irf_fwhm, fix_sigma=self.fix_sigma,
            fit_prompt=self.fit_prompt, weighting=self.weighting,
            max_iter=self.max_iter,
        )
        self.tau_ = self.result_.params["tau"]
        self.tau_err_ = self.result_.sigmas["tau"]
        return self

    def predict(self, X):
        p = self.result_.params
        return emg_profile(np.asarray(X, dtype=float), p["t0"], p["sigma"],
                           p["tau"], p["amp"], p["baseline"], p["prompt_amp"])


class FringeFitter(BaseEstimator):
    """Contrast estimator for one fringe slice; ``contrast_`` after fit."""

    def __init__(self, snr_threshold=25.0, max_iter=200):
        self.snr_threshold = snr_threshold
        self.max_iter = max_iter

    def fit(self, X, y=None):
        if y is None:
            x, row = None, np.asarray(X, dtype=float).ravel()
        else:
            x, row = _as_xy(X, y, "pixel")
        self.result_ = fit_fringe_slice(row, x=x, max_iter=self.max_iter,
                                        snr_threshold=self.snr_threshold)
        self.contrast_ = self.result_.params["C"]
        self.contrast_err_ = self.result_.sigmas["C"]
        return self

    def predict(self, X):
        p = self.result_.params
        return fringe_profile(np.asarray(X, dtype=float), p["A"], p["x0"],
                              p["sigma"], p["C"], p["k"], p["phi"])


class ContrastDecayFitter(BaseEstimator):
    """Coherence-time estimator from contrast vs delay; ``t2_`` after fit."""

    def __init__(self, shape="exponential", fit_floor=True, max_iter=200):
        self.shape = shape
        self.fit_floor = fit_floor
        self.max_iter = max_iter

    def fit(self, X, y=None, sigma=None):
        delays, contrasts = _as_xy(X, y, "delay")
        self.result_ = fit_contrast_decay(
            delays, contrasts, sigma, shape=self.shape,
            fit_floor=self.fit_floor, max_iter=self.max_iter,
        )
        self.t2_ = self.result_.params["T2"]
        self.t2_err_ = self.result_.sigmas["T2"]
        self.resolution_limited_ = "resolution-limited" in self.result_.flags
        return self

    def predict(self, X):
        p = self.result_.params
        return contrast_decay_profile(np.asarray(X, dtype=float), p["C0"],
                                      p["T2"], p["floor"], self.shape)


class BeatAnalyzer(BaseEstimator):
    """Beat-frequency extraction and state-pair assignment for a time trace.

    After ``fit``: ``spectrum_`` (power spectrum), ``peaks_`` (ranked
    :class:`rydbeat.beats.BeatPeak`), ``assignments_`` and ``report_``.
    """

    def __init__(self, catalog=None, state=None, detrend="emg_residual",
                 moving_mean_width=None, window="hann", pad_factor=4,
                 min_prominence=0.05, tolerance=DEFAULT_TOLERANCE_MEV,
                 irf_fwhm=DEFAULT_TIME_FWHM, window_start=None):
        self.catalog = catalog
        self.state = state
        self.detrend = detrend
        self.moving_mean_width = moving_mean_width
        self.window = window
        self.pad_factor = pad_factor
        self.min_prominence = min_prominence
        self.tolerance = tolerance
        self.irf_fwhm = irf_fwhm
        self.window_start = window_start

    def fit(self, X, y=None):
        trace = X if isinstance(X, TimeTrace) else TimeTrace(*_as_xy(X, y, "time"))
        catalog = self.catalog if self.catalog is not None else default_catalog()
        self.report_ = beat_report(
            trace, catalog, state=self.state, detrend_method=self.detrend,
            moving_mean_width=self.moving_mean_width, window=self.window,
            pad_factor=self.pad_factor, min_prominence=self.min_prominence,
            tolerance=self.tolerance, window_start=self.window_start,
            irf_fwhm=self.irf_fwhm,
        )
        self.spectrum_ = self.report_.spectrum
        self.assignments_ = self.report_.assignments
        self.peaks_ = [a.peak for a in self.assignments_]
        return self

    def transform(self, X=None):
        """Spectrum of the fitted trace as an (n_freq, 2) array."""
        return np.column_stack([self.spectrum_.freq, self.spectrum_.power])
