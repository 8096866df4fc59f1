"""Concrete fitting pipelines built on the least-squares engine.

These wrap the three models with automated initialization, the weighting
conventions, and the post-fit bookkeeping (coherence-time bound, resolution
flags, channel aggregation for the interferometer stack).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import FWHM_TO_SIGMA
from ..emitters import DEFAULT_TIME_FWHM
from ..errors import (
    InsufficientCoverageError,
    InsufficientDataError,
    InsufficientDecayError,
    InvalidInputError,
)
from ..signals import TimeTrace
from .engine import FitResult, least_squares
from .models import contrast_decay_profile, emg_profile, fringe_profile

#: Interferometer resolution floor: fitted coherence times below this are
#: dominated by the instrument and get flagged.
T2_RESOLUTION_FLOOR = 4.0  # ps


# ---------------------------------------------------------------------------
# lifetime
# ---------------------------------------------------------------------------

def _tail_slope_tau(t, y, baseline, peak_idx, dt):
    """Crude lifetime from the log-slope of the decaying tail."""
    level = y - baseline
    top = level[peak_idx]
    lo, hi = 0.02 * top, 0.6 * top
    sel = np.where((np.arange(y.size) > peak_idx) & (level > lo) & (level < hi))[0]
    if sel.size < 4:
        return max(10.0 * dt, 1e-2)
    coeffs = np.polyfit(t[sel], np.log(level[sel]), 1)
    slope = coeffs[0]
    if slope >= 0:
        return max(10.0 * dt, 1e-2)
    return float(np.clip(-1.0 / slope, dt, t[-1] - t[0]))


def fit_lifetime(trace: TimeTrace, irf_hint=DEFAULT_TIME_FWHM, *,
                 fix_sigma=False, fit_prompt=False, weighting="poisson",
                 max_iter=200) -> FitResult:
    """Extract the decay lifetime of a time trace.

    Fits the Gaussian-response x exponential model with automated
    initialization: t0 from the peak position, tau from the tail log-slope,
    amp from the integral, sigma from ``irf_hint`` (the response FWHM in ps;
    pass None for the generic 1 ps starting point).  ``fix_sigma`` pins the
    response width to the hint instead of fitting it.  With
    ``weighting="poisson"`` points are weighted by sqrt(counts) floored at
    one count.

    Raises :class:`InsufficientCoverageError` when the trace peaks in its
    last 20% (not enough decay recorded to fit).
    """
    t, y = trace.t, trace.intensity
    peak_idx = int(np.argmax(y))
    if peak_idx >= 0.8 * y.size:
        raise InsufficientCoverageError(
            "trace peaks in its final 20%; decay is not covered"
        )
    baseline0 = float(np.percentile(y, 5))
    top = float(y[peak_idx])
    if top <= baseline0:
        raise InvalidInputError("trace has no structure above its baseline")
    if irf_hint is None:
        sigma0 = 1.0
    else:
        sigma0 = float(irf_hint) / FWHM_TO_SIGMA
    tau0 = _tail_slope_tau(t, y, baseline0, peak_idx, trace.dt)
    amp0 = float(np.clip((y - baseline0).clip(0).sum() * trace.dt, 1e-12, None))
    p0 = {
        "t0": float(t[peak_idx]),
        "sigma": sigma0,
        "tau": tau0,
        "amp": amp0,
        "baseline": baseline0,  # unbounded: a zero baseline must stay fittable
        "prompt_amp": max(0.05 * top, 1e-12) if fit_prompt else 0.0,
    }
    bounds = {
        "sigma": (1e-3, None),
        "tau": (1e-4, None),
        "amp": (0.0, None),
        "prompt_amp": (0.0, None),  # ignored while the prompt is held fixed
    }
    fixed = []
    if fix_sigma:
        fixed.append("sigma")
    if not fit_prompt:
        fixed.append("prompt_amp")
    sigma_w = None
    if weighting == "poisson":
        sigma_w = np.sqrt(np.maximum(y, 1.0))
    elif weighting is not None:
        raise InvalidInputError(f"unknown weighting {weighting!r}")

    def model_fn(x, p):
        return emg_profile(x, p["t0"], p["sigma"], p["tau"], p["amp"],
                           p["baseline"], p["prompt_amp"])

    return least_squares(model_fn, t, y, p0, bounds=bounds, sigma=sigma_w,
                         fixed=fixed, model="emg", max_iter=max_iter)


# ---------------------------------------------------------------------------
# fringe slice
# ---------------------------------------------------------------------------

def _fringe_inits(x, row, dx):
    """FFT-based initial estimates (k, phi, C) plus envelope moments."""
    n = x.size
    mean_sub = row - row.mean()
    spectrum = np.abs(np.fft.rfft(mean_sub)) ** 2
    lo = 3  # skip the envelope lobe around DC
    if spectrum.size <= lo + 2:
        return None
    band = spectrum[lo:-1]
    peak = int(np.argmax(band)) + lo
    med = float(np.median(band))
    snr = spectrum[peak] / med if med > 0 else np.inf
    # parabolic refinement of the fringe frequency
    a, b, g = np.log(spectrum[peak - 1 : peak + 2] + 1e-300)
    denom = a - 2 * b + g
    shift = 0.5 * (a - g) / denom if denom < 0 else 0.0
    k0 = 2.0 * np.pi * (peak + shift) / (n * dx)
    z = np.sum(row * np.exp(-1j * k0 * x))
    total = float(row.sum())
    c0 = float(np.clip(2.0 * abs(z) / max(total, 1e-300), 1e-4, 0.999))
    phi0 = float(np.angle(z))
    return {"k": float(k0), "phi": phi0, "C": c0, "snr": float(snr)}


def fit_fringe_slice(row, x=None, *, max_iter=200, snr_threshold=25.0) -> FitResult:
    """Fit one constant-energy slice of a fringe picture.

    The contrast estimate ``C`` is invariant under intensity scaling of the
    row (the row is normalized internally).  When no fringe frequency stands
    out of the slice spectrum, a zero-contrast result with a unit sigma and a
    ``low-significance`` flag is returned instead of an error.
    """
    row = np.asarray(row, dtype=float)
    if x is None:
        x = np.arange(row.size, dtype=float)
    else:
        x = np.asarray(x, dtype=float)
    if row.size != x.size or row.size < 16:
        raise InvalidInputError("need a 1-D row of at least 16 samples")

    scale = float(row.max())
    flags = []

    def degenerate(reason):
        env_amp = max(scale, 0.0)
        params = {"A": env_amp, "x0": float(x[int(np.argmax(row))]),
                  "sigma": float((x[-1] - x[0]) / 4.0), "C": 0.0,
                  "k": 0.0, "phi": 0.0}
        sigmas = {k: 0.0 for k in params}
        sigmas["C"] = 1.0
        return FitResult(model="fringe", params=params, sigmas=sigmas,
                         chi2_reduced=float("nan"),
                         covariance=np.zeros((6, 6)), iterations=0,
                         converged=True, flags=["low-significance", reason])

    if scale <= 0:
        return degenerate("empty-row")
    rown = row / scale
    dx = float(np.median(np.diff(x))) if x.size > 1 else 1.0
    if dx <= 0:
        raise InvalidInputError("pixel positions must increase")

    inits = _fringe_inits(x, rown, dx)
    if inits is None or inits["snr"] < snr_threshold:
        return degenerate("no-fringe-frequency")

    # envelope moments from the slice with the modulation averaged out
    width = max(5, int(round(2.0 * np.pi / (inits["k"] * dx))))
    kernel = np.ones(width) / width
    smooth = np.convolve(rown, kernel, mode="same")
    envelope = 2.0 * smooth
    x0_init = float(x[int(np.argmax(smooth))])
    wsum = float(envelope.clip(0).sum())
    sigma_init = float(
        np.sqrt(np.sum(envelope.clip(0) * (x - x0_init) ** 2) / max(wsum, 1e-300))
    )
    sigma_init = float(np.clip(sigma_init, 2.0 * dx, 10.0 * (x[-1] - x[0])))
    p0 = {
        "A": float(np.clip(envelope.max(), 1e-6, None)),
        "x0": x0_init,
        "sigma": sigma_init,
        "C": inits["C"],
        "k": inits["k"],
        "phi": inits["phi"],
    }
    bounds = {
        "A": (0.0, None),
        "sigma": (0.5 * dx, None),
        "C": (0.0, 1.0),
        "k": (np.pi / (x.size * dx), np.pi / dx),
    }

    def model_fn(xx, p):
        return fringe_profile(xx, p["A"], p["x0"], p["sigma"], p["C"], p["k"], p["phi"])

    result = least_squares(model_fn, x, rown, p0, bounds=bounds, model="fringe",
                           max_iter=max_iter)
    result.params["A"] *= scale
    result.sigmas["A"] *= scale
    result.covariance[0, :] *= scale
    result.covariance[:, 0] *= scale
    if result.params["k"] * result.params["sigma"] < 3.0 * np.pi:
        flags.append("few-fringe-periods")
    result.flags.extend(flags)
    return result


# ---------------------------------------------------------------------------
# contrast decay
# ---------------------------------------------------------------------------

def fit_contrast_decay(delays, contrasts, sigmas=None, *, shape="exponential",
                       fit_floor=True, max_iter=200) -> FitResult:
    """Fit the fringe-contrast decay vs delay; the 1/e time is the coherence time.

    Requires at least 4 points and an actual decay (the later contrasts must
    drop below 0.6x the initial one, i.e. roughly one decay time of span).
    Fitted coherence times below the ~4 ps instrument floor are flagged
    ``resolution-limited``.
    """
    delays = np.asarray(delays, dtype=float)
    contrasts = np.asarray(contrasts, dtype=float)
    if delays.size != contrasts.size:
        raise InvalidInputError("delays and contrasts must have the same length")
    if delays.size < 4:
        raise InsufficientDataError(f"need >= 4 delay points, got {delays.size}")
    order = np.argsort(delays)
    delays, contrasts = delays[order], contrasts[order]
    weights = None
    if sigmas is not None:
        weights = np.asarray(sigmas, dtype=float)[order]
    first = contrasts[0]
    tail = float(np.min(contrasts[-2:]))
    if first <= 0 or tail >= 0.6 * first:
        raise InsufficientDecayError(
            "series does not decay below 0.6x its initial contrast"
        )

    # halve the observed minimum: the tail may not have flattened yet
    floor0 = 0.5 * max(float(contrasts.min()), 0.0)
    c00 = float(np.clip(first - floor0, 1e-3, 0.999))
    drop = np.where(contrasts <= floor0 + (first - floor0) / np.e)[0]
    t20 = float(delays[drop[0]]) if drop.size else float(delays[-1] / 2.0)
    t20 = max(t20, float(np.diff(delays).min()))
    p0 = {"C0": c00, "T2": t20, "floor": max(floor0, 1e-6) if fit_floor else 0.0}
    bounds = {"C0": (0.0, 1.0), "T2": (1e-3, None), "floor": (0.0, 1.0)}
    fixed = [] if fit_floor else ["floor"]

    def model_fn(d, p):
        return contrast_decay_profile(d, p["C0"], p["T2"], p["floor"], shape)

    result = least_squares(model_fn, delays, contrasts, p0, bounds=bounds,
                           sigma=weights, fixed=fixed,
                           model=f"contrast_decay_{shape}", max_iter=max_iter)
    if result.params["T2"] < T2_RESOLUTION_FLOOR:
        result.flags.append("resolution-limited")
    return result


def validate_t2_bound(t2, t1, t1_err=0.0):
    """Check a fitted coherence time against its ceiling of twice the lifetime.

    ``t2`` may be a :class:`FitResult` from :func:`fit_contrast_decay` or a
    bare value.  A violation is flagged when T2 - 2*T1 exceeds twice the
    combined uncertainty; the report also carries the pure-dephasing rate
    implied by T2 < 2*T1, max(0, 1/T2 - 1/(2*T1)).
    """
    if isinstance(t2, FitResult):
        t2_val = float(t2.params["T2"])
        t2_err = float(t2.sigmas.get("T2", 0.0))
    else:
        t2_val, t2_err = float(t2), 0.0
    if not (t2_val > 0 and t1 > 0 and np.isfinite(t2_val) and np.isfinite(t1)):
        raise InvalidInputError("T2 and T1 must be finite and positive")
    combined = float(np.hypot(t2_err, 2.0 * t1_err))
    margin = t2_val - 2.0 * t1
    return {
        "t2_ps": t2_val,
        "t2_err_ps": t2_err,
        "t1_ps": float(t1),
        "t2_max_ps": 2.0 * float(t1),
        "margin_ps": margin,
        "violation": bool(margin > 2.0 * combined),
        "pure_dephasing_rate": max(0.0, 1.0 / t2_val - 1.0 / (2.0 * t1)),
    }


# ---------------------------------------------------------------------------
# interferometer stack
# ---------------------------------------------------------------------------

@dataclass
class ChannelCoherence:
    """Contrast-vs-delay series and decay fit for one energy channel."""

    energy: float  # meV
    amplitude: float  # peak row amplitude across the stack
    delays: np.ndarray
    contrasts: np.ndarray
    contrast_sigmas: np.ndarray
    decay: FitResult | None
    error: str | None = None


@dataclass
class CoherenceResult:
    """Per-channel coherence times extracted from a fringe-image stack."""

    channels: list
    best_index: int

    @property
    def best(self) -> ChannelCoherence:
        return self.channels[self.best_index]


def analyze_fringe_stack(images, *, min_amplitude_frac=0.02, shape="exponential",
                         fit_floor=True) -> CoherenceResult:
    """Full interferometry pipeline over a stack of fringe pictures.

    Every energy row of every picture is fitted for its contrast; contrasts
    are aggregated per energy channel against the arm delay and fitted with a
    decay model.  Channels whose signal never exceeds ``min_amplitude_frac``
    of the stack maximum are skipped.  The "best" channel is the brightest
    one with a successful decay fit.
    """
    if not images:
        raise InvalidInputError("empty fringe stack")
    e_grid = images[0].e
    for img in images[1:]:
        if img.e.shape != e_grid.shape or not np.allclose(img.e, e_grid):
            raise InvalidInputError("all images must share one energy grid")
    images = sorted(images, key=lambda im: im.delay)
    delays = np.array([im.delay for im in images])
    if np.unique(delays).size != delays.size:
        raise InvalidInputError("duplicate delays in the stack")

    row_peak = np.array([[img.intensity[:, j].max() for img in images]
                         for j in range(e_grid.size)])
    global_max = float(row_peak.max())
    if global_max <= 0:
        raise InvalidInputError("stack contains no signal")

    channels = []
    for j, energy in enumerate(e_grid):
        amplitude = float(row_peak[j].max())
        if amplitude < min_amplitude_frac * global_max:
            continue
        contrasts, csigmas = [], []
        for img in images:
            fit = fit_fringe_slice(img.intensity[:, j])
            contrasts.append(fit.params["C"])
            csigmas.append(max(fit.sigmas["C"], 1e-4))
        contrasts = np.array(contrasts)
        csigmas = np.array(csigmas)
        decay, error = None, None
        try:
            decay = fit_contrast_decay(delays, contrasts, csigmas, shape=shape,
                                       fit_floor=fit_floor)
        except (InsufficientDataError, InsufficientDecayError) as exc:
            error = str(exc)
        channels.append(ChannelCoherence(
            energy=float(energy), amplitude=amplitude, delays=delays,
            contrasts=contrasts, contrast_sigmas=csigmas, decay=decay,
            error=error,
        ))
    if not channels:
        raise InvalidInputError("no channel exceeds the amplitude threshold")
    fitted = [i for i, ch in enumerate(channels) if ch.decay is not None]
    pool = fitted if fitted else range(len(channels))
    best = max(pool, key=lambda i: channels[i].amplitude)
    return CoherenceResult(channels=channels, best_index=int(best))
