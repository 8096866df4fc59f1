"""The three concrete fit models: decay trace, fringe slice, contrast decay."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from ..errors import InvalidInputError

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class EmgModel:
    """Gaussian response convolved with an exponential decay, plus optionals.

    ``amp`` is the integrated count of the decay component; ``prompt_amp`` is
    the peak height of an additional Gaussian spike at t0 (the doubled-pulse
    contribution); ``baseline`` is a constant offset.
    """

    t0: float  # ps
    sigma: float  # ps, Gaussian width of the response
    tau: float  # ps, decay lifetime
    amp: float  # integrated counts
    baseline: float = 0.0
    prompt_amp: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0 or self.tau <= 0:
            raise InvalidInputError("sigma and tau must be > 0")
        if self.amp < 0:
            raise InvalidInputError("amp must be >= 0")


def emg_profile(t, t0, sigma, tau, amp, baseline=0.0, prompt_amp=0.0):
    """Closed form of the Gaussian (x) one-sided-exponential convolution.

    amp/(2 tau) * exp(sigma^2/(2 tau^2) - dt/tau) * erfc(sigma/(sqrt2 tau)
    - dt/(sqrt2 sigma)) with dt = t - t0.  Evaluated through the scaled
    complementary error function where the plain form would overflow
    (leading edge, where the erfc argument is large and positive), which
    makes it finite for every argument sign.
    """
    t = np.asarray(t, dtype=float)
    dt = t - t0
    z = sigma / (_SQRT2 * tau) - dt / (_SQRT2 * sigma)
    out = np.empty_like(dt)
    lead = z > 0  # exp factor overflows here; use erfcx and the exact identity
    out[lead] = erfcx(z[lead]) * np.exp(-(dt[lead] ** 2) / (2.0 * sigma**2))
    tail = ~lead
    out[tail] = erfc(z[tail]) * np.exp(sigma**2 / (2.0 * tau**2) - dt[tail] / tau)
    out *= amp / (2.0 * tau)
    if prompt_amp:
        out += prompt_amp * np.exp(-(dt**2) / (2.0 * sigma**2))
    return out + baseline


def emg_eval(model: EmgModel, t):
    """Evaluate an :class:`EmgModel` at time(s) t."""
    return emg_profile(t, model.t0, model.sigma, model.tau, model.amp,
                       model.baseline, model.prompt_amp)


@dataclass(frozen=True)
class FringeModel:
    """Gaussian-envelope fringe slice: A exp(-(x-x0)^2/(2 sigma^2)) *
    (C cos(k x + phi) + 1) / 2."""

    A: float  # counts
    x0: float  # pixels
    sigma: float  # pixels
    C: float  # contrast in [0, 1]
    k: float  # radians / pixel
    phi: float  # radians

    def __post_init__(self):
        if not 0.0 <= self.C <= 1.0:
            raise InvalidInputError(f"contrast must be in [0, 1], got {self.C}")
        if self.sigma <= 0 or self.k <= 0:
            raise InvalidInputError("sigma and k must be > 0")


def fringe_profile(x, A, x0, sigma, C, k, phi):
    x = np.asarray(x, dtype=float)
    envelope = A * np.exp(-((x - x0) ** 2) / (2.0 * sigma**2))
    return envelope * 0.5 * (C * np.cos(k * x + phi) + 1.0)


def fringe_eval(model: FringeModel, x):
    return fringe_profile(x, model.A, model.x0, model.sigma, model.C,
                          model.k, model.phi)


@dataclass(frozen=True)
class ContrastDecayModel:
    """Fringe-contrast decay vs interferometer delay.

    ``shape`` selects exp(-dt/T2) or exp(-(dt/T2)^2); ``floor`` is a
    resolution-limited residual contrast.
    """

    C0: float
    T2: float  # ps
    shape: str = "exponential"
    floor: float = 0.0

    def __post_init__(self):
        if self.T2 <= 0:
            raise InvalidInputError("T2 must be > 0")
        if not 0.0 <= self.C0 <= 1.0:
            raise InvalidInputError(f"C0 must be in [0, 1], got {self.C0}")
        if not 0.0 <= self.floor < max(self.C0, 1e-12):
            raise InvalidInputError("floor must satisfy 0 <= floor < C0")
        if self.shape not in ("exponential", "gaussian"):
            raise InvalidInputError(f"unknown shape {self.shape!r}")


def contrast_decay_profile(delay, C0, T2, floor=0.0, shape="exponential"):
    delay = np.asarray(delay, dtype=float)
    if shape == "exponential":
        decay = np.exp(-np.abs(delay) / T2)
    elif shape == "gaussian":
        decay = np.exp(-((delay / T2) ** 2))
    else:
        raise InvalidInputError(f"unknown shape {shape!r}")
    return C0 * decay + floor


def contrast_decay_eval(model: ContrastDecayModel, delay):
    return contrast_decay_profile(delay, model.C0, model.T2, model.floor, model.shape)
