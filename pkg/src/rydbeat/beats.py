"""Quantum-beat spectral analysis.

Pipeline: subtract the smooth decay from a time trace, take a windowed
zero-padded power spectrum, pick significant peaks with parabolic frequency
refinement, and match each peak's energy h*nu against catalog state-pair
splits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .catalog import StateCatalog, _as_state, energy_split
from .constants import H_MEV_PS, thz_to_mev
from .emitters import DEFAULT_TIME_FWHM
from .errors import (
    DetrendError,
    InsufficientDataError,
    InvalidInputError,
    RydbeatError,
)
from .fitting.models import emg_profile
from .fitting.pipelines import fit_lifetime
from .signals import TimeTrace

#: Default matching tolerance between a peak energy and a pair split (meV);
#: wide enough to bridge the table-vs-override split discrepancies plus the
#: frequency uncertainty of a 50-100 ps trace.
DEFAULT_TOLERANCE_MEV = 0.12

#: Peaks below this many native bins are part of the zero-frequency lobe.
DC_EXCLUSION_BINS = 1.5


# ---------------------------------------------------------------------------
# detrending
# ---------------------------------------------------------------------------

def detrend(trace: TimeTrace, method="emg_residual", width=None,
            irf_hint=DEFAULT_TIME_FWHM) -> TimeTrace:
    """Remove the smooth decay component, keeping the oscillations.

    ``method="emg_residual"`` fits the decay model and subtracts it;
    ``method="moving_mean"`` subtracts a centered moving average of ``width``
    ps.  A moving mean much shorter than the beat period follows the
    oscillation and eats its amplitude, so the result is flagged
    (``meta["detrend_flags"]``) when the width is below three times the
    dominant period.
    """
    flags = []
    if method == "emg_residual":
        try:
            # the width is pinned: the smooth component must not absorb the
            # oscillation by collapsing or inflating the response
            fit = fit_lifetime(trace, irf_hint=irf_hint, fix_sigma=True)
        except RydbeatError as exc:
            raise DetrendError(f"decay fit failed: {exc}") from exc
        p = fit.params
        smooth = emg_profile(trace.t, p["t0"], p["sigma"], p["tau"], p["amp"],
                             p["baseline"], p["prompt_amp"])
        if not fit.converged:
            flags.append("detrend-fit-not-converged")
    elif method == "moving_mean":
        if width is None or width <= 0:
            raise InvalidInputError("moving_mean needs a positive width in ps")
        n_win = max(3, int(round(width / trace.dt)) | 1)  # odd window
        kernel = np.ones(n_win) / n_win
        padded = np.pad(trace.intensity, n_win // 2, mode="edge")
        smooth = np.convolve(padded, kernel, mode="valid")
        residual_probe = trace.intensity - smooth
        period = _dominant_period(residual_probe, trace.dt)
        if period is not None and width < 3.0 * period:
            flags.append("moving-mean-width-below-3-periods")
    else:
        raise InvalidInputError(f"unknown detrend method {method!r}")
    meta = dict(trace.meta)
    meta["detrend_method"] = method
    meta["detrend_flags"] = flags
    return TimeTrace(trace.t, trace.intensity - smooth, meta=meta)


def _dominant_period(residual, dt):
    spectrum = np.abs(np.fft.rfft(residual - residual.mean())) ** 2
    if spectrum.size < 4:
        return None
    idx = int(np.argmax(spectrum[2:])) + 2
    freq = idx / (spectrum.size * 2 * dt)  # approximate; probe only
    return 1.0 / freq if freq > 0 else None


def analysis_window(trace: TimeTrace, start=None, stop=None,
                    irf_fwhm=DEFAULT_TIME_FWHM) -> TimeTrace:
    """Crop a trace to the beat-analysis window.

    Default start is one response FWHM after the trace peak, which drops the
    prompt doubled-pulse spike.  An optional stop cuts the dead tail; keeping
    it shortens the span to the part that actually oscillates, which widens
    the spectral bins but keeps slow detrending leftovers inside the excluded
    zero-frequency lobe.
    """
    if start is None:
        start = float(trace.t[int(np.argmax(trace.intensity))]) + irf_fwhm
    sel = trace.t >= start
    if stop is not None:
        sel &= trace.t <= stop
    if sel.sum() < 32:
        raise InsufficientDataError("fewer than 32 samples in the analysis window")
    return TimeTrace(trace.t[sel], trace.intensity[sel], meta=dict(trace.meta))


def signal_end(trace: TimeTrace, level_frac=1e-3, smooth_samples=5) -> float:
    """Time where the (smoothed) signal last exceeds ``level_frac`` of its
    peak above the baseline; used to drop the dead tail before the FFT."""
    n = max(3, int(smooth_samples) | 1)
    kernel = np.ones(n) / n
    padded = np.pad(trace.intensity, n // 2, mode="edge")
    smooth = np.convolve(padded, kernel, mode="valid")
    level = smooth - smooth.min()
    top = level.max()
    if top <= 0:
        return float(trace.t[-1])
    above = np.where(level >= level_frac * top)[0]
    return float(trace.t[above[-1]])


# ---------------------------------------------------------------------------
# power spectrum
# ---------------------------------------------------------------------------

@dataclass
class BeatSpectrum:
    """One-sided power spectrum of a detrended trace."""

    freq: np.ndarray  # THz, uniform from 0
    power: np.ndarray
    window: str
    pad_factor: int
    native_resolution: float  # THz, 1/(n*dt) of the analyzed trace

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write("freq_thz,power\n")
            for f, p in zip(self.freq, self.power):
                fh.write(f"{f:.10g},{p:.10g}\n")


def power_spectrum(trace: TimeTrace, window="hann", pad_factor=1) -> BeatSpectrum:
    """Magnitude-squared spectrum of the windowed, zero-padded trace.

    Normalized so that with a rectangular window the total power equals the
    windowed-signal energy (discrete Parseval identity).  The native
    resolution 1/(n*dt) is recorded; zero padding only interpolates the grid
    to 1/(pad_factor*n*dt).
    """
    y = trace.intensity
    if y.size < 32:
        raise InsufficientDataError(f"need >= 32 samples, got {y.size}")
    if pad_factor < 1 or int(pad_factor) != pad_factor:
        raise InvalidInputError("pad_factor must be an integer >= 1")
    if window == "hann":
        w = np.hanning(y.size)
    elif window == "rect":
        w = np.ones(y.size)
    else:
        raise InvalidInputError(f"unknown window {window!r}")
    n_fft = int(pad_factor) * y.size
    spectrum = np.fft.rfft(y * w, n=n_fft)
    power = np.abs(spectrum) ** 2 / n_fft
    power[1:] *= 2.0
    if n_fft % 2 == 0:
        power[-1] /= 2.0
    freq = np.fft.rfftfreq(n_fft, trace.dt)
    return BeatSpectrum(
        freq=freq,
        power=power,
        window=window,
        pad_factor=int(pad_factor),
        native_resolution=1.0 / (y.size * trace.dt),
    )


# ---------------------------------------------------------------------------
# peak detection
# ---------------------------------------------------------------------------

@dataclass
class BeatPeak:
    nu: float  # THz
    nu_err: float  # THz
    energy: float  # meV, h * nu
    energy_err: float  # meV
    amplitude: float  # power relative to the strongest peak
    rank: str  # "major" or "minor"


def find_peaks(spectrum: BeatSpectrum, min_prominence=0.05, min_snr=None):
    """Significant spectral peaks with parabolically refined frequencies.

    Peaks must (a) be local maxima with prominence at least
    ``min_prominence`` times the strongest in-band power, (b) sit above the
    zero-frequency lobe (1.5 native bins), and (c) stand out of the spectral
    floor: power at least ``min_snr`` times the in-band median, where the
    default threshold grows logarithmically with the bin count so that pure
    noise yields an empty list.  The largest surviving peak is ranked
    "major", the rest "minor"; no peak is not an error.
    """
    freq, power = spectrum.freq, spectrum.power
    start = int(np.searchsorted(freq, DC_EXCLUSION_BINS * spectrum.native_resolution))
    band = power[start:]
    if band.size < 3 or band.max() <= 0:
        return []
    if min_snr is None:
        native_bins = max(band.size // spectrum.pad_factor, 2)
        min_snr = 2.0 * np.log(20.0 * native_bins) / np.log(2.0)
    idx, _ = scipy.signal.find_peaks(band, prominence=min_prominence * band.max())
    idx = idx + start
    median = float(np.median(band))
    if median > 0:
        idx = idx[power[idx] >= min_snr * median]
    if idx.size == 0:
        return []

    df = freq[1] - freq[0]
    peaks = []
    for i in sorted(idx, key=lambda j: power[j], reverse=True):
        if 0 < i < power.size - 1 and power[i - 1] > 0 and power[i + 1] > 0:
            a, b, g = np.log(power[i - 1 : i + 2])
            denom = a - 2.0 * b + g
            shift = 0.5 * (a - g) / denom if denom < 0 else 0.0
            shift = float(np.clip(shift, -0.5, 0.5))
        else:
            shift = 0.0
        nu = float(freq[i] + shift * df)
        nu_err = max(spectrum.native_resolution / 2.0, abs(shift) * df)
        peaks.append(BeatPeak(
            nu=nu,
            nu_err=float(nu_err),
            energy=thz_to_mev(nu),
            energy_err=H_MEV_PS * nu_err,
            amplitude=float(power[i] / power[idx].max()),
            rank="minor",
        ))
    peaks[0].rank = "major"
    return peaks


# ---------------------------------------------------------------------------
# assignment
# ---------------------------------------------------------------------------

@dataclass
class Candidate:
    """One state pair whose energy split matches a beat peak."""

    pair: tuple  # (StateId, StateId)
    split: float  # meV, override value when the pair has one
    mismatch: float  # meV, |split - peak energy|
    overridden: bool

    @property
    def label(self) -> str:
        return f"{self.pair[0]}-{self.pair[1]}"


@dataclass
class BeatAssignment:
    peak: BeatPeak
    candidates: list = field(default_factory=list)


def _candidate_pairs(catalog: StateCatalog, adjacent_series=("S", "D")):
    """Default pair pool: same-n S/D/F pairs and (n, n+-1) S/D pairs.

    Pairs known only through a split override (partners without their own
    record) are included as well.
    """
    pairs = set(catalog.split_overrides)
    recs = [r.id for r in catalog.records if r.id.series in ("S", "D", "F")]
    for i, a in enumerate(recs):
        for b in recs[i + 1:]:
            if a.series_color != b.series_color:
                continue
            dn = abs(a.n - b.n)
            if dn == 0:
                pairs.add(frozenset((a, b)))
            elif dn == 1 and a.series in adjacent_series and b.series in adjacent_series:
                pairs.add(frozenset((a, b)))
    return pairs


def assign_peaks(peaks, catalog: StateCatalog, tolerance=DEFAULT_TOLERANCE_MEV,
                 reference=None):
    """Match peaks to state pairs whose split lies within ``tolerance`` meV.

    Splits prefer the catalog's override values over plain energy
    differences.  When ``reference`` names the state whose trace was
    analyzed, only pairs involving that state (any sublevel) are considered,
    mirroring how beat partners are attributed per trace.  Candidates are
    sorted by mismatch; a peak with no candidate keeps an empty list.
    """
    if len(catalog) == 0:
        raise InvalidInputError("catalog is empty")
    pairs = _candidate_pairs(catalog)
    if reference is not None:
        ref = _as_state(reference)
        pairs = {
            pair for pair in pairs
            if any(s.n == ref.n and s.series == ref.series
                   and s.series_color == ref.series_color for s in pair)
        }
    ref = _as_state(reference) if reference is not None else None

    def orient(pair):
        a, b = sorted(pair)
        if ref is not None and (b.n, b.series) == (ref.n, ref.series) \
                and (a.n, a.series) != (ref.n, ref.series):
            a, b = b, a  # print the analyzed state first, like the reports do
        return a, b

    assignments = []
    for peak in peaks:
        candidates = []
        for pair in pairs:
            a, b = orient(pair)
            split = energy_split(a, b, catalog)
            mismatch = abs(split.value - peak.energy)
            if mismatch <= tolerance:
                candidates.append(Candidate(
                    pair=(a, b), split=split.value, mismatch=mismatch,
                    overridden=split.overridden,
                ))
        candidates.sort(key=lambda c: (c.mismatch, c.label))
        assignments.append(BeatAssignment(peak=peak, candidates=candidates))
    return assignments


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class BeatReport:
    """Structured result of the full beat pipeline for one trace."""

    state: str | None
    spectrum: BeatSpectrum
    assignments: list

    def to_json_obj(self):
        rows = []
        for a in self.assignments:
            rows.append({
                "rank": a.peak.rank,
                "freq_thz": a.peak.nu,
                "freq_err_thz": a.peak.nu_err,
                "energy_mev": a.peak.energy,
                "energy_err_mev": a.peak.energy_err,
                "relative_power": a.peak.amplitude,
                "candidates": [
                    {"pair": c.label, "split_mev": c.split,
                     "mismatch_mev": c.mismatch, "overridden": c.overridden}
                    for c in a.candidates
                ],
            })
        return {"state": self.state, "window": self.spectrum.window,
                "pad_factor": self.spectrum.pad_factor,
                "native_resolution_thz": self.spectrum.native_resolution,
                "peaks": rows}

    def to_text(self):
        lines = [f"{'rank':<6} {'freq (THz)':<18} {'energy (meV)':<18} "
                 f"{'rel. power':<11} candidates"]
        if not self.assignments:
            lines.append("(no significant peaks)")
        for a in self.assignments:
            cand = ", ".join(
                f"{c.label} ({c.split:.2f} meV, d={c.mismatch:.3f})"
                for c in a.candidates[:3]
            ) or "-"
            lines.append(
                f"{a.peak.rank:<6} {a.peak.nu:.4f} +- {a.peak.nu_err:.4f}   "
                f"{a.peak.energy:.4f} +- {a.peak.energy_err:.4f}   "
                f"{a.peak.amplitude:<11.3f} {cand}"
            )
        return "\n".join(lines) + "\n"


def beat_report(trace: TimeTrace, catalog: StateCatalog, *, state=None,
                detrend_method="emg_residual", moving_mean_width=None,
                window="hann", pad_factor=4, min_prominence=0.05,
                tolerance=DEFAULT_TOLERANCE_MEV, window_start=None,
                window_stop=None, tail_level_frac=1e-3,
                irf_fwhm=DEFAULT_TIME_FWHM) -> BeatReport:
    """Full pipeline: detrend, spectrum, peak picking, pair assignment.

    The analysis window is located on the raw trace: it opens one response
    FWHM after the peak (skipping the prompt spike) and closes where the
    signal has decayed to ``tail_level_frac`` of its peak, unless explicit
    bounds are given.
    """
    residual = detrend(trace, method=detrend_method, width=moving_mean_width,
                       irf_hint=irf_fwhm)
    peak_time = float(trace.t[int(np.argmax(trace.intensity))])
    start = peak_time + irf_fwhm if window_start is None else window_start
    stop = window_stop
    if stop is None and tail_level_frac:
        stop = max(signal_end(trace, tail_level_frac), start + 32 * trace.dt)
    windowed = analysis_window(residual, start=start, stop=stop)
    spectrum = power_spectrum(windowed, window=window, pad_factor=pad_factor)
    peaks = find_peaks(spectrum, min_prominence=min_prominence)
    assignments = assign_peaks(peaks, catalog, tolerance=tolerance,
                               reference=state)
    return BeatReport(
        state=str(_as_state(state)) if state is not None else None,
        spectrum=spectrum,
        assignments=assignments,
    )
