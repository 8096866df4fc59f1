"""Rydberg scaling laws for the exciton series.

Level energies follow the quantum-defect form E_n = E_g - Ry*/(n - delta_L)^2
and lifetimes grow as tau = A_L * (n - delta_L)^3 up to the plateau that sets
in around n = 7.  The series limit E_g and effective Rydberg energy Ry* are
not tabulated anywhere; they are recovered by least squares from the catalog
energies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import StateCatalog, _as_state
from .errors import InsufficientDataError, InvalidInputError, NotFoundError

#: Quantum defects of the even-parity series (dimensionless).
DEFAULT_DEFECTS = {"S": 0.56, "D": 0.08}

#: n at and above which measured lifetimes stay flat.
DEFAULT_PLATEAU_N = 7

#: Calibration range (n_min, n_max) for the lifetime scale A_L.  n = 3 is
#: excluded: its measured lifetime sits off the cubic law anchored at n >= 4.
DEFAULT_CALIBRATION_RANGE = (4, 6)


@dataclass(frozen=True)
class RydbergModel:
    """Quantum-defect scaling model for level energies and lifetimes."""

    gap_energy: float  # eV, series limit
    rydberg_energy: float  # meV
    defects: dict = field(default_factory=lambda: dict(DEFAULT_DEFECTS))
    lifetime_scale: dict = field(default_factory=dict)  # series -> A_L in ps
    plateau_n: int = DEFAULT_PLATEAU_N
    plateau_lifetime: dict = field(default_factory=dict)  # series -> ps

    def __post_init__(self):
        for series, d in self.defects.items():
            if not 0 <= d < 1:
                raise InvalidInputError(f"defect for {series} must be in [0, 1), got {d}")
        for series, a in self.lifetime_scale.items():
            if a <= 0:
                raise InvalidInputError(f"lifetime scale for {series} must be > 0, got {a}")
        if self.plateau_n < 2:
            raise InvalidInputError(f"plateau_n must be >= 2, got {self.plateau_n}")

    def effective_n(self, state) -> float:
        sid = _as_state(state)
        try:
            return sid.n - self.defects[sid.series]
        except KeyError:
            raise NotFoundError(f"series {sid.series} has no quantum defect") from None

    def energy(self, state) -> float:
        """Model energy E_g - Ry*/(n*)^2 in eV."""
        return self.gap_energy - self.rydberg_energy * 1e-3 / self.effective_n(state) ** 2


def predicted_lifetime(state, model: RydbergModel) -> float:
    """Scaling-law lifetime A_L*(n - delta_L)^3 in ps, clamped on the plateau."""
    sid = _as_state(state)
    if sid.series not in model.defects or sid.series not in model.lifetime_scale:
        raise NotFoundError(f"series {sid.series} not covered by the model")
    if sid.n >= model.plateau_n and sid.series in model.plateau_lifetime:
        return model.plateau_lifetime[sid.series]
    return model.lifetime_scale[sid.series] * model.effective_n(sid) ** 3


def calibrate_lifetime_scale(catalog: StateCatalog, series, defect,
                             n_range=DEFAULT_CALIBRATION_RANGE):
    """Least-squares scale A_L through the measured lifetimes of one series.

    Minimizes sum_n (tau_n - A*(n - delta)^3)^2 over records with
    n_range[0] <= n <= n_range[1].  Multiplet sublevels are averaged per n.
    """
    taus = {}
    for rec in catalog.series(series):
        if n_range[0] <= rec.id.n <= n_range[1]:
            taus.setdefault(rec.id.n, []).append(rec.lifetime)
    if not taus:
        raise InsufficientDataError(f"no {series} states with n in {n_range}")
    x = np.array([(n - defect) ** 3 for n in sorted(taus)])
    y = np.array([np.mean(taus[n]) for n in sorted(taus)])
    return float(np.dot(x, y) / np.dot(x, x))


def plateau_lifetimes(catalog: StateCatalog, plateau_n=DEFAULT_PLATEAU_N):
    """Mean measured lifetime at n >= plateau_n, per series."""
    sums = {}
    for rec in catalog.records:
        if rec.id.n >= plateau_n and rec.id.series_color == "yellow":
            sums.setdefault(rec.id.series, []).append(rec.lifetime)
    return {series: float(np.mean(vals)) for series, vals in sums.items()}


def fit_rydberg_energies(catalog: StateCatalog, series, n_range,
                         defect=None, color="yellow"):
    """Fit (E_g, Ry*) of E_n = E_g - Ry*/(n - delta)^2 to catalog energies.

    The defect is held fixed (default: the series value from
    ``DEFAULT_DEFECTS``), which makes the fit linear in (E_g, Ry*).
    Multiplet sublevels are averaged per n.

    Returns
    -------
    (gap_energy_eV, rydberg_energy_meV, residuals_meV)
        Residuals are data minus model, ordered by n.
    """
    if defect is None:
        try:
            defect = DEFAULT_DEFECTS[series]
        except KeyError:
            raise NotFoundError(f"series {series} has no default defect") from None
    by_n = {}
    for rec in catalog.series(series, color):
        if n_range[0] <= rec.id.n <= n_range[1]:
            by_n.setdefault(rec.id.n, []).append(rec.energy)
    if len(by_n) < 3:
        raise InsufficientDataError(
            f"need >= 3 distinct n for an (E_g, Ry*) fit, got {len(by_n)}"
        )
    ns = np.array(sorted(by_n))
    energies = np.array([np.mean(by_n[n]) for n in ns])
    x = 1.0 / (ns - defect) ** 2
    design = np.column_stack([np.ones_like(x), -x])
    (gap, ry_ev), *_ = np.linalg.lstsq(design, energies, rcond=None)
    residuals = (energies - (gap - ry_ev * x)) * 1e3
    return float(gap), float(ry_ev * 1e3), residuals.tolist()


def default_model(catalog: StateCatalog, calibration_range=DEFAULT_CALIBRATION_RANGE):
    """Build the scaling model used throughout: energies and lifetime scales
    calibrated on the catalog, plateau from the n >= 7 means."""
    gap, ry, _ = fit_rydberg_energies(catalog, "S", (3, 9))
    scales = {
        series: calibrate_lifetime_scale(catalog, series, DEFAULT_DEFECTS[series],
                                         calibration_range)
        for series in ("S", "D")
    }
    return RydbergModel(
        gap_energy=gap,
        rydberg_energy=ry,
        lifetime_scale=scales,
        plateau_lifetime=plateau_lifetimes(catalog),
    )


def check_linewidth_consistency(catalog: StateCatalog, n_sigma=3.0):
    """Compare every state's lifetime against its inverse linewidth.

    S states are expected to satisfy tau ~= hbar/Gamma: the check passes when
    |tau - hbar/Gamma| <= n_sigma * sqrt(err_tau^2 + err_hg^2).  D states are
    expected to outlive their inverse linewidth: tau > hbar/Gamma strictly.
    The 3-sigma default reflects the scatter actually present in the measured
    values (3S sits 2.5 combined sigma off).

    Returns a list of dict rows with a boolean ``ok`` per state.
    """
    rows = []
    for rec in catalog.records:
        if rec.id.series == "P":
            continue
        diff = rec.lifetime - rec.hbar_over_gamma
        combined = float(np.hypot(rec.lifetime_err, rec.hbar_over_gamma_err))
        if rec.id.series == "S":
            ok = abs(diff) <= n_sigma * combined
            criterion = f"|tau - hbar/Gamma| <= {n_sigma:g}*sigma"
        else:
            ok = diff > 0
            criterion = "tau > hbar/Gamma"
        rows.append(
            {
                "state": rec.id.label,
                "series": rec.id.series,
                "lifetime_ps": rec.lifetime,
                "hbar_over_gamma_ps": rec.hbar_over_gamma,
                "difference_ps": diff,
                "combined_sigma_ps": combined,
                "criterion": criterion,
                "ok": bool(ok),
            }
        )
    return rows
