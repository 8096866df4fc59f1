"""Planck-constant bookkeeping and the unit conversions used everywhere.

Internal unit system: energies in meV, times in ps, frequencies in THz.
With these units h and hbar are numerically small and all conversions are
single multiplications.
"""

from __future__ import annotations

from .errors import InvalidInputError

#: Planck constant in meV/THz (equivalently meV*ps).
H_MEV_PS = 4.135667696

#: Reduced Planck constant in meV*ps, hbar = h / (2 pi).
HBAR_MEV_PS = 0.6582119569

#: Conversion between a Gaussian FWHM and its standard deviation.
FWHM_TO_SIGMA = 2.3548200450309493  # 2*sqrt(2*ln 2)


def thz_to_mev(nu):
    """Convert a frequency in THz to the photon/beat energy h*nu in meV.

    Parameters
    ----------
    nu : float
        Frequency in THz, must be >= 0.
    """
    if nu < 0:
        raise InvalidInputError(f"frequency must be >= 0, got {nu}")
    return H_MEV_PS * nu


def mev_to_thz(e):
    """Convert an energy in meV to the equivalent frequency e/h in THz."""
    if e < 0:
        raise InvalidInputError(f"energy must be >= 0, got {e}")
    return e / H_MEV_PS


def inverse_linewidth(gamma):
    """Lifetime lower bound hbar/Gamma (ps) implied by a linewidth Gamma (meV).

    The map is an involution up to units: applying it twice returns the
    input value.
    """
    if gamma <= 0:
        raise InvalidInputError(f"linewidth must be > 0, got {gamma}")
    return HBAR_MEV_PS / gamma
