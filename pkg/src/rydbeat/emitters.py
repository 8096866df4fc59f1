"""Coherent emitter sets: what the pump pulse actually excites.

An :class:`Emitter` is one decaying oscillator (energy relative to a
reference, lifetime, complex amplitude).  An :class:`EmitterSet` bundles
several of them with the two global phenomenological knobs: the cross-term
visibility (how much the states actually interfere) and a pure dephasing
rate that shortens the coherence time below twice the lifetime.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ._validation import check_nonnegative, check_positive
from .catalog import StateCatalog, StateId, _as_state
from .errors import InvalidInputError

#: Default temporal response: pulse duration and streak-camera resolution
#: combined in quadrature, sqrt(2.44^2 + 0.8^2) ps FWHM.
DEFAULT_TIME_FWHM = 2.5678
#: Default spectrometer resolution on the CCD (meV FWHM).
DEFAULT_ENERGY_FWHM = 0.2


@dataclass(frozen=True)
class InstrumentResponse:
    """Gaussian detection response in time and energy (both FWHM)."""

    time_fwhm: float = DEFAULT_TIME_FWHM  # ps
    energy_fwhm: float = DEFAULT_ENERGY_FWHM  # meV

    def __post_init__(self):
        check_positive(self.time_fwhm, "time_fwhm")
        check_positive(self.energy_fwhm, "energy_fwhm")


@dataclass(frozen=True)
class Emitter:
    """One decaying emitter of the coherent superposition."""

    energy: float  # meV, relative to the configured reference
    lifetime: float  # ps
    amplitude: float = 1.0
    phase: float = 0.0  # radians
    state: StateId | None = None

    def __post_init__(self):
        check_positive(self.lifetime, "lifetime")
        check_nonnegative(self.amplitude, "amplitude")


@dataclass(frozen=True)
class EmitterSet:
    """Emitters plus the global coherence knobs.

    ``cross_visibility`` scales the interference cross terms (1 = fully
    coherent excitation, 0 = independent populations).
    ``pure_dephasing_rate`` is the extra phase-randomization rate in 1/ps;
    it damps beats at twice the rate it damps the field autocorrelation.
    ``shg_prompt_amplitude`` adds an incoherent pulse-shaped intensity spike
    at t = 0.
    """

    emitters: tuple
    cross_visibility: float = 1.0
    pure_dephasing_rate: float = 0.0  # 1/ps
    shg_prompt_amplitude: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "emitters", tuple(self.emitters))
        if not 0 <= self.cross_visibility <= 1:
            raise InvalidInputError(
                f"cross_visibility must be in [0, 1], got {self.cross_visibility}"
            )
        check_nonnegative(self.pure_dephasing_rate, "pure_dephasing_rate")
        check_nonnegative(self.shg_prompt_amplitude, "shg_prompt_amplitude")

    def __len__(self):
        return len(self.emitters)

    def with_(self, **kwargs) -> "EmitterSet":
        return replace(self, **kwargs)


def emitters_from_catalog(catalog: StateCatalog, states, amplitudes=None,
                          phases=None, reference="2P", use_split_overrides=True,
                          **set_kwargs) -> EmitterSet:
    """Build an :class:`EmitterSet` from catalog states.

    Energies are taken relative to ``reference`` (only differences matter
    downstream).  When ``use_split_overrides`` is set, states after the first
    are repositioned so that their separation from the first state matches
    the catalog's override value when one exists; beat frequencies then land
    on the high-precision splits instead of the coarser table energies.
    """
    if not states:
        raise InvalidInputError("need at least one state")
    ids = [_as_state(s) for s in states]
    if amplitudes is None:
        amplitudes = [1.0] * len(ids)
    if phases is None:
        phases = [0.0] * len(ids)
    if len(amplitudes) != len(ids) or len(phases) != len(ids):
        raise InvalidInputError("amplitudes/phases must match states one-to-one")
    e_ref = catalog.get(reference).energy
    anchor = catalog.get(ids[0])
    anchor_energy = (anchor.energy - e_ref) * 1e3
    emitters = []
    for sid, amp, phase in zip(ids, amplitudes, phases):
        rec = catalog.get(sid)
        energy = (rec.energy - e_ref) * 1e3
        if use_split_overrides and sid != anchor.id:
            override = catalog.split_overrides.get(frozenset((anchor.id, sid)))
            if override is not None:
                sign = 1.0 if rec.energy >= anchor.energy else -1.0
                energy = anchor_energy + sign * override
        emitters.append(
            Emitter(energy=energy, lifetime=rec.lifetime, amplitude=amp,
                    phase=phase, state=sid)
        )
    return EmitterSet(emitters=tuple(emitters), **set_kwargs)
