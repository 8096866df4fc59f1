"""rydbeat: Rydberg-exciton decay, quantum-beat and coherence toolkit.

Forward-simulates the three measured signal shapes (time traces, time-energy
spectrograms, interferometer fringe pictures) from a catalog of exciton
states, and recovers lifetimes, coherence times and beat assignments from
such data.
"""

__version__ = "0.1.0"

from .catalog import (
    EnergySplit,
    StateCatalog,
    StateId,
    StateRecord,
    default_catalog,
    energy_split,
    parse_label,
)
from .constants import H_MEV_PS, HBAR_MEV_PS, inverse_linewidth, mev_to_thz, thz_to_mev
from .emitters import Emitter, EmitterSet, InstrumentResponse, emitters_from_catalog
from .rydberg import (
    RydbergModel,
    calibrate_lifetime_scale,
    check_linewidth_consistency,
    default_model,
    fit_rydberg_energies,
    predicted_lifetime,
)
from .signals import (
    FringeGeometry,
    FringeImage,
    Spectrogram,
    TimeTrace,
    add_noise,
    field_amplitude,
    fringe_image,
    g1,
    intensity_trace,
    spectrogram,
)
from .fitting import (
    ContrastDecayModel,
    EmgModel,
    FitResult,
    FringeModel,
    analyze_fringe_stack,
    contrast_decay_eval,
    emg_eval,
    fit_contrast_decay,
    fit_fringe_slice,
    fit_lifetime,
    fringe_eval,
    least_squares,
    validate_t2_bound,
)
from .beats import (
    BeatAssignment,
    BeatPeak,
    BeatReport,
    BeatSpectrum,
    Candidate,
    assign_peaks,
    beat_report,
    detrend,
    find_peaks,
    power_spectrum,
)
from .estimators import (
    BeatAnalyzer,
    ContrastDecayFitter,
    FringeFitter,
    LifetimeFitter,
)

__all__ = [
    "__version__",
    # constants / conversions
    "H_MEV_PS", "HBAR_MEV_PS", "thz_to_mev", "mev_to_thz", "inverse_linewidth",
    # catalog
    "StateId", "StateRecord", "StateCatalog", "EnergySplit",
    "default_catalog", "energy_split", "parse_label",
    # scaling
    "RydbergModel", "predicted_lifetime", "calibrate_lifetime_scale",
    "fit_rydberg_energies", "default_model", "check_linewidth_consistency",
    # dynamics
    "Emitter", "EmitterSet", "InstrumentResponse", "emitters_from_catalog",
    "TimeTrace", "Spectrogram", "FringeImage", "FringeGeometry",
    "field_amplitude", "intensity_trace", "spectrogram", "g1", "fringe_image",
    "add_noise",
    # fitting
    "FitResult", "least_squares", "EmgModel", "FringeModel",
    "ContrastDecayModel", "emg_eval", "fringe_eval", "contrast_decay_eval",
    "fit_lifetime", "fit_fringe_slice", "fit_contrast_decay",
    "validate_t2_bound", "analyze_fringe_stack",
    # beats
    "BeatSpectrum", "BeatPeak", "BeatAssignment", "BeatReport", "Candidate",
    "detrend", "power_spectrum", "find_peaks", "assign_peaks", "beat_report",
    # estimators
    "LifetimeFitter", "FringeFitter", "ContrastDecayFitter", "BeatAnalyzer",
]
