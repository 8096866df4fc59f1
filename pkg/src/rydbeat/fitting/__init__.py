from .engine import FitResult, least_squares
from .models import (
    ContrastDecayModel,
    EmgModel,
    FringeModel,
    contrast_decay_eval,
    emg_eval,
    fringe_eval,
)
from .pipelines import (
    CoherenceResult,
    analyze_fringe_stack,
    fit_contrast_decay,
    fit_fringe_slice,
    fit_lifetime,
    validate_t2_bound,
)

__all__ = [
    "FitResult",
    "least_squares",
    "EmgModel",
    "FringeModel",
    "ContrastDecayModel",
    "emg_eval",
    "fringe_eval",
    "contrast_decay_eval",
    "fit_lifetime",
    "fit_fringe_slice",
    "fit_contrast_decay",
    "validate_t2_bound",
    "analyze_fringe_stack",
    "CoherenceResult",
]
