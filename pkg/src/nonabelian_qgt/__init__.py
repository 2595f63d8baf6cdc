"""Non-Abelian quantum geometry of globally degenerate four-band Dirac models."""
from .errors import (GapClosed, GaugeError, MonopoleProximity, NumericalError, RangeError,
                     ResolutionError, StepSizeError, ValidationError)
from .models import FAMILIES, ModelSpec

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "ModelSpec", "GapClosed", "GaugeError", "MonopoleProximity", "NumericalError",
    "RangeError", "ResolutionError", "StepSizeError", "ValidationError", "__version__",
]
