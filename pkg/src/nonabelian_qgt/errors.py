"""Exception hierarchy shared by all modules.

Validation problems (bad input, wrong gauge request) derive from
``ValidationError``; failures of the numerics themselves (closing gaps,
unresolved windings, integrator drift) derive from ``NumericalError``.
The CLI maps the two bases to exit codes 2 and 3.
"""


class ValidationError(ValueError):
    pass


class GaugeError(ValidationError):
    """A real gauge was requested for a genuinely complex subspace."""


class NumericalError(RuntimeError):
    pass


class MonopoleProximity(NumericalError):
    """The gap at the requested point is below the gap floor."""


class GapClosed(MonopoleProximity):
    """A grid or loop passes through (or too close to) a band touching."""


class RangeError(NumericalError):
    """Real-space hopping reassembly failed at the sampling used."""


class ResolutionError(NumericalError):
    """Phase unwrapping is ambiguous; sample more densely."""


class StepSizeError(NumericalError):
    """Norm drift of a trajectory exceeded the allowed budget."""
