"""Exception hierarchy for the toolkit.

Failed property checks are never raised; they come back as data in
`PropertyCheck` records. Exceptions signal that a computation could not be
carried out at all.
"""
from __future__ import annotations


class FkdvError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FkdvError, ValueError):
    """Invalid configuration or command-line parameters."""


class NearSingularityError(FkdvError):
    """Kernel derivative requested too close to the origin."""


class NonpositiveLambdaError(FkdvError):
    """The trough-gap constant came out nonpositive (under-resolved kernel)."""


class GridMismatchError(FkdvError, ValueError):
    """Samples and kernel table live on incompatible grids."""


class BaseMismatchError(FkdvError, ValueError):
    """Cosine series with different base wavenumbers were combined."""


class NewtonError(FkdvError):
    """Base class for corrector failures."""


class NoConvergenceError(NewtonError):
    """Newton iteration hit its iteration cap."""


class InadmissibleStateError(NewtonError):
    """Converged state violates phi <= mu beyond tolerance."""


class LeftAdmissibleSetError(NewtonError):
    """Damping could not keep the iterate inside phi <= mu."""


class InsufficientTailError(FkdvError):
    """Too few branch points to extrapolate the highest wave."""


class InsufficientModesError(FkdvError):
    """Too few resolved coefficients for a decay fit."""


class WindowTooNarrowError(FkdvError):
    """Crest fit window is empty or spans less than the required ratio."""
