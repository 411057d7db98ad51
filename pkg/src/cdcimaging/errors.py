"""Exception and warning types shared across the package."""


class InvalidSceneError(ValueError):
    """Source scene has non-finite, negative, or zero total intensity."""


class NoFiniteInverseError(ValueError):
    """A visibility of exactly 0 or 1 has no finite source-size inverse."""


class TruncationError(RuntimeError):
    """The outcome space could not be truncated below the requested tail mass."""


class ConsistencyError(RuntimeError):
    """An internal numerical invariant was violated (indicates a bug)."""


class InsufficientDataError(ValueError):
    """Not enough events to satisfy a sampling or estimation request."""


class UnidentifiablePhaseError(ValueError):
    """Fringes are flat, so no CDC phase can be located."""


class CalibrationError(ValueError):
    """Phase calibration failed (too few or badly ordered extrema)."""


class DegeneratePhaseWarning(UserWarning):
    """The likelihood barely depends on the phase at the fitted magnitude."""


class PhaseAmbiguityWarning(UserWarning):
    """Only period-pi fringes were supplied; the phase is known modulo pi."""


class FarFieldWarning(UserWarning):
    """Geometry is outside the small-angle regime assumed by the linear kernel."""


class AliasingWarning(UserWarning):
    """Source extent exceeds the unaliased field of view of the detector array."""
