"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`SamplerError`, so the CLI can map them to exit code 2 in one place.
"""

__all__ = [
    "SamplerError",
    "DimensionError",
    "ValidationError",
    "ResolventAtSpectrumError",
    "UnseparableSpectrumError",
    "ContourPlacementError",
    "DomainError",
    "UnsupportedFeedthroughError",
    "PoleCollisionError",
    "DivergentSeriesError",
    "OutsideRegimeError",
]


class SamplerError(Exception):
    """Base class for all library errors."""


class DimensionError(SamplerError, ValueError):
    """Matrix shapes are not conformable."""


class ValidationError(SamplerError, ValueError):
    """A value violates a documented invariant."""


class ResolventAtSpectrumError(SamplerError, ArithmeticError):
    """``sI - A`` is numerically singular at the requested point."""

    def __init__(self, s, msg=None):
        self.s = complex(s)
        super().__init__(msg or f"resolvent evaluated on the spectrum at s={self.s!r}")


class UnseparableSpectrumError(SamplerError):
    """Eigenvalue clusters are too close to be isolated by circles."""


class ContourPlacementError(SamplerError, ValueError):
    """A contour passes through, or too near, the spectrum."""


class DomainError(SamplerError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedFeedthroughError(SamplerError, ValueError):
    """Plant has a nonzero direct feedthrough ``D``."""


class PoleCollisionError(SamplerError, ArithmeticError):
    """An aliasing grid point ``s + j n ws`` hits a plant pole."""

    def __init__(self, n, s, pole):
        self.n = int(n)
        self.s = complex(s)
        self.pole = complex(pole)
        super().__init__(
            f"aliasing term n={self.n} at s={self.s!r} collides with pole {self.pole!r}"
        )


class DivergentSeriesError(SamplerError, ValueError):
    """A series is evaluated outside its region of convergence."""


class OutsideRegimeError(SamplerError, ValueError):
    """RMCF closed form is undefined for these parameters."""
