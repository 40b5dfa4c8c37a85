"""Exception types shared across the package.

Conditions that the library reports as *flags* on result objects
(inconclusive classifications, truncated searches, borderline verdicts)
are deliberately not exceptions; only unusable inputs and failed solves
raise.
"""


class LogTorusError(Exception):
    """Base class for all package errors."""


class ConfigError(LogTorusError):
    """Malformed configuration, shape file, or CLI input."""


class EmptyDomain(LogTorusError):
    """A domain rasterized to zero inside cells."""


class AllCellsInside(LogTorusError):
    """The complement is empty, so the boundary has no grid support."""


class EmptyInterior(LogTorusError):
    """Operator assembly was asked for a region with no degrees of freedom."""


class TargetEmpty(LogTorusError):
    """A harmonic-measure target set contains no usable cells."""


class SolverFailure(LogTorusError):
    """A linear or eigenvalue solve did not converge or was singular."""


class RhoInSpectrum(SolverFailure):
    """The requested rho is (numerically) a pencil eigenvalue; the
    boundary-value problem is singular."""


class RhoAboveCritical(LogTorusError):
    """An operation that requires 0 < rho < rho(D) was called above the
    critical value (detected directly or via a failed sign property)."""


class NearIntegerRho(LogTorusError):
    """Fourier-synthesis kernels need dist(rho, Z) bounded away from 0."""


class MassSymmetryViolated(LogTorusError):
    """Integer-rho representation: the measure carries nonzero resonant
    Fourier mass, so it is not the residual of a whole-torus subfunction."""


class ArcTooWide(LogTorusError):
    """Trigonometric majorant requested on an arc of width >= pi/rho."""


class EpsTooSmall(LogTorusError):
    """Mollification radius below the grid resolution limit."""


class IterationLimit(SolverFailure):
    """An iterative solver hit its sweep budget without certifying."""


class FitUnstable(LogTorusError):
    """A least-squares slope fit fell below its R^2 requirement."""


class NotSeparating(LogTorusError):
    """The lift meets the reference circle in more than one arc, so the
    quadrilateral modulus construction does not apply."""


class NotSimplyConnected(LogTorusError):
    """The quadrilateral between crosscuts is not a single connected
    piece."""
