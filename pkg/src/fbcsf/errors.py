"""Exception hierarchy for the fbcsf package.

Every failure mode that a caller might want to branch on gets its own
class.  The CLI maps these onto process exit codes: config problems are
exit 2, geometry construction failures exit 3, solver failures exit 4,
analysis failures exit 5.
"""


class FBCSFError(Exception):
    """Base class for all package errors."""


class ConfigError(FBCSFError):
    """Malformed or inconsistent configuration input."""


class GeometryError(FBCSFError):
    """Domain construction or interrogation failed."""


class NonClosing(GeometryError):
    """Curvature data does not integrate to a closed curve.

    Carries the closure residual (norm of the first-harmonic defect)
    in ``residual``.
    """

    def __init__(self, residual, msg=None):
        self.residual = float(residual)
        super().__init__(msg or f"boundary does not close: residual={residual:.3e}")


class NonConvex(GeometryError):
    """Radius-of-curvature function is not strictly positive."""


class DegenerateContinuum(GeometryError):
    """Width function is constant: every normal is a double normal."""


class RhoTooLarge(GeometryError):
    """Requested contact height exceeds what the domain admits."""


class TangentialContact(GeometryError):
    """Curve grazes a comparison circle; the crossing cannot be classified."""


class SolverError(FBCSFError):
    """Numerical solve failed (root finding, time stepping, ...)."""


class BracketFailure(SolverError):
    """Root bracketing failed: no sign change on the search interval."""


class NoRoot(SolverError):
    """A required root does not exist on the admissible interval."""


class LambdaOutOfRange(SolverError):
    """Oval scale parameter left its admissible interval."""


class OutOfSupport(SolverError):
    """Evaluation requested outside the support of a profile."""


class InvalidScale(SolverError):
    """Scale parameter fails its positivity/admissibility constraint."""


class StepRejected(SolverError):
    """Time step kept violating convexity after repeated halving."""


class FlowError(SolverError):
    """Time stepping broke down (step rejection cascade, NaNs, ...)."""


class NonExtinction(SolverError):
    """Flow reached its step budget without extinguishing."""


class AnalysisError(FBCSFError):
    """Post-processing of a trajectory failed."""


class WindowTooShort(AnalysisError):
    """Fit window contains too few samples to regress."""


class NonPositiveAmplitude(AnalysisError):
    """Profile amplitude extrapolated to a non-positive value."""
