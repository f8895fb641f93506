"""Exception types shared across the package."""


class MorganError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSystem(MorganError):
    """State-space data violates a structural requirement (shape, rank, m <= l <= n)."""


class NotControllable(InvalidSystem):
    """The pair (A, B) is not controllable."""


class DegreeExceeded(MorganError):
    """A polynomial entry has higher degree than the declared row/column degree."""


class Inconsistent(MorganError):
    """A linear constraint system over the free parameters has no solution."""


class MissingParameter(MorganError):
    """An instantiation assignment does not cover every free parameter."""

    def __init__(self, param):
        super().__init__(f"no value assigned for parameter {param}")
        self.param = param


class NotSolvable(MorganError):
    """A numeric feedback-row system is inconsistent for the chosen instantiation."""


class SingularQ(MorganError):
    """No basis completion makes Q = [Q_A, Q_B] invertible (should be impossible)."""


class SingularBstar(MorganError):
    """The decoupling matrix of a square system that passed the rank tests is singular.

    This signals an internal inconsistency and is never silently skipped.
    """


class VerificationFailed(MorganError):
    """The exact closed-loop transfer function is not the expected diagonal."""

    def __init__(self, message, entry=None):
        super().__init__(message)
        self.entry = entry


class TargetDegreeMismatch(MorganError):
    """A target polynomial has the wrong degree for the requested assignment."""


class DegenerateNumerator(MorganError):
    """det(C_f * S_f(s)) is identically zero (non-right-invertible configuration)."""


class NoSolutionWithinScope(MorganError):
    """A constraint outside the supported (affine) class was encountered."""
