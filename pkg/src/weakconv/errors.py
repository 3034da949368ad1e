"""Exception hierarchy shared by all modules."""


class WeakConvError(Exception):
    """Base class for all package errors."""


class DomainError(WeakConvError, ValueError):
    """An argument lies outside the domain of a modulus or operation."""


class PreconditionError(WeakConvError, ValueError):
    """A stated precondition of an operation does not hold."""


class EmptySetError(WeakConvError):
    """A set (or an intersection) turned out to be empty."""


class UnboundedSetError(WeakConvError):
    """An operation needs a bounded set."""


class ConditionNotSatisfied(WeakConvError):
    """The root conditions for ``delta(t - s) - gamma(t)`` fail.

    ``s0`` carries the largest level for which the conditions were found
    to hold (0.0 when they hold nowhere).
    """

    def __init__(self, message, s0=0.0):
        super().__init__(f"condition not satisfied: {message} (diagnosed s0={s0:.6g})")
        self.s0 = s0


class TubeError(WeakConvError):
    """A point lies outside the tube, or the tube certificate is invalid."""


class HypothesisViolation(WeakConvError):
    """Numerical evidence contradicts a hypothesis (e.g. non-unique projection)."""


class SceneError(WeakConvError, ValueError):
    """Malformed scene or experiment configuration."""
