"""Semantic exception hierarchy shared across the toolkit.

Every error raised on a documented failure path derives from
:class:`MmrkitError`, so callers (and the CLI) can separate solver
failures from programming errors.
"""


class MmrkitError(Exception):
    """Base class for all toolkit errors."""


class NoBracket(MmrkitError):
    """Root finding requires a sign change on the supplied interval."""


class NoConvergence(MmrkitError):
    """An iteration budget was exhausted before reaching tolerance."""


class InvalidInterval(MmrkitError):
    """A search interval is empty or inverted."""


class NonFiniteInput(MmrkitError):
    """A finite number was required."""


class DimensionMismatch(MmrkitError):
    """A vector has the wrong length for the study it is paired with."""


class PreconditionViolated(MmrkitError):
    """Inputs lie outside the regime where the operation is defined."""


class UnsupportedRule(MmrkitError):
    """The decision rule has no closed form for the requested quantity."""


class InfeasibleState(MmrkitError):
    """A welfare contrast does not belong to the identified set."""


class NonPositiveEstimate(MmrkitError):
    """Breakdown analysis needs a strictly positive point estimate."""


class DegenerateFirstStage(MmrkitError):
    """The first-stage coefficient is zero."""


class InfeasibleInputs(MmrkitError):
    """Reduced-form coefficients violate the model's feasible set."""


class InfeasiblePropensities(MmrkitError):
    """Propensity scores violate 0 <= p0 <= p1 and p1 + alpha <= 1."""


class InvalidConfig(MmrkitError):
    """A CLI configuration file is malformed or incomplete."""


class ModelMembershipWarning(UserWarning):
    """Diagnostic: a mean vector lies outside the Lipschitz polytope."""


class DegenerateIntervalWarning(UserWarning):
    """Diagnostic: an estimated identified set collapsed to a point."""
