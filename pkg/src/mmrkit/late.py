"""Identified set for extrapolating a local average treatment effect.

With a binary instrument, binary treatment, bounded outcomes, and a policy
that shifts the propensity score up by alpha, the welfare contrast is the
gap between the policy-relevant effect and the status-quo effect,

    U = m1/(alpha + m2) - m1/m2 + (1/(alpha + m2)) * int_{p1}^{p1+alpha} MTE,

where m1, m2 are the reduced-form and first-stage coefficients. Holding
(mu1, mu2) = (m1, m2) fixed, the extrapolation integral is free on the new
complier segment, so the contrast is identified only up to

    mu1/(alpha+mu2) - mu1/mu2 -+ alpha/(alpha+mu2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import (
    DegenerateFirstStage,
    InfeasibleInputs,
    InfeasiblePropensities,
)
from .identified_set import WelfareBounds
from .numerics import Tolerance, integrate

_FEAS_SLACK = 1e-12


@dataclass(frozen=True)
class LateInputs:
    """Propensity shift and reduced-form/first-stage coefficients."""

    alpha: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InfeasibleInputs(f"alpha must lie in (0, 1), got {self.alpha}")
        if abs(self.mu1) > self.mu2 + _FEAS_SLACK:
            raise InfeasibleInputs(f"need |mu1| <= mu2, got mu1={self.mu1}, mu2={self.mu2}")
        if not -_FEAS_SLACK <= self.mu2 <= 1.0 - self.alpha + _FEAS_SLACK:
            raise InfeasibleInputs(
                f"need 0 <= mu2 <= 1 - alpha, got mu2={self.mu2}, alpha={self.alpha}"
            )


def late_bounds(inputs: LateInputs) -> WelfareBounds:
    """Closed-form extrema of the identified set for the welfare contrast."""
    if inputs.mu2 == 0.0:
        raise DegenerateFirstStage("mu2 = 0: no compliers to extrapolate from")
    a, m1, m2 = inputs.alpha, inputs.mu1, inputs.mu2
    base = m1 / (a + m2) - m1 / m2
    spread = a / (a + m2)
    return WelfareBounds(lower=base - spread, upper=base + spread)


def late_nontrivial(inputs: LateInputs) -> bool:
    """Whether the identified set strictly straddles zero."""
    b = late_bounds(inputs)
    return b.lower < 0.0 < b.upper


def late_welfare_contrast(
    alpha: float,
    p0: float,
    p1: float,
    mte: Callable[[float], float],
    tol: Tolerance = Tolerance(1e-11, 1e-11, 200),
) -> float:
    """Welfare contrast of a fully specified state (p0, p1, MTE)."""
    if not 0.0 < alpha < 1.0:
        raise InfeasibleInputs(f"alpha must lie in (0, 1), got {alpha}")
    if not (0.0 <= p0 <= p1 and p1 + alpha <= 1.0 + _FEAS_SLACK):
        raise InfeasiblePropensities(
            f"need 0 <= p0 <= p1 and p1 + alpha <= 1, got p0={p0}, p1={p1}, alpha={alpha}"
        )
    m2 = p1 - p0
    if m2 == 0.0:
        raise DegenerateFirstStage("p0 = p1: first stage is degenerate")
    m1 = integrate(mte, p0, p1, tol)
    tail = integrate(mte, p1, min(p1 + alpha, 1.0), tol)
    return m1 / (alpha + m2) - m1 / m2 + tail / (alpha + m2)
