"""Omitted-variable-bias breakdown analysis.

Given a medium-regression estimate b ~ N(beta_med, sigma^2) and a
sensitivity bound on selection on unobservables, the long-regression
coefficient is identified only up to [beta_med - k, beta_med + k]. The
naive breakdown point is k_tilde(b) = b; the decision-theoretic one asks
for the largest k at which the minimax-regret rule still assigns the new
policy with no hedging, i.e. the largest k with rho*(k, sigma) <= b,
whose closed inversion is k_bar = b / (1 - 2 Phi(-b/sigma)).

The root-finding path is the source of truth; the closed inversion is
verified against it on every call.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

from .errors import NoConvergence, NonPositiveEstimate
from .mmr import REGIME_COEF, solve_rho_star
from .numerics import Tolerance, find_root
from .rules import DecisionRule, Linear, Threshold

_INVERSION_TOL = 1e-8


class OvbInputs:
    """Primitives of the sensitivity bound k.

    var_y_perp: variance of the outcome residualized on treatment and
    observables (>= 0); var_d_perp: variance of the treatment residualized
    on observables (> 0); r2_dx: R^2 of treatment on observables in [0, 1);
    rbar_d: relative strength of selection on unobservables (>= 0);
    sigma: standard error of the medium-regression estimate (> 0).
    """

    __slots__ = ("var_y_perp", "var_d_perp", "r2_dx", "rbar_d", "sigma")

    def __init__(self, var_y_perp, var_d_perp, r2_dx, rbar_d, sigma):
        if var_y_perp < 0.0:
            raise ValueError("var_y_perp must be nonnegative")
        if var_d_perp <= 0.0:
            raise ValueError("var_d_perp must be strictly positive")
        if not 0.0 <= r2_dx < 1.0:
            raise ValueError("r2_dx must lie in [0, 1)")
        if rbar_d < 0.0:
            raise ValueError("rbar_d must be nonnegative")
        if sigma <= 0.0:
            raise ValueError("sigma must be strictly positive")
        self.var_y_perp = float(var_y_perp)
        self.var_d_perp = float(var_d_perp)
        self.r2_dx = float(r2_dx)
        self.rbar_d = float(rbar_d)
        self.sigma = float(sigma)


def dsb_k(inputs: OvbInputs) -> float:
    """Identified-set radius; +inf once rbar_d >= sqrt(1 - r2_dx)."""
    free = 1.0 - inputs.r2_dx - inputs.rbar_d**2
    if inputs.rbar_d >= math.sqrt(1.0 - inputs.r2_dx) or free <= 0.0:
        return math.inf
    return math.sqrt(
        inputs.var_y_perp / inputs.var_d_perp * inputs.rbar_d**2 * inputs.r2_dx / free
    )


def naive_breakdown(beta_hat: float) -> float:
    """Identification breakdown point k_tilde = beta_hat (positive estimates)."""
    if beta_hat <= 0.0:
        raise NonPositiveEstimate(f"need beta_hat > 0, got {beta_hat}")
    return float(beta_hat)


def ovb_rule(k: float, sigma: float) -> DecisionRule:
    """MMR rule for the scalar problem: threshold below the regime cut,
    linear ramp with half-width rho*(k, sigma) above it."""
    if k < 0.0:
        raise ValueError("k must be nonnegative")
    if sigma <= 0.0:
        raise ValueError("sigma must be strictly positive")
    if k <= REGIME_COEF * sigma:
        return Threshold(c=0.0)
    return Linear(rho=solve_rho_star(k, sigma))


def decision_breakdown(beta_hat: float, sigma: float) -> float:
    """Largest k at which the MMR rule still assigns the policy outright.

    Solves rho*(k) = beta_hat by root-finding over k (rho* is strictly
    increasing in k), with the closed inversion
    beta_hat / (1 - 2 Phi(-beta_hat/sigma)) checked to 1e-8 agreement.
    At beta_hat = 0 the limit sqrt(pi/2) * sigma is returned. For negative
    estimates the symmetric convention k_bar(b) = k_bar(-b) applies; pass
    the magnitude explicitly.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be strictly positive")
    if beta_hat < 0.0:
        raise NonPositiveEstimate(f"need beta_hat >= 0, got {beta_hat}")
    cut = REGIME_COEF * sigma
    if beta_hat == 0.0:
        return cut

    # near the cut rho*(cut*(1+e)) ~ sigma*sqrt(6e); pick e so the bracket
    # starts below beta_hat, clamping to the limit for sub-resolution inputs
    eps0 = min(1e-9, beta_hat**2 / (12.0 * sigma**2))
    if eps0 <= 1e-12:
        return cut
    lo = cut * (1.0 + eps0)
    hi = 2.0 * cut
    for _ in range(200):
        if solve_rho_star(hi, sigma) > beta_hat:
            break
        hi *= 2.0
    else:
        raise NoConvergence("no upper bracket for the breakdown point")

    k_bar = find_root(
        lambda k: solve_rho_star(k, sigma) - beta_hat, lo, hi, Tolerance(1e-12, 1e-12, 300)
    )
    closed = beta_hat / erf(beta_hat / (math.sqrt(2.0) * sigma))
    if abs(k_bar - closed) > _INVERSION_TOL * max(1.0, abs(closed)):
        raise NoConvergence(
            f"breakdown inversion mismatch: root {k_bar} vs closed form {closed}"
        )
    return k_bar


def breakdown_curve(sigma: float, beta_grid) -> list[tuple[float, float, float]]:
    """Rows (beta_hat, k_tilde, k_bar) over a positive grid of estimates."""
    grid = np.asarray(beta_grid, dtype=float)
    if np.any(grid <= 0.0):
        raise NonPositiveEstimate("all grid entries must be strictly positive")
    return [
        (float(b), naive_breakdown(float(b)), decision_breakdown(float(b), sigma))
        for b in grid
    ]
