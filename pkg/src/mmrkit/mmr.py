"""Regime classification and the minimax-regret solver.

Writing k = C||x1 - x0|| and sigma1 for the nearest signal's standard
error, the problem splits at k = sqrt(pi/2) * sigma1:

* below it ("point-like"), the unique optimal rule is a symmetric
  threshold on studentized, distance-discounted weights, pinned down by a
  scalar fixed point m0*;
* at it ("boundary"), the nearest-neighbor threshold 1{Y1 >= 0} is
  optimal;
* above it ("large identified set"), infinitely many optimal rules exist;
  the least-randomizing one is the linear ramp with half-width rho*
  solving rho = k * (1 - 2 Phi(-rho/sigma1)), the smooth alternative is
  Phi(Y1 / sigma_tilde) with sigma_tilde = sqrt(2 k^2/pi - sigma1^2), and
  the minimax regret value is k/2.

rho* is solved through the equivalent monotone form
rho = k * erf(rho / (sqrt(2) sigma)), which is cancellation-free near the
regime boundary where rho* -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import erf, erfcx

from .errors import NoConvergence, PreconditionViolated
from .identified_set import StudySet
from .numerics import Tolerance, find_root, maximize_scalar, std_normal_cdf, std_normal_pdf
from .rules import CoinFlip, DecisionRule, Linear, NoData, RtSmooth, Threshold, adoption_probability

#: regime cut: k vs sqrt(pi/2) * sigma1
REGIME_COEF = math.sqrt(math.pi / 2.0)
_EQ_BAND = 1e-12
_FIXED_POINT_TOL = Tolerance(abs_tol=1e-13, rel_tol=1e-14, max_iter=300)


class Regime(str, Enum):
    POINT_LIKE = "point_like"
    BOUNDARY = "boundary"
    LARGE_ID = "large_id"


@dataclass(frozen=True)
class MmrSolution:
    regime: Regime
    k: float
    rho_star: Optional[float]
    sigma_tilde: Optional[float]
    m0_star: Optional[float]
    weights: Optional[tuple[float, ...]]
    mmr_value: float
    rules: tuple[DecisionRule, ...]


@dataclass(frozen=True)
class VerifyReport:
    e0_half: bool
    worst_at_zero: bool
    worst_value: float
    gamma_star: float


def classify_regime(study: StudySet) -> Regime:
    cut = REGIME_COEF * study.sigma1
    if abs(study.k - cut) <= _EQ_BAND * max(study.k, cut):
        return Regime.BOUNDARY
    return Regime.LARGE_ID if study.k > cut else Regime.POINT_LIKE


def solve_rho_star(k: float, sigma: float, tol: Tolerance = _FIXED_POINT_TOL) -> float:
    """Unique rho in (0, k) with rho = k * (1 - 2 Phi(-rho/sigma)).

    Requires k > sqrt(pi/2) * sigma. Uses the strictly increasing form
    h(rho) = 1 - (k/rho) * erf(rho / (sqrt(2) sigma)).
    """
    cut = REGIME_COEF * sigma
    if not (sigma > 0.0 and k > cut * (1.0 + _EQ_BAND)):
        raise PreconditionViolated(f"need k > sqrt(pi/2)*sigma, got k={k}, cut={cut}")

    sqrt2_sigma = math.sqrt(2.0) * sigma

    def h(rho: float) -> float:
        return 1.0 - (k / rho) * erf(rho / sqrt2_sigma)

    hi = k
    if h(hi) <= tol.abs_tol:
        # saturated regime: Phi(-k/sigma) underflows, rho* == k in doubles
        return k
    return find_root(h, k * 1e-12, hi, tol)


def sigma_tilde(k: float, sigma: float) -> float:
    """Smoothing scale sqrt(2 k^2 / pi - sigma^2); zero at the regime cut."""
    cut = REGIME_COEF * sigma
    if not (sigma >= 0.0 and k >= cut * (1.0 - _EQ_BAND)):
        raise PreconditionViolated(f"need k >= sqrt(pi/2)*sigma, got k={k}, cut={cut}")
    rad = 2.0 * k * k / math.pi - sigma * sigma
    return math.sqrt(max(rad, 0.0))


# -- point-like machinery ---------------------------------------------------

def _g_coeffs(study: StudySet, m0: float):
    """Active-weight sums for the worst-case objective at weight scale m0."""
    wmax = np.maximum(m0 - study.radii, 0.0)
    s2 = study.sigmas**2
    a = math.sqrt(float(np.sum(wmax**2 / s2)))
    b = float(np.sum(wmax / s2))
    d = float(np.sum(wmax * study.radii / s2))
    return a, b, d


def g_objective(study: StudySet, mu0: float, m0: float) -> float:
    """Worst-case regret contribution mu0 * Phi(-(B mu0 - D)/A) of state mu0
    against the symmetric threshold with weight scale m0."""
    a, b, d = _g_coeffs(study, m0)
    if a == 0.0:
        # nearest-neighbor limit of the weights at m0 = k
        return mu0 * std_normal_cdf((study.k - mu0) / study.sigma1)
    return mu0 * std_normal_cdf((d - b * mu0) / a)


def mu0_upper_bound(study: StudySet) -> float:
    """Compactification bound: smallest doubling of k where the crude bound
    mu0 * (1 - prod_j Phi(max(mu0 - C||x_j-x0||, 0)/sigma_j)) falls below
    1e-4 * k."""
    k = study.k

    def crude(u: float) -> float:
        mus = np.maximum(u - study.radii, 0.0)
        return u * (1.0 - float(np.prod(std_normal_cdf(mus / study.sigmas))))

    u = 2.0 * k
    for _ in range(200):
        if crude(u) < 1e-4 * k:
            return u
        u *= 2.0
    raise NoConvergence("no compact upper bound for mu0 found by doubling")


def best_response(
    study: StudySet, m0: float, grid_n: int = 512, tol: Tolerance = Tolerance(1e-12, 1e-12, 300)
) -> tuple[float, float]:
    """Maximizer and value of the worst-case objective mu0 -> g(mu0, m0)."""
    if m0 < study.k * (1.0 - _EQ_BAND):
        raise PreconditionViolated(f"need m0 >= k = {study.k}, got {m0}")
    ubar = mu0_upper_bound(study)
    return maximize_scalar(lambda u: g_objective(study, u, m0), 0.0, ubar, grid_n, tol)


def _mills(a: float) -> float:
    """Phi(-a)/phi(a), underflow-safe via the scaled complementary erf."""
    return 0.5 * math.sqrt(2.0 * math.pi) * float(erfcx(a / math.sqrt(2.0)))


def _m0_equation(study: StudySet, m0: float) -> float:
    """Stationarity condition of the fixed point: Phi(-A)/phi(A) - m0 B/A."""
    a, b, _ = _g_coeffs(study, m0)
    if a == 0.0:
        return REGIME_COEF - m0 / study.sigma1
    return _mills(a) - m0 * b / a


def solve_m0_star(study: StudySet, tol: Tolerance = Tolerance(1e-12, 1e-13, 300)):
    """Fixed point m0* > k and the induced threshold weights.

    Root-finds the scalar stationarity equation on (k, mu0 upper bound),
    erring if the bracket scan finds more than one sign change, and
    cross-checks that m0* best-responds to itself.
    """
    if classify_regime(study) is not Regime.POINT_LIKE:
        raise PreconditionViolated("m0* is defined in the point-like regime only")

    k = study.k
    hi = max(mu0_upper_bound(study), 2.0 * k)
    grid = np.linspace(k * (1.0 + 1e-9), hi, 2048)
    vals = np.array([_m0_equation(study, float(m)) for m in grid])
    sign_flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if len(sign_flips) == 0:
        raise NoConvergence("no sign change of the m0* equation on the bracket")
    if len(sign_flips) > 1:
        brackets = [(float(grid[i]), float(grid[i + 1])) for i in sign_flips]
        raise NoConvergence(f"multiple candidate fixed points m0*: {brackets}")

    i = int(sign_flips[0])
    m_star = find_root(lambda m: _m0_equation(study, m), float(grid[i]), float(grid[i + 1]), tol)

    mu0_br, _ = best_response(study, m_star)
    if abs(mu0_br - m_star) > 1e-6 * (1.0 + abs(m_star)):
        raise NoConvergence(
            f"fixed-point cross-check failed: psi({m_star}) = {mu0_br}"
        )

    wmax = np.maximum(m_star - study.radii, 0.0) / study.sigmas**2
    weights = wmax / ((m_star - k) / study.sigma1**2)
    weights[0] = 1.0
    return m_star, tuple(float(w) for w in weights)


def solve(study: StudySet) -> MmrSolution:
    """Full minimax-regret solution for a study."""
    regime = classify_regime(study)
    k = study.k
    if regime is Regime.LARGE_ID:
        rho = solve_rho_star(k, study.sigma1)
        st = sigma_tilde(k, study.sigma1)
        return MmrSolution(
            regime=regime,
            k=k,
            rho_star=rho,
            sigma_tilde=st,
            m0_star=None,
            weights=None,
            mmr_value=0.5 * k,
            rules=(Linear(rho), RtSmooth(st)),
        )
    if regime is Regime.BOUNDARY:
        return MmrSolution(
            regime=regime,
            k=k,
            rho_star=None,
            sigma_tilde=None,
            m0_star=None,
            weights=None,
            mmr_value=0.5 * k,
            rules=(Threshold(c=0.0),),
        )
    m_star, weights = solve_m0_star(study)
    _, value = best_response(study, m_star)
    return MmrSolution(
        regime=regime,
        k=k,
        rho_star=None,
        sigma_tilde=None,
        m0_star=m_star,
        weights=weights,
        mmr_value=value,
        rules=(Threshold(c=0.0, w=weights),),
    )


def maximin(study: StudySet) -> tuple[DecisionRule, float]:
    """Maximin-welfare solution: never adopt, worst-case welfare zero."""
    return NoData(), 0.0


def threshold_worst_case(study: StudySet, weights, c: float = 0.0) -> float:
    """Worst-case expected regret of 1{w'Y >= c} for nonnegative weights.

    The inner minimization over feasible means sets mu_j = mu0 - C||x_j-x0||
    on every weighted coordinate, leaving a scalar maximization over mu0 for
    each sign branch of the cutoff.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (study.n,):
        raise PreconditionViolated(f"need a length-{study.n} weight vector")
    if np.any(w < 0.0) or not np.any(w > 0.0):
        raise PreconditionViolated("weights must be nonnegative and not all zero")
    bw = float(np.sum(w))
    dw = float(np.sum(w * study.radii))
    sw = float(math.sqrt(np.sum(w**2 * study.sigmas**2)))

    def branch(cutoff: float) -> float:
        ubar = max(4.0 * study.k, (abs(cutoff) + dw + 40.0 * sw) / bw)
        _, val = maximize_scalar(
            lambda u: u * std_normal_cdf((cutoff - (bw * u - dw)) / sw), 0.0, ubar, 512
        )
        return val

    return max(branch(c), branch(-c))


def verify_mmr(rule: DecisionRule, study: StudySet, gamma_grid) -> VerifyReport:
    """Check the two optimality signatures of a candidate scalar-index rule:
    expected exposure 1/2 at the symmetric point, and worst profiled regret
    attained at gamma = 0 with the solution's minimax value."""
    from . import regret as _regret  # local import, regret depends on this module

    grid = np.asarray(gamma_grid, dtype=float)
    e0 = adoption_probability(rule, 0.0, study.sigma1)
    e0_half = abs(e0 - 0.5) < 1e-8

    vals = np.array([_regret.profiled_regret(rule, study, float(g)) for g in grid])
    i = int(np.argmax(vals))
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, len(grid) - 1)])
    if lo < hi:
        g_star, v_star = maximize_scalar(
            lambda g: _regret.profiled_regret(rule, study, g), lo, hi, grid_n=16
        )
    else:
        g_star, v_star = float(grid[i]), float(vals[i])
    if vals[i] > v_star:
        g_star, v_star = float(grid[i]), float(vals[i])

    step = float(np.max(np.diff(grid))) if len(grid) > 1 else 0.0
    target = solve(study).mmr_value
    worst_at_zero = abs(g_star) <= step + 1e-12 and abs(v_star - target) <= 1e-4 * study.k
    return VerifyReport(
        e0_half=bool(e0_half),
        worst_at_zero=bool(worst_at_zero),
        worst_value=float(v_star),
        gamma_star=float(g_star),
    )
