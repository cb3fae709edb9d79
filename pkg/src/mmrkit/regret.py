"""Expected, profiled, worst-case, and net-of-cost regret; dominance
comparisons; curve sampling.

Profiled regret holds the nearest-neighbor signal mean gamma fixed; the
identified interval for the welfare contrast is then exactly
[gamma - k, gamma + k], which yields the three-branch formula

    (k - gamma) * E                      for gamma < -k,
    max{(gamma+k)(1-E), (k-gamma) E}     for |gamma| <= k,
    (gamma + k) * (1 - E)                for gamma > k,

with E the rule's adoption probability at gamma. Plug-in rules have no
closed-form adoption probability; their expectations use scrambled-Sobol
quasi-Monte Carlo with replicate-based standard errors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from . import mmr as _mmr
from .errors import InfeasibleState, PreconditionViolated, UnsupportedRule
from .identified_set import StudySet, _project_rows_sorted, welfare_bounds
from .numerics import Tolerance, find_root, integrate, maximize_scalar, std_normal_cdf, std_normal_pdf
from .rules import (
    CoinFlip,
    DecisionRule,
    Linear,
    Mixture,
    NoData,
    PlugIn,
    RtSmooth,
    Threshold,
    adoption_probability,
    evaluate,
    rule_label,
)

_DOMINANCE_TOL = 1e-9
_QUAD_HALF_WIDTH = 9.0


# -- cost functions ----------------------------------------------------------

@dataclass(frozen=True)
class LinearCost:
    """c * min(a, 1-a)."""

    c: float

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("cost scale must be nonnegative")


@dataclass(frozen=True)
class QuadraticCost:
    """c * a * (1-a)."""

    c: float

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("cost scale must be nonnegative")


@dataclass(frozen=True)
class ConstantCost:
    """c * 1{0 < a < 1}."""

    c: float

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("cost scale must be nonnegative")


CostFunction = Union[LinearCost, QuadraticCost, ConstantCost]


def cost_value(cost: CostFunction, a: float) -> float:
    if isinstance(cost, LinearCost):
        return cost.c * min(a, 1.0 - a)
    if isinstance(cost, QuadraticCost):
        return cost.c * a * (1.0 - a)
    return cost.c if 0.0 < a < 1.0 else 0.0


@dataclass
class RegretCurve:
    gamma: np.ndarray
    regret: np.ndarray
    rule_label: str

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.regret = np.asarray(self.regret, dtype=float)
        if self.gamma.shape != self.regret.shape:
            raise ValueError("gamma and regret must have equal lengths")


class Dominance(str, Enum):
    A_DOMINATES = "a_dominates"
    B_DOMINATES = "b_dominates"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class DominanceReport:
    verdict: Dominance
    crossings: np.ndarray
    strict_gaps: int


@dataclass(frozen=True)
class Prop5Report:
    case: str  # "case_i" or "case_ii"
    gamma_lower: Optional[float]
    lhs: float
    rhs: float


# -- scalar-index plumbing ---------------------------------------------------

def _require_scalar_index(rule: DecisionRule) -> None:
    if isinstance(rule, PlugIn):
        raise UnsupportedRule("the plug-in rule is not a scalar-index rule")
    if isinstance(rule, Threshold) and rule.w is not None:
        w = np.asarray(rule.w, dtype=float)
        e1 = np.zeros_like(w)
        e1[0] = 1.0
        if not np.allclose(w, e1):
            raise UnsupportedRule("weighted thresholds do not profile along the nearest signal")
    if isinstance(rule, Mixture):
        for c in rule.components:
            _require_scalar_index(c)


def _mean_action(rule: DecisionRule, study: StudySet, mu, mc: Optional["QmcConfig"] = None) -> float:
    """E_mu[d(Y)] for a full mean vector, closed form where available."""
    mu_s = study.sorted_view(mu)
    if isinstance(rule, PlugIn):
        cfg = mc or QmcConfig()
        z = sobol_normals(study.n, cfg.points_log2, cfg.replicates, cfg.seed)
        e, _ = _plugin_mean_action_sorted(study, mu_s, z)
        return e
    if isinstance(rule, Mixture):
        return float(
            sum(w * _mean_action(c, study, mu, mc) for w, c in zip(rule.weights, rule.components))
        )
    if isinstance(rule, Threshold) and rule.w is not None:
        w = np.asarray(rule.w, dtype=float)
        sd = float(math.sqrt(np.sum(w**2 * study.sigmas**2)))
        return adoption_probability(Threshold(c=rule.c), float(w @ mu_s) , sd)
    return adoption_probability(rule, float(mu_s[0]), study.sigma1)


# -- expected and profiled regret --------------------------------------------

def expected_regret(
    rule: DecisionRule,
    study: StudySet,
    mu,
    u0: float,
    mc: Optional["QmcConfig"] = None,
) -> float:
    """u0 * (1{u0 >= 0} - E_mu[d(Y)]) for a welfare contrast u0 in I(mu)."""
    bounds = welfare_bounds(study, mu)
    slack = 1e-9 * (1.0 + abs(u0))
    if not bounds.contains(u0, slack):
        raise InfeasibleState(f"u0={u0} outside the identified set [{bounds.lower}, {bounds.upper}]")
    e = _mean_action(rule, study, mu, mc)
    return u0 * ((1.0 if u0 >= 0.0 else 0.0) - e)


def profiled_regret(rule: DecisionRule, study: StudySet, gamma: float) -> float:
    """Worst-case expected regret holding the nearest signal mean fixed."""
    _require_scalar_index(rule)
    k = study.k
    e = adoption_probability(rule, gamma, study.sigma1)
    if gamma < -k:
        return (k - gamma) * e
    if gamma > k:
        return (gamma + k) * (1.0 - e)
    return max((gamma + k) * (1.0 - e), (k - gamma) * e)


def worst_case_regret(
    rule: DecisionRule,
    study: StudySet,
    gamma_range: tuple[float, float],
    grid_n: int = 601,
    tol: Tolerance = Tolerance(1e-10, 1e-12, 300),
) -> tuple[float, float]:
    """Maximize profiled regret over a gamma range (grid + refinement)."""
    lo, hi = float(gamma_range[0]), float(gamma_range[1])
    return maximize_scalar(lambda g: profiled_regret(rule, study, g), lo, hi, grid_n, tol)


# -- net-of-cost risk ---------------------------------------------------------

def _cost_breakpoints(rule: DecisionRule) -> list[float]:
    if isinstance(rule, Threshold):
        return [rule.c]
    if isinstance(rule, Linear):
        return [-rule.rho, rule.rho]
    if isinstance(rule, Mixture):
        out: list[float] = []
        for c in rule.components:
            out.extend(_cost_breakpoints(c))
        return out
    return []


def expected_cost(rule: DecisionRule, gamma: float, sigma: float, cost: CostFunction) -> float:
    """E_gamma[c(d(T))] for T ~ N(gamma, sigma^2)."""
    _require_scalar_index(rule)
    if isinstance(rule, (Threshold, NoData)):
        return 0.0
    if isinstance(rule, CoinFlip):
        return cost_value(cost, 0.5)
    if isinstance(cost, ConstantCost):
        if isinstance(rule, Linear):
            r = rule.rho
            return cost.c * (
                std_normal_cdf((r - gamma) / sigma) - std_normal_cdf((-r - gamma) / sigma)
            )
        if isinstance(rule, RtSmooth):
            return cost.c

    lo, hi = gamma - _QUAD_HALF_WIDTH * sigma, gamma + _QUAD_HALF_WIDTH * sigma
    cuts = sorted({lo, hi, *(b for b in _cost_breakpoints(rule) if lo < b < hi)})

    def integrand(t: float) -> float:
        return cost_value(cost, evaluate(rule, t)) * std_normal_pdf((t - gamma) / sigma) / sigma

    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += integrate(integrand, a, b, Tolerance(1e-12, 1e-11, 200))
    return total


def net_of_cost_profiled_regret(
    rule: DecisionRule, study: StudySet, gamma: float, cost: CostFunction
) -> float:
    """Profiled regret plus expected randomization cost at gamma."""
    return profiled_regret(rule, study, gamma) + expected_cost(rule, gamma, study.sigma1, cost)


def aversion_threshold(study: StudySet) -> float:
    """Largest constant cost under which the linear ramp stays minimax within
    the class of known optimal rules plus nearest-signal threshold rules."""
    if _mmr.classify_regime(study) is not _mmr.Regime.LARGE_ID:
        raise PreconditionViolated("the aversion threshold needs the large-identified-set regime")
    k, s = study.k, study.sigma1
    span = k + 10.0 * s
    _, worst0 = worst_case_regret(Threshold(c=0.0), study, (-span, span), grid_n=1201)
    rho = _mmr.solve_rho_star(k, s)
    denom = std_normal_cdf(rho / s) - std_normal_cdf(-rho / s)
    return (worst0 - 0.5 * k) / denom


# -- dominance and the case split ---------------------------------------------

def dominance_check(
    rule_a: DecisionRule,
    rule_b: DecisionRule,
    study: StudySet,
    gamma_grid,
    tol: float = _DOMINANCE_TOL,
) -> DominanceReport:
    """Pointwise profiled-regret comparison over a grid (weak dominance)."""
    grid = np.asarray(gamma_grid, dtype=float)
    ra = np.array([profiled_regret(rule_a, study, float(g)) for g in grid])
    rb = np.array([profiled_regret(rule_b, study, float(g)) for g in grid])
    diff = ra - rb

    if np.all(diff <= tol):
        verdict = Dominance.A_DOMINATES
    elif np.all(-diff <= tol):
        verdict = Dominance.B_DOMINATES
    else:
        verdict = Dominance.INCOMPARABLE

    strict_gaps = int(np.sum(np.abs(diff) > tol))
    signs = np.where(diff > tol, 1, np.where(diff < -tol, -1, 0))
    nz = np.flatnonzero(signs)
    crossings: list[float] = []
    for prev, cur in zip(nz[:-1], nz[1:]):
        if signs[prev] * signs[cur] < 0:
            g0, g1 = grid[prev], grid[cur]
            d0, d1 = diff[prev], diff[cur]
            crossings.append(float(g0 - d0 * (g1 - g0) / (d1 - d0)))
    return DominanceReport(verdict=verdict, crossings=np.asarray(crossings), strict_gaps=strict_gaps)


def prop5_gamma_lower(k: float, sigma: float, rho: float) -> float:
    """Unique positive crossing of the ramp and smooth adoption curves,
    Phi(-g / (k sqrt(2/pi))) = int_0^1 Phi((2 rho x - rho - g)/sigma) dx."""
    ramp = Linear(rho)
    scale = k / math.sqrt(math.pi / 2.0)

    def h(g: float) -> float:
        return adoption_probability(ramp, g, sigma) - std_normal_cdf(g / scale)

    hi = 1.2 * (k * rho / max(k - math.sqrt(math.pi / 2.0) * sigma, 1e-12) + 10.0 * sigma)
    grid = np.linspace(1e-9, hi, 4096)
    vals = np.array([h(float(g)) for g in grid])
    flips = np.flatnonzero((vals[:-1] < 0) & (vals[1:] >= 0))
    if len(flips) == 0:
        raise PreconditionViolated("no positive crossing of the adoption curves found")
    i = int(flips[0])
    return find_root(h, float(grid[i]), float(grid[i + 1]), Tolerance(1e-13, 1e-12, 300))


def prop5_case(study: StudySet) -> Prop5Report:
    """Dominance-condition check: phi(rho*/sigma1) (k / (sqrt(pi/2) sigma1))^3
    against phi(0); in the second case the curves cross at gamma_lower > 0."""
    if _mmr.classify_regime(study) is not _mmr.Regime.LARGE_ID:
        raise PreconditionViolated("the case split needs the large-identified-set regime")
    k, s = study.k, study.sigma1
    rho = _mmr.solve_rho_star(k, s)
    lhs = std_normal_pdf(rho / s) * (k / (math.sqrt(math.pi / 2.0) * s)) ** 3
    rhs = std_normal_pdf(0.0)
    if lhs <= rhs:
        return Prop5Report(case="case_i", gamma_lower=None, lhs=lhs, rhs=rhs)
    return Prop5Report(case="case_ii", gamma_lower=prop5_gamma_lower(k, s, rho), lhs=lhs, rhs=rhs)


# -- curve sampling ------------------------------------------------------------

def regret_curve(
    rules: list[DecisionRule],
    study: StudySet,
    gamma_grid,
    cost: Optional[CostFunction] = None,
    workers: int = 1,
) -> list[RegretCurve]:
    """One profiled (or net-of-cost) regret curve per rule, grid-ordered."""
    grid = np.asarray(gamma_grid, dtype=float)

    def one(rule: DecisionRule) -> RegretCurve:
        if cost is None:
            vals = [profiled_regret(rule, study, float(g)) for g in grid]
        else:
            vals = [net_of_cost_profiled_regret(rule, study, float(g), cost) for g in grid]
        return RegretCurve(gamma=grid.copy(), regret=np.asarray(vals), rule_label=rule_label(rule))

    if workers > 1 and len(rules) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(rules))) as pool:
            return list(pool.map(one, rules))
    return [one(rule) for rule in rules]


# -- plug-in rule: quasi-Monte Carlo ------------------------------------------

@dataclass(frozen=True)
class QmcConfig:
    """Scrambled-Sobol sampling plan: replicates x 2^points_log2 draws."""

    seed: int = 0
    points_log2: int = 13
    replicates: int = 8


def sobol_normals(dim: int, points_log2: int, replicates: int, seed: int) -> np.ndarray:
    """Independent scrambled-Sobol standard-normal blocks, shape (R, N, dim)."""
    rng = np.random.default_rng(seed)
    blocks = []
    eps = np.finfo(float).tiny
    for _ in range(replicates):
        sampler = qmc.Sobol(d=dim, scramble=True, seed=rng)
        u = sampler.random(2**points_log2)
        blocks.append(ndtri(np.clip(u, eps, 1.0 - 1e-16)))
    return np.stack(blocks)


def _plugin_mean_action_sorted(study: StudySet, mu_sorted, z: np.ndarray) -> tuple[float, float]:
    """(mean, se) of the plug-in action under Y ~ N(mu, diag(sigma^2)).

    z carries (replicates, N, n) standard normals; the standard error is the
    replicate spread of per-block means.
    """
    mu_s = np.asarray(mu_sorted, dtype=float)
    r, n_pts, n = z.shape
    y = mu_s + study.sigmas * z.reshape(r * n_pts, n)
    proj = _project_rows_sorted(study, y)
    lb = np.max(proj - study.radii, axis=1)
    ub = np.min(proj + study.radii, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = np.clip(ub / (ub - lb), 0.0, 1.0)
    act = np.where(ub == lb, (ub >= 0.0).astype(float),
                   np.where(ub < 0.0, 0.0, np.where(lb > 0.0, 1.0, mid)))
    means = act.reshape(r, n_pts).mean(axis=1)
    e = float(means.mean())
    se = float(means.std(ddof=1) / math.sqrt(r)) if r > 1 else 0.0
    return e, se


def plugin_mean_action(study: StudySet, mu, cfg: QmcConfig = QmcConfig()) -> tuple[float, float]:
    """Public wrapper: (E_mu[d_plugin(Y)], Monte-Carlo standard error)."""
    z = sobol_normals(study.n, cfg.points_log2, cfg.replicates, cfg.seed)
    return _plugin_mean_action_sorted(study, study.sorted_view(mu), z)


def plugin_regret_curve(
    study: StudySet,
    gamma_grid,
    cfg: QmcConfig = QmcConfig(),
    inner_grid: int = 21,
) -> tuple[RegretCurve, np.ndarray]:
    """Profiled regret of the plug-in rule on a two-signal study.

    For each gamma the free second mean ranges over its feasible interval
    (an inner grid); expectations reuse one common set of Sobol draws so the
    inner maximization is smooth. Returns the curve and per-point standard
    errors propagated from the winning branch.
    """
    if study.n != 2:
        raise UnsupportedRule("plug-in profiled regret is implemented for two-signal studies")
    grid = np.asarray(gamma_grid, dtype=float)
    c12 = float(study.pair_radii[0, 1])
    r = study.radii
    z = sobol_normals(2, cfg.points_log2, cfg.replicates, cfg.seed)

    vals = np.empty_like(grid)
    ses = np.empty_like(grid)
    for idx, gamma in enumerate(grid):
        best, best_se = -math.inf, 0.0
        for mu2 in np.linspace(gamma - c12, gamma + c12, inner_grid):
            mu_s = np.array([gamma, mu2])
            e, se = _plugin_mean_action_sorted(study, mu_s, z)
            ub = float(min(gamma + r[0], mu2 + r[1]))
            lb = float(max(gamma - r[0], mu2 - r[1]))
            cand = -math.inf
            cand_se = 0.0
            if ub >= 0.0 and ub * (1.0 - e) > cand:
                cand, cand_se = ub * (1.0 - e), ub * se
            if lb <= 0.0 and -lb * e > cand:
                cand, cand_se = -lb * e, -lb * se
            if cand > best:
                best, best_se = cand, cand_se
        vals[idx] = best
        ses[idx] = best_se
    return RegretCurve(gamma=grid.copy(), regret=vals, rule_label="d_plugin"), ses
