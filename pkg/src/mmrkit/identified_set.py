"""Identified-set computations for the evidence-aggregation setting.

A target unit with covariate ``x0`` is to be treated based on unbiased
Gaussian signals from ``n`` source units with covariates ``x_i`` and known
standard errors, under a Lipschitz bound (constant ``C``) on how the mean
effect varies with covariates. The welfare contrast at the target is then
only partially identified; its extrema are intersection bounds, and the
feasible mean vectors form the polytope

    M = { mu : |mu_i - mu_j| <= C * ||x_i - x_j|| }.

The constrained MLE used by the plug-in rule is the weighted least-squares
projection onto M, computed by Dykstra's algorithm over the pairwise slabs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, ModelMembershipWarning, NoConvergence

#: slack for Lipschitz membership checks
_MEMBERSHIP_SLACK = 1e-12


def _as_point(p) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1:
        raise ValueError("covariate points must be scalars or 1-d vectors")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class StudySet:
    """Primitives of one evidence-aggregation problem.

    Vectors passed to the operations (``mu``, ``y``) are interpreted in the
    constructor's ordering of the source units; internally the units are
    sorted by distance to the target, with a strict unique nearest
    neighbor required. Weight vectors attached to decision rules follow
    the sorted ordering.
    """

    x: tuple[tuple[float, ...], ...]
    x0: tuple[float, ...]
    sigma: tuple[float, ...]
    lipschitz_c: float
    #: permutation such that ``x[order[0]]`` is the nearest neighbor
    order: tuple[int, ...] = field(init=False)

    def __init__(self, x, x0, sigma, lipschitz_c):
        points = tuple(_as_point(p) for p in np.atleast_1d(np.asarray(x, dtype=object))) \
            if isinstance(x, (list, tuple, np.ndarray)) else None
        if points is None:
            raise ValueError("x must be a sequence of covariate points")
        object.__setattr__(self, "x", points)
        object.__setattr__(self, "x0", _as_point(x0))
        object.__setattr__(self, "sigma", tuple(float(s) for s in np.atleast_1d(sigma)))
        object.__setattr__(self, "lipschitz_c", float(lipschitz_c))
        self._validate_and_sort()

    def _validate_and_sort(self) -> None:
        n = len(self.x)
        if n < 1:
            raise ValueError("need at least one source unit")
        if len(self.sigma) != n:
            raise DimensionMismatch(f"{n} covariate points but {len(self.sigma)} standard errors")
        d = len(self.x0)
        if any(len(p) != d for p in self.x):
            raise DimensionMismatch("covariate points must share the target's dimension")
        if any(s <= 0.0 for s in self.sigma):
            raise ValueError("standard errors must be strictly positive")
        if self.lipschitz_c <= 0.0:
            raise ValueError("the Lipschitz constant must be strictly positive")

        pts = np.asarray(self.x, dtype=float)
        x0 = np.asarray(self.x0, dtype=float)
        dist = np.linalg.norm(pts - x0, axis=1)
        order = tuple(int(i) for i in np.argsort(dist, kind="stable"))
        sorted_dist = dist[list(order)]
        if sorted_dist[0] <= 0.0:
            raise ValueError("the nearest neighbor must differ from the target (x1 != x0)")
        if n >= 2:
            if sorted_dist[1] <= sorted_dist[0]:
                raise ValueError(
                    "tied nearest neighbors; merge them into one more precise signal"
                )
            for i in range(n):
                for j in range(i + 1, n):
                    if np.linalg.norm(pts[i] - pts[j]) == 0.0:
                        raise ValueError("source covariates must be pairwise distinct")
        object.__setattr__(self, "order", order)

    # -- sorted views -----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.x)

    @cached_property
    def radii(self) -> np.ndarray:
        """C * ||x_i - x0|| in sorted (nearest-first) order."""
        pts = np.asarray(self.x, dtype=float)[list(self.order)]
        x0 = np.asarray(self.x0, dtype=float)
        return self.lipschitz_c * np.linalg.norm(pts - x0, axis=1)

    @cached_property
    def sigmas(self) -> np.ndarray:
        """Standard errors in sorted order."""
        return np.asarray(self.sigma, dtype=float)[list(self.order)]

    @cached_property
    def pair_radii(self) -> np.ndarray:
        """C * ||x_i - x_j|| for sorted-order pairs, shape (n, n)."""
        pts = np.asarray(self.x, dtype=float)[list(self.order)]
        diff = pts[:, None, :] - pts[None, :, :]
        return self.lipschitz_c * np.linalg.norm(diff, axis=2)

    @property
    def k(self) -> float:
        """Half-width C * ||x1 - x0|| of the zero-mean identified set."""
        return float(self.radii[0])

    @property
    def sigma1(self) -> float:
        """Standard error of the nearest-neighbor signal."""
        return float(self.sigmas[0])

    def sorted_view(self, v) -> np.ndarray:
        """Reorder an input-order vector into sorted order."""
        arr = np.asarray(v, dtype=float)
        if arr.shape[-1] != self.n:
            raise DimensionMismatch(f"expected length {self.n}, got {arr.shape[-1]}")
        return arr[..., list(self.order)]

    def input_view(self, v_sorted) -> np.ndarray:
        """Reorder a sorted-order vector back into input order."""
        arr = np.asarray(v_sorted, dtype=float)
        out = np.empty_like(arr)
        out[..., list(self.order)] = arr
        return out


@dataclass(frozen=True)
class WelfareBounds:
    """Extrema of the identified set for the welfare contrast.

    ``lower <= upper`` whenever the mean vector belongs to M; the raw
    formulas are still reported (with a warning) for diagnostic use
    outside M, where they may cross.
    """

    lower: float
    upper: float

    def contains(self, u: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= u <= self.upper + slack


def welfare_bounds(study: StudySet, mu) -> WelfareBounds:
    """Intersection bounds max_i{mu_i - C||x_i-x0||}, min_i{mu_i + C||x_i-x0||}."""
    mu_s = study.sorted_view(mu)
    if not membership_in_M(study, mu):
        warnings.warn(
            "mean vector lies outside the Lipschitz polytope; bounds are diagnostic only",
            ModelMembershipWarning,
            stacklevel=2,
        )
    return WelfareBounds(
        lower=float(np.max(mu_s - study.radii)),
        upper=float(np.min(mu_s + study.radii)),
    )


def k_bar(study: StudySet, gamma: float) -> float:
    """Upper profiled bound: sup of the contrast given the nearest signal mean."""
    return float(gamma) + study.k


def k_lower(study: StudySet, gamma: float) -> float:
    """Lower profiled bound, -k_bar(-gamma) by centrosymmetry."""
    return -k_bar(study, -gamma)


def membership_in_M(study: StudySet, mu) -> bool:
    """Whether all pairwise Lipschitz constraints hold (1e-12 slack)."""
    mu_s = study.sorted_view(mu)
    if study.n == 1:
        return True
    gaps = np.abs(mu_s[:, None] - mu_s[None, :]) - study.pair_radii
    return bool(np.max(gaps) <= _MEMBERSHIP_SLACK)


def nontrivial_pi(study: StudySet, mu) -> bool:
    """Whether the identified set straddles zero strictly."""
    b = welfare_bounds(study, mu)
    return b.lower < 0.0 < b.upper


def _project_rows_sorted(
    study: StudySet,
    rows: np.ndarray,
    tol: float = 1e-9,
    max_sweeps: int = 10_000,
) -> np.ndarray:
    """Dykstra projection of sorted-order rows onto M in the 1/sigma^2 metric.

    Vectorized over rows; per-constraint correction terms make the limit
    the exact polytope projection.
    """
    n = study.n
    if n == 1:
        return rows.copy()
    sig2 = study.sigmas**2
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    caps = {p: study.pair_radii[p] for p in pairs}
    z = rows.astype(float).copy()
    corr = {p: np.zeros(rows.shape[0]) for p in pairs}
    denom = {p: sig2[p[0]] + sig2[p[1]] for p in pairs}

    for _ in range(max_sweeps):
        max_change = 0.0
        for p in pairs:
            i, j = p
            vi = z[:, i] + sig2[i] * corr[p]
            vj = z[:, j] - sig2[j] * corr[p]
            v = vi - vj
            step = np.sign(v) * np.maximum(np.abs(v) - caps[p], 0.0) / denom[p]
            new_i = vi - step * sig2[i]
            new_j = vj + step * sig2[j]
            max_change = max(
                max_change,
                float(np.max(np.abs(new_i - z[:, i]))) if rows.size else 0.0,
                float(np.max(np.abs(new_j - z[:, j]))) if rows.size else 0.0,
            )
            z[:, i], z[:, j] = new_i, new_j
            corr[p] = step
        if max_change <= tol:
            return z
    raise NoConvergence(f"Dykstra projection did not converge in {max_sweeps} sweeps")


def project_to_M(study: StudySet, y, tol: float = 1e-9, max_sweeps: int = 10_000) -> np.ndarray:
    """Weighted least-squares projection of y onto M (the constrained MLE).

    Minimizes sum_i (y_i - mu_i)^2 / sigma_i^2 over mu in M; returns y
    unchanged when it is already feasible. Input and output are in the
    constructor's unit ordering.
    """
    y_s = study.sorted_view(y)
    if membership_in_M(study, y):
        return np.asarray(y, dtype=float).copy()
    z = _project_rows_sorted(study, y_s[None, :], tol=tol, max_sweeps=max_sweeps)[0]
    return study.input_view(z)


def estimated_bounds(study: StudySet, y) -> WelfareBounds:
    """Intersection bounds evaluated at the constrained MLE of the means."""
    mu_hat_s = study.sorted_view(project_to_M(study, y))
    return WelfareBounds(
        lower=float(np.max(mu_hat_s - study.radii)),
        upper=float(np.min(mu_hat_s + study.radii)),
    )
