"""Scalar numerics: normal special functions, root finding, quadrature,
and global scalar maximization.

All routines are pure and deterministic for fixed tolerances, so they are
safe to call concurrently. The normal CDF is backed by the complementary
error function (relative error well below 1e-14 on |x| <= 8), which the
rest of the toolkit treats as exact Gaussian algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import InvalidInterval, NoBracket, NoConvergence

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
#: golden ratio section used by the local refinement stage
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0
#: interval budget for the adaptive quadrature
_MAX_PANELS = 20_000


@dataclass(frozen=True)
class Tolerance:
    """Stopping control shared by the iterative routines."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ValueError("tolerances must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def std_normal_cdf(x):
    """Standard normal CDF via the complementary error function.

    Accepts scalars or arrays; saturates at 0/1 for -inf/+inf.
    """
    arr = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-arr / _SQRT2)
    return float(out) if arr.ndim == 0 else out


def std_normal_pdf(x):
    """Standard normal density (2*pi)^{-1/2} exp(-x^2/2)."""
    arr = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * arr * arr)
    return float(out) if arr.ndim == 0 else out


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = Tolerance(),
) -> float:
    """Bracketed root of a continuous scalar function.

    Deterministic bisection with secant acceleration: a secant step is
    taken whenever it stays strictly inside the bracket, and bisection is
    forced whenever two consecutive steps fail to halve the bracket, so the
    worst case is plain bisection. Stops when |f(x)| <= abs_tol or the
    bracket width drops below rel_tol*(1+|x|).
    """
    if not (hi > lo):
        raise InvalidInterval(f"need lo < hi, got [{lo}, {hi}]")
    fa = f(lo)
    if abs(fa) <= tol.abs_tol:
        return lo
    fb = f(hi)
    if abs(fb) <= tol.abs_tol:
        return hi
    if fa * fb > 0.0:
        raise NoBracket(f"f({lo})={fa} and f({hi})={fb} have the same sign")

    a, b = lo, hi
    width_two_ago = b - a
    for _ in range(tol.max_iter):
        width = b - a
        x = None
        if fb != fa:
            x = b - fb * (b - a) / (fb - fa)
            # reject secant points that hug the bracket ends
            margin = 0.01 * width
            if not (a + margin < x < b - margin):
                x = None
        if x is None or width > 0.5 * width_two_ago:
            x = 0.5 * (a + b)
        width_two_ago = width

        fx = f(x)
        if abs(fx) <= tol.abs_tol:
            return x
        if fa * fx <= 0.0:
            b, fb = x, fx
        else:
            a, fa = x, fx
        if (b - a) <= tol.rel_tol * (1.0 + abs(x)):
            return 0.5 * (a + b)
    raise NoConvergence(f"no root to tolerance after {tol.max_iter} iterations")


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = Tolerance(),
) -> float:
    """Adaptive Simpson quadrature of a bounded function on [a, b].

    The target is |error| <= max(abs_tol, rel_tol*|result|); the relative
    part is seeded from a crude whole-interval estimate. Subdivision stops
    with NoConvergence once the panel budget is exhausted.
    """
    if not (b >= a):
        raise InvalidInterval(f"need a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0

    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    target = max(tol.abs_tol, tol.rel_tol * abs(whole))

    total = 0.0
    panels = 0
    stack = [(a, fa, b, fb, m, fm, whole, target)]
    while stack:
        a0, fa0, b0, fb0, m0, fm0, s0, eps = stack.pop()
        panels += 1
        if panels > _MAX_PANELS:
            raise NoConvergence("quadrature subdivision budget exhausted")
        lm, flm, sl = _simpson(f, a0, fa0, m0, fm0)
        rm, frm, sr = _simpson(f, m0, fm0, b0, fb0)
        err = (sl + sr - s0) / 15.0
        if abs(err) <= eps or (b0 - a0) < 1e-14 * (1.0 + abs(a0) + abs(b0)):
            total += sl + sr + err
        else:
            half = 0.5 * eps
            stack.append((a0, fa0, m0, fm0, lm, flm, sl, half))
            stack.append((m0, fm0, b0, fb0, rm, frm, sr, half))
    return total


def _golden_max(f, a, b, tol: Tolerance):
    """Golden-section maximum of a unimodal function on [a, b]."""
    h = b - a
    c, d = a + _INVPHI2 * h, a + _INVPHI * h
    fc, fd = f(c), f(d)
    best_x, best_v = (c, fc) if fc >= fd else (d, fd)
    for _ in range(tol.max_iter):
        if h <= max(tol.abs_tol, tol.rel_tol * (1.0 + abs(best_x))):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            h = _INVPHI * h
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = _INVPHI * h
            d = a + _INVPHI * h
            fd = f(d)
        if fc >= fd and fc > best_v:
            best_x, best_v = c, fc
        elif fd > fc and fd > best_v:
            best_x, best_v = d, fd
    return best_x, best_v


def maximize_scalar(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grid_n: int = 129,
    tol: Tolerance = Tolerance(),
) -> tuple[float, float]:
    """Global scalar maximum: coarse grid scan plus golden-section refinement.

    Among grid cells whose value ties the grid maximum to within 1e-12
    (relative), the leftmost is refined, which makes the result
    deterministic for symmetric objectives. The returned maximum is never
    below any grid value.
    """
    if not (hi > lo):
        raise InvalidInterval(f"need lo < hi, got [{lo}, {hi}]")
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")

    xs = np.linspace(lo, hi, grid_n)
    vs = np.array([f(float(x)) for x in xs])
    vmax = float(np.max(vs))
    tie = 1e-12 * (1.0 + abs(vmax))
    i = int(np.flatnonzero(vs >= vmax - tie)[0])

    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid_n - 1)])
    x_star, v_star = _golden_max(f, a, b, tol)
    if vs[i] > v_star:
        x_star, v_star = float(xs[i]), float(vs[i])
    return x_star, max(v_star, vmax)
