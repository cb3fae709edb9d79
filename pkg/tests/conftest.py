"""Shared fixtures and independent oracle helpers.

Oracles deliberately avoid the library's own code paths: dense-grid
bisection, trapezoid quadrature of the normal density, scipy's bounded
scalar minimizer, and brute-force grids.
"""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

import mmrkit as mk


@pytest.fixture(scope="session")
def fig1_study():
    return mk.StudySet(x=[-7.5, 7.9], x0=0.0, sigma=[3.9, 2.4], lipschitz_c=2.5)


@pytest.fixture(scope="session")
def fig1_solution(fig1_study):
    return mk.solve(fig1_study)


@pytest.fixture(scope="session")
def pointlike_study():
    # k = C*|x1-x0| = 2.0 < sqrt(pi/2)*3.9
    return mk.StudySet(x=[0.8], x0=0.0, sigma=[3.9], lipschitz_c=2.5)


def normal_cdf_oracle(x: float) -> float:
    """Trapezoid quadrature of the density over [-12, x]."""
    xs = np.linspace(-12.0, x, 2_000_001)
    dens = np.exp(-0.5 * xs * xs) / np.sqrt(2.0 * np.pi)
    return float(np.trapezoid(dens, xs))


def rho_star_oracle(k: float, sigma: float) -> float:
    """Dense-grid sign scan plus bisection on r - k*(1 - 2*Phi(-r/sigma))."""

    def f(r):
        return r - k * (1.0 - 2.0 * ndtr(-r / sigma))

    grid = np.linspace(1e-6 * k, k, 200_001)
    vals = f(grid)
    flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    assert len(flips) == 1
    a, b = float(grid[flips[0]]), float(grid[flips[0] + 1])
    for _ in range(200):
        m = 0.5 * (a + b)
        if f(a) * f(m) <= 0:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def adoption_by_quadrature(rule, gamma: float, sigma: float) -> float:
    """E[d(T)], T ~ N(gamma, sigma^2), by piecewise adaptive quadrature."""
    lo, hi = gamma - 9.0 * sigma, gamma + 9.0 * sigma
    cuts = {lo, hi}
    stack = [rule]
    while stack:
        r = stack.pop()
        if isinstance(r, mk.Threshold):
            cuts.add(r.c)
        elif isinstance(r, mk.Linear):
            cuts.update((-r.rho, r.rho))
        elif isinstance(r, mk.Mixture):
            stack.extend(r.components)
    cuts = sorted(c for c in cuts if lo <= c <= hi)

    def integrand(t):
        return mk.evaluate(rule, t) * mk.std_normal_pdf((t - gamma) / sigma) / sigma

    tol = mk.Tolerance(abs_tol=1e-12, rel_tol=1e-11, max_iter=200)
    return sum(mk.integrate(integrand, a, b, tol) for a, b in zip(cuts[:-1], cuts[1:]))


def best_response_oracle(study, m0: float, ubar: float) -> float:
    """argmax of the worst-case objective via scipy's bounded minimizer."""
    radii = study.radii
    sig2 = study.sigmas**2

    def g(mu0):
        wmax = np.maximum(m0 - radii, 0.0)
        a = np.sqrt(np.sum(wmax**2 / sig2))
        if a == 0.0:
            return mu0 * ndtr((study.k - mu0) / study.sigma1)
        num = np.sum(wmax * (mu0 - radii) / sig2)
        return mu0 * ndtr(-num / a)

    res = minimize_scalar(lambda u: -g(u), bounds=(0.0, ubar), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def fixed_point_oracle(study, ubar: float, start: float, iters: int = 400) -> float:
    """Damped best-response iteration for the optimal weight scale."""
    m = start
    for _ in range(iters):
        m_new = best_response_oracle(study, m, ubar)
        if abs(m_new - m) < 1e-10:
            return m_new
        m = 0.5 * m + 0.5 * m_new
    return m


def random_member_of_M(study, rng, scale=2.0):
    """Rejection-sample a mean vector from the Lipschitz polytope."""
    k = study.k
    for _ in range(10_000):
        mu = rng.uniform(-scale * k, scale * k, size=study.n)
        if mk.membership_in_M(study, mu):
            return mu
    raise AssertionError("rejection sampling failed to find a member of M")
