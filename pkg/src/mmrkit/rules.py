"""The decision-rule family and its pointwise/closed-form evaluations.

Scalar-index rules act on the nearest-neighbor signal (the first sorted
coordinate) unless an explicit weight vector is attached to a threshold
rule, in which case weights follow the study's sorted ordering. Every
evaluation lies in [0, 1].

Rules serialize to/from JSON objects ``{"kind": ..., "params": {...}}``
for CLI round-tripping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union
import warnings

import numpy as np

from .errors import (
    DegenerateIntervalWarning,
    DimensionMismatch,
    NonFiniteInput,
    UnsupportedRule,
)
from .identified_set import StudySet, estimated_bounds
from .numerics import std_normal_cdf, std_normal_pdf

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """Open interval (lo, hi); empty when lo >= hi."""

    lo: float
    hi: float

    @property
    def is_empty(self) -> bool:
        return not (self.lo < self.hi)

    @staticmethod
    def empty() -> "Interval":
        return Interval(0.0, 0.0)

    @staticmethod
    def full() -> "Interval":
        return Interval(-math.inf, math.inf)


@dataclass(frozen=True)
class Threshold:
    """Indicator 1{index >= c}; optional weights define the index w'Y."""

    c: float = 0.0
    w: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.w is not None:
            object.__setattr__(self, "w", tuple(float(v) for v in self.w))


@dataclass(frozen=True)
class Linear:
    """Piecewise linear ramp: 0 below -rho, (t+rho)/(2 rho) inside, 1 above."""

    rho: float

    def __post_init__(self):
        if not self.rho > 0.0:
            raise ValueError("rho must be strictly positive")


@dataclass(frozen=True)
class RtSmooth:
    """Smooth rule Phi(index / sigma_tilde); always randomizes."""

    sigma_tilde: float

    def __post_init__(self):
        if not self.sigma_tilde > 0.0:
            raise ValueError("sigma_tilde must be strictly positive")


@dataclass(frozen=True)
class CoinFlip:
    """Constant action 1/2."""


@dataclass(frozen=True)
class NoData:
    """Constant action 0 (keep the status quo)."""


@dataclass(frozen=True)
class Mixture:
    """Convex combination of component rules."""

    weights: tuple[float, ...]
    components: tuple["DecisionRule", ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.weights) != len(self.components):
            raise ValueError("one weight per component is required")
        if any(v < 0.0 for v in self.weights):
            raise ValueError("mixture weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > _WEIGHT_TOL:
            raise ValueError("mixture weights must sum to 1")


@dataclass(frozen=True)
class PlugIn:
    """Estimated-bounds rule; needs the full data vector to evaluate."""

    study: StudySet


DecisionRule = Union[Threshold, Linear, RtSmooth, CoinFlip, NoData, Mixture, PlugIn]


def rule_label(rule: DecisionRule) -> str:
    """Short column label used in CSV output."""
    if isinstance(rule, Threshold):
        if rule.w is not None:
            return "d_threshold_w"
        return "d_threshold0" if rule.c == 0.0 else f"d_threshold{rule.c:g}"
    if isinstance(rule, Linear):
        return "d_linear"
    if isinstance(rule, RtSmooth):
        return "d_rt"
    if isinstance(rule, CoinFlip):
        return "d_coinflip"
    if isinstance(rule, NoData):
        return "d_nodata"
    if isinstance(rule, Mixture):
        return "d_mixture"
    return "d_plugin"


def evaluate(rule: DecisionRule, index: float) -> float:
    """Action of a scalar-index rule at an index value."""
    if not math.isfinite(index):
        raise NonFiniteInput(f"index must be finite, got {index}")
    if isinstance(rule, Threshold):
        return 1.0 if index >= rule.c else 0.0
    if isinstance(rule, Linear):
        if index < -rule.rho:
            return 0.0
        if index > rule.rho:
            return 1.0
        return (index + rule.rho) / (2.0 * rule.rho)
    if isinstance(rule, RtSmooth):
        return std_normal_cdf(index / rule.sigma_tilde)
    if isinstance(rule, CoinFlip):
        return 0.5
    if isinstance(rule, NoData):
        return 0.0
    if isinstance(rule, Mixture):
        return float(sum(w * evaluate(c, index) for w, c in zip(rule.weights, rule.components)))
    raise UnsupportedRule("the plug-in rule needs the full data vector; use evaluate_on_data")


def adoption_probability(rule: DecisionRule, gamma: float, sigma: float) -> float:
    """E[d(T)] for T ~ N(gamma, sigma^2), in closed form.

    For the linear ramp this is the expanded expression
    Phi((g-r)/s) + s/(2r) (phi((r+g)/s) - phi((r-g)/s))
    + (g+r)/(2r) (Phi((r-g)/s) - Phi((-r-g)/s)),
    which equals 1 - int_0^1 Phi((2 r x - r - g)/s) dx.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be strictly positive")
    if isinstance(rule, Threshold):
        return std_normal_cdf((gamma - rule.c) / sigma)
    if isinstance(rule, Linear):
        r, g, s = rule.rho, gamma, sigma
        return (
            std_normal_cdf((g - r) / s)
            + s / (2.0 * r) * (std_normal_pdf((r + g) / s) - std_normal_pdf((r - g) / s))
            + (g + r) / (2.0 * r) * (std_normal_cdf((r - g) / s) - std_normal_cdf((-r - g) / s))
        )
    if isinstance(rule, RtSmooth):
        return std_normal_cdf(gamma / math.hypot(rule.sigma_tilde, sigma))
    if isinstance(rule, CoinFlip):
        return 0.5
    if isinstance(rule, NoData):
        return 0.0
    if isinstance(rule, Mixture):
        return float(
            sum(w * adoption_probability(c, gamma, sigma) for w, c in zip(rule.weights, rule.components))
        )
    raise UnsupportedRule("no scalar-index adoption probability for the plug-in rule")


def randomization_region(rule: DecisionRule) -> Interval:
    """Open interval of index values with an interior (fractional) action."""
    if isinstance(rule, (Threshold, NoData)):
        return Interval.empty()
    if isinstance(rule, Linear):
        return Interval(-rule.rho, rule.rho)
    if isinstance(rule, (RtSmooth, CoinFlip)):
        return Interval.full()
    if isinstance(rule, Mixture):
        regions = [randomization_region(c) for c in rule.components]
        live = [
            r for r, w in zip(regions, rule.weights)
            if w > 0.0 and not r.is_empty
        ]
        if not live:
            return Interval.empty()
        return Interval(min(r.lo for r in live), max(r.hi for r in live))
    raise UnsupportedRule("no scalar randomization region for the plug-in rule")


def _index_of(rule: Threshold | None, study: StudySet, y_sorted: np.ndarray) -> float:
    if isinstance(rule, Threshold) and rule.w is not None:
        w = np.asarray(rule.w, dtype=float)
        if w.shape[0] != study.n:
            raise DimensionMismatch(f"weight vector has length {w.shape[0]}, study has n={study.n}")
        return float(w @ y_sorted)
    return float(y_sorted[0])


def evaluate_on_data(rule: DecisionRule, study: StudySet, y) -> float:
    """Action of any rule on a full data vector (input-order coordinates)."""
    y_arr = np.asarray(y, dtype=float)
    if y_arr.shape != (study.n,):
        raise DimensionMismatch(f"expected a length-{study.n} data vector")
    if not np.all(np.isfinite(y_arr)):
        raise NonFiniteInput("data vector must be finite")

    if isinstance(rule, PlugIn):
        b = estimated_bounds(rule.study, y_arr)
        if b.upper == b.lower:
            warnings.warn(
                "estimated identified set is degenerate; returning 1{upper >= 0}",
                DegenerateIntervalWarning,
                stacklevel=2,
            )
            return 1.0 if b.upper >= 0.0 else 0.0
        if b.upper < 0.0:
            return 0.0
        if b.lower > 0.0:
            return 1.0
        return min(max(b.upper / (b.upper - b.lower), 0.0), 1.0)

    if isinstance(rule, Mixture):
        return float(
            sum(w * evaluate_on_data(c, study, y_arr) for w, c in zip(rule.weights, rule.components))
        )

    y_sorted = study.sorted_view(y_arr)
    if isinstance(rule, Threshold):
        return 1.0 if _index_of(rule, study, y_sorted) >= rule.c else 0.0
    return evaluate(rule, float(y_sorted[0]))


# -- JSON round-tripping ---------------------------------------------------

def study_to_json(study: StudySet) -> dict:
    def flat(p):
        return p[0] if len(p) == 1 else list(p)

    return {
        "x0": flat(study.x0),
        "x": [flat(p) for p in study.x],
        "sigma": list(study.sigma),
        "lipschitz_c": study.lipschitz_c,
    }


def study_from_json(obj: dict) -> StudySet:
    return StudySet(
        x=obj["x"], x0=obj["x0"], sigma=obj["sigma"], lipschitz_c=obj["lipschitz_c"]
    )


def rule_to_json(rule: DecisionRule) -> dict:
    if isinstance(rule, Threshold):
        params = {"c": rule.c}
        if rule.w is not None:
            params["w"] = list(rule.w)
        return {"kind": "threshold", "params": params}
    if isinstance(rule, Linear):
        return {"kind": "linear", "params": {"rho": rule.rho}}
    if isinstance(rule, RtSmooth):
        return {"kind": "rt_smooth", "params": {"sigma_tilde": rule.sigma_tilde}}
    if isinstance(rule, CoinFlip):
        return {"kind": "coin_flip", "params": {}}
    if isinstance(rule, NoData):
        return {"kind": "no_data", "params": {}}
    if isinstance(rule, Mixture):
        return {
            "kind": "mixture",
            "params": {
                "weights": list(rule.weights),
                "components": [rule_to_json(c) for c in rule.components],
            },
        }
    return {"kind": "plug_in", "params": {"study": study_to_json(rule.study)}}


def rule_from_json(obj: dict, study: Optional[StudySet] = None) -> DecisionRule:
    """Rebuild a rule from ``{"kind", "params"}``.

    A plug-in rule without an inline study binds to the ambient ``study``.
    """
    kind = obj.get("kind")
    params = obj.get("params", {}) or {}
    if kind == "threshold":
        w = params.get("w")
        return Threshold(c=float(params.get("c", 0.0)), w=tuple(w) if w is not None else None)
    if kind == "linear":
        return Linear(rho=float(params["rho"]))
    if kind == "rt_smooth":
        return RtSmooth(sigma_tilde=float(params["sigma_tilde"]))
    if kind == "coin_flip":
        return CoinFlip()
    if kind == "no_data":
        return NoData()
    if kind == "mixture":
        comps = tuple(rule_from_json(c, study) for c in params["components"])
        return Mixture(weights=tuple(params["weights"]), components=comps)
    if kind == "plug_in":
        inline = params.get("study")
        target = study_from_json(inline) if inline is not None else study
        if target is None:
            raise ValueError("plug_in rule needs a study (inline or ambient)")
        return PlugIn(study=target)
    raise ValueError(f"unknown rule kind: {kind!r}")
