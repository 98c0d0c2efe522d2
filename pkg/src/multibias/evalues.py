"""Multi-bias E-values.

The E-value of an estimate, given a bias set, is the single value that all
sensitivity parameters would have to take at once for the bound to reach the
estimate (or the confidence limit nearer the null). Setting every parameter
of a bound to x collapses the product of factors into the polynomial ratio
x**n / (2x - 1)**k, so computing an E-value means inverting that function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .biases import BiasSet, Scale
from .bounds import GTerm, bound_expression
from .errors import DomainError

@dataclass(frozen=True)
class EffectEstimate:
    """An observed ratio estimate with optional confidence limits."""

    point: float
    lo: float | None = None
    hi: float | None = None
    scale: Scale = Scale.RISK_RATIO
    rare_outcome: bool = False

    def __post_init__(self) -> None:
        for label, v in (("point", self.point), ("lo", self.lo), ("hi", self.hi)):
            if v is not None and not v > 0:
                raise DomainError(f"{label} must be positive, got {v}")
        if self.lo is not None and self.lo > self.point:
            raise ValueError("lo must not exceed the point estimate")
        if self.hi is not None and self.hi < self.point:
            raise ValueError("hi must not be below the point estimate")
        if self.rare_outcome and self.scale is not Scale.ODDS_RATIO:
            raise ValueError("rare_outcome applies to odds ratios only")


def risk_ratio(point: float, lo: float | None = None, hi: float | None = None) -> EffectEstimate:
    """An estimate already on the risk ratio scale."""
    return EffectEstimate(point, lo, hi, Scale.RISK_RATIO)


def odds_ratio(
    point: float,
    lo: float | None = None,
    hi: float | None = None,
    *,
    rare_outcome: bool = False,
) -> EffectEstimate:
    """An odds ratio estimate; set rare_outcome when it approximates a RR."""
    return EffectEstimate(point, lo, hi, Scale.ODDS_RATIO, rare_outcome)


def to_risk_ratio(estimate: EffectEstimate) -> EffectEstimate:
    """Express an estimate on the risk ratio scale.

    Rare-outcome odds ratios pass through unchanged; other odds ratios are
    replaced by their square root, a conservative risk ratio. Anything else
    (hazard ratios in particular) is rejected.
    """
    if estimate.scale is Scale.RISK_RATIO:
        return estimate
    if estimate.scale is Scale.ODDS_RATIO:
        if estimate.rare_outcome:
            return replace(estimate, scale=Scale.RISK_RATIO, rare_outcome=False)
        return EffectEstimate(
            math.sqrt(estimate.point),
            None if estimate.lo is None else math.sqrt(estimate.lo),
            None if estimate.hi is None else math.sqrt(estimate.hi),
            Scale.RISK_RATIO,
        )
    raise DomainError(
        f"cannot convert scale {estimate.scale!r} to a risk ratio; hazard "
        "ratios and other measures are not supported"
    )


@dataclass(frozen=True)
class EValuePolynomial:
    """The bound as a function of one shared parameter value.

    With every parameter equal to x the bound is x**n / (2x - 1)**k: each
    joint factor contributes x**2/(2x - 1), each lone risk ratio parameter
    x, and each lone odds ratio parameter x**2 via its square root.
    """

    n: int
    k: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 0 or self.n < 2 * self.k:
            raise DomainError(
                f"polynomial ({self.n}, {self.k}) is not nondecreasing for x >= 1"
            )

    def value(self, x: float) -> float:
        return x**self.n / (2.0 * x - 1.0) ** self.k


def evalue_polynomial(bias_set: BiasSet) -> EValuePolynomial:
    """Polynomial whose inverse at a bias ratio gives the E-value."""
    expr = bound_expression(bias_set)
    n = sum(p.degree for p in bias_set.parameters)
    k = sum(1 for term in expr.terms if isinstance(term, GTerm))
    return EValuePolynomial(n, k)


def solve_polynomial(polynomial: EValuePolynomial, target: float) -> float:
    """The x >= 1 with polynomial.value(x) == target, for target >= 1.

    The residual satisfies |f(x) - target| <= 1e-9 * target; closed forms
    are used for pure powers and for the single joint-factor case.
    """
    if not target >= 1.0:
        raise DomainError(f"target must be at least 1, got {target}")
    if target == 1.0:
        return 1.0
    if polynomial.k == 0:
        return target ** (1.0 / polynomial.n)
    if polynomial.n == 2 and polynomial.k == 1:
        return target + math.sqrt(target * (target - 1.0))
    return _bisect(polynomial, target)


def _bisect(polynomial: EValuePolynomial, target: float) -> float:
    lo, hi = 1.0, 2.0
    while polynomial.value(hi) < target:
        lo, hi = hi, hi * 2.0
    # run the bracket down to machine precision; the residual tolerance is
    # then met with orders of magnitude to spare even where f is flat
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if polynomial.value(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class EValueResult:
    """E-values for an estimate and for the interval limit nearer the null."""

    bias_set: BiasSet
    estimate: EffectEstimate  # risk ratio scale, original direction
    true_value: float
    polynomial: EValuePolynomial
    evalue_point: float
    evalue_lo: float | None  # None when no E-value is reported for that side
    evalue_hi: float | None
    parameters: tuple[str, ...]  # names the shared parameter value refers to

    def to_json(self) -> dict:
        est = self.estimate
        return {
            "schema_version": 1,
            "biases": self.bias_set.label,
            "true_value": self.true_value,
            "point": est.point,
            "lo": est.lo,
            "hi": est.hi,
            "evalue_point": self.evalue_point,
            "evalue_lo": self.evalue_lo,
            "evalue_hi": self.evalue_hi,
            "parameters": list(self.parameters),
        }


def multi_evalue(
    bias_set: BiasSet, estimate: EffectEstimate, true_value: float = 1.0
) -> EValueResult:
    """Smallest shared parameter value able to explain away an estimate.

    Estimates below 1 are inverted first (together with their interval), so
    the result always refers to bias pushing the estimate away from
    true_value toward larger ratios. Only the confidence limit nearer the
    null receives an E-value; the far side is reported as None. Targets at
    or below 1 need no bias at all and get an E-value of 1.
    """
    if not true_value > 0:
        raise DomainError(f"true_value must be positive, got {true_value}")
    rr = to_risk_ratio(estimate)
    polynomial = evalue_polynomial(bias_set)
    inverted = rr.point < 1.0
    if inverted:
        point = 1.0 / rr.point
        near = None if rr.hi is None else 1.0 / rr.hi
    else:
        point = rr.point
        near = rr.lo
    evalue_point = _evalue_for(polynomial, point / true_value)
    evalue_near = None if near is None else _evalue_for(polynomial, near / true_value)
    return EValueResult(
        bias_set=bias_set,
        estimate=rr,
        true_value=true_value,
        polynomial=polynomial,
        evalue_point=evalue_point,
        evalue_lo=None if inverted else evalue_near,
        evalue_hi=evalue_near if inverted else None,
        parameters=tuple(p.evalue_name for p in bias_set.parameters),
    )


def _evalue_for(polynomial: EValuePolynomial, ratio: float) -> float:
    if ratio <= 1.0:
        return 1.0
    return solve_polynomial(polynomial, ratio)


@dataclass(frozen=True)
class CurvePoint:
    """One point of an E-value curve."""

    rr: float
    biases: str
    evalue: float


def evalue_curve(
    bias_sets: Sequence[BiasSet], rr_values: Sequence[float]
) -> list[CurvePoint]:
    """Point E-values for each bias set across a range of risk ratios."""
    points: list[CurvePoint] = []
    for bias_set in bias_sets:
        for rr in rr_values:
            result = multi_evalue(bias_set, risk_ratio(float(rr)))
            points.append(CurvePoint(float(rr), bias_set.label, result.evalue_point))
    return points
