"""Evaluating multiplicative bounds on the ratio of observed to true risk ratio."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .biases import BiasSet, Parameter
from .errors import DomainError, MissingParameter, UnknownParameter


def g(a: float, b: float) -> float:
    """Joint bounding factor a*b/(a+b-1) of two parameters, each at least 1.

    Symmetric, between 1 and a*b, nondecreasing in both arguments, and equal
    to 1 exactly when either argument is 1.
    """
    if not (a >= 1.0 and b >= 1.0):
        raise DomainError(f"g is defined for arguments >= 1, got ({a}, {b})")
    return a * b / (a + b - 1.0)


@dataclass(frozen=True)
class GTerm:
    """Two parameters combined through ``g`` into one bounding factor."""

    first: Parameter
    second: Parameter

    @property
    def parameters(self) -> tuple[Parameter, ...]:
        return (self.first, self.second)

    def evaluate(self, values: Mapping[str, float]) -> float:
        return g(values[self.first.name], values[self.second.name])


@dataclass(frozen=True)
class SingleTerm:
    """A parameter that enters the bound directly."""

    parameter: Parameter

    @property
    def parameters(self) -> tuple[Parameter, ...]:
        return (self.parameter,)

    def evaluate(self, values: Mapping[str, float]) -> float:
        return values[self.parameter.name]


BoundTerm = GTerm | SingleTerm


@dataclass(frozen=True)
class BoundExpression:
    """Product of bounding factors for a bias set."""

    bias_set: BiasSet
    terms: tuple[BoundTerm, ...]

    @property
    def parameters(self) -> tuple[Parameter, ...]:
        return tuple(p for term in self.terms for p in term.parameters)

    def evaluate(self, values: Mapping[str, float]) -> float:
        out = 1.0
        for term in self.terms:
            out *= term.evaluate(values)
        return out


def bound_expression(bias_set: BiasSet) -> BoundExpression:
    """Assemble the bounding factors of a bias set.

    Adjacent parameters sharing a group become one joint factor; the rest
    enter on their own.
    """
    terms: list[BoundTerm] = []
    params = bias_set.parameters
    i = 0
    while i < len(params):
        p = params[i]
        if (
            p.group is not None
            and i + 1 < len(params)
            and params[i + 1].group == p.group
        ):
            terms.append(GTerm(p, params[i + 1]))
            i += 2
        else:
            terms.append(SingleTerm(p))
            i += 1
    return BoundExpression(bias_set, tuple(terms))


def _validated(bias_set: BiasSet, values: Mapping[str, Any]) -> dict[str, float]:
    names = bias_set.parameter_names()
    expected = ", ".join(names)
    unknown = sorted(set(values) - set(names))
    if unknown:
        raise UnknownParameter(
            f"unknown parameter(s) {', '.join(unknown)}; expected: {expected}"
        )
    missing = [n for n in names if n not in values]
    if missing:
        raise MissingParameter(
            f"missing value for parameter(s) {', '.join(missing)}; expected: {expected}"
        )
    out: dict[str, float] = {}
    for name in names:
        value = float(values[name])
        if not value >= 1.0:
            raise DomainError(f"parameter {name} must be at least 1, got {values[name]}")
        out[name] = value
    return out


def multi_bound(bias_set: BiasSet, values: Mapping[str, float]) -> float:
    """Largest possible ratio of observed to true risk ratio under the set.

    ``values`` maps every parameter's argument name to a number >= 1.
    """
    return bound_expression(bias_set).evaluate(_validated(bias_set, values))


@dataclass(frozen=True)
class GridTable:
    """The bound over a grid of two parameters, the others held fixed."""

    bias_set: BiasSet
    row_name: str
    col_name: str
    row_values: tuple[float, ...]
    col_values: tuple[float, ...]
    fixed: Mapping[str, float]
    values: np.ndarray  # shape (len(row_values), len(col_values))

    def to_csv(self) -> str:
        """CSV with the column parameter's values as header, rows labeled."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + [str(v) for v in self.col_values])
        for row_value, row in zip(self.row_values, self.values):
            writer.writerow([str(row_value)] + [str(float(x)) for x in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "biases": self.bias_set.label,
            "row_parameter": self.row_name,
            "col_parameter": self.col_name,
            "row_values": list(self.row_values),
            "col_values": list(self.col_values),
            "fixed": dict(self.fixed),
            "values": [[float(x) for x in row] for row in self.values],
        }


def grid_table(
    bias_set: BiasSet,
    vary: Sequence[tuple[str, Sequence[float]]],
    fixed: Mapping[str, float] | None = None,
) -> GridTable:
    """Evaluate the bound over a two-parameter grid.

    ``vary`` holds two (name, values) pairs giving the row and the column
    parameter; ``fixed`` holds values for every remaining parameter.
    """
    if len(vary) != 2:
        raise ValueError("exactly two parameters must vary")
    (row_name, row_values), (col_name, col_values) = vary
    if row_name == col_name:
        raise ValueError("the two varying parameters must differ")
    if not len(row_values) or not len(col_values):
        raise ValueError("grid values must be non-empty")
    fixed = dict(fixed or {})
    overlap = sorted({row_name, col_name} & set(fixed))
    if overlap:
        raise ValueError(f"parameter(s) {', '.join(overlap)} are both varied and fixed")

    probe = dict(fixed)
    probe[row_name] = row_values[0]
    probe[col_name] = col_values[0]
    fixed = {k: v for k, v in _validated(bias_set, probe).items() if k in fixed}
    for name, grid_values in ((row_name, row_values), (col_name, col_values)):
        for v in grid_values:
            if not float(v) >= 1.0:
                raise DomainError(f"parameter {name} must be at least 1, got {v}")

    expr = bound_expression(bias_set)
    table = np.empty((len(row_values), len(col_values)))
    cell = dict(fixed)
    for i, rv in enumerate(row_values):
        for j, cv in enumerate(col_values):
            cell[row_name] = float(rv)
            cell[col_name] = float(cv)
            table[i, j] = expr.evaluate(cell)
    table.setflags(write=False)
    return GridTable(
        bias_set,
        row_name,
        col_name,
        tuple(float(v) for v in row_values),
        tuple(float(v) for v in col_values),
        fixed,
        table,
    )


@dataclass(frozen=True)
class ShiftedEstimate:
    """An estimate and interval after shifting toward the null by a bound."""

    point: float
    lo: float
    hi: float
    bound: float


def adjust_estimate(
    bias_set: BiasSet,
    values: Mapping[str, float],
    point: float,
    lo: float,
    hi: float,
) -> ShiftedEstimate:
    """Shift an observed risk ratio and its interval toward the null.

    The whole interval moves by the bound's factor: divided when the point
    estimate is at or above 1, multiplied when below.
    """
    for label, v in (("point", point), ("lo", lo), ("hi", hi)):
        if not v > 0:
            raise DomainError(f"{label} must be positive, got {v}")
    if not lo <= point <= hi:
        raise ValueError("interval must satisfy lo <= point <= hi")
    bound = multi_bound(bias_set, values)
    if point >= 1.0:
        return ShiftedEstimate(point / bound, lo / bound, hi / bound, bound)
    return ShiftedEstimate(point * bound, lo * bound, hi * bound, bound)
