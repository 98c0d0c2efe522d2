"""Exact finite worlds for stress-testing the bounds against ground truth.

A world is a small discrete joint distribution over a confounding factor, a
selection factor, exposure, outcome, selection, and optionally a recorded
(possibly misclassified) copy of the outcome or exposure. Its factorization
makes the structural assumptions behind the bounds hold exactly, so observed
and counterfactual risk ratios are computable by plain enumeration and the
bounds become falsifiable: for exact structures the realized bias must never
exceed the bound, while the exposure misclassification structure is only
approximate and its violation should shrink as the outcome gets rarer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .biases import (
    BiasKind,
    BiasSet,
    build_bias_set,
    confounding,
    misclassification,
    selection,
)
from .bounds import multi_bound
from .errors import DegenerateStratum, InfeasibleConfig, StructureMismatch

_MIN_MASS = 1e-9  # strata below this mass are resampled or rejected
_SLACK = 1e-12  # absolute tolerance when checking dominance
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class WorldConfig:
    """Which bias mechanisms a generated world contains."""

    confounding: bool = False
    selection: bool = False
    misclassification: str | None = None  # "outcome" or "exposure"
    confounder_levels: int = 2
    selection_levels: int = 2
    rare_outcome_ceiling: float | None = None  # upper limit for every stratum risk

    def __post_init__(self) -> None:
        if self.misclassification not in (None, "outcome", "exposure"):
            raise InfeasibleConfig(
                f"misclassification must be None, 'outcome' or 'exposure', "
                f"got {self.misclassification!r}"
            )
        if not (2 <= self.confounder_levels <= 3 and 2 <= self.selection_levels <= 3):
            raise InfeasibleConfig("factor supports must have 2 or 3 levels")
        if self.rare_outcome_ceiling is not None and not (
            1e-6 <= self.rare_outcome_ceiling <= 1.0
        ):
            raise InfeasibleConfig(
                "rare_outcome_ceiling must lie in [1e-6, 1] to keep outcome "
                "probabilities positive at machine precision"
            )


@dataclass(frozen=True)
class World:
    """A finite joint distribution satisfying the declared structure exactly.

    Factorization: P(uc, us) * P(a | uc) * P(y | a, uc, us) * P(s | a, us),
    with the recorded copy drawn from P(m | y, a). This yields
    exchangeability given the confounding factor, selection independent of
    the outcome given exposure and the selection factor, and classification
    errors that may depend on the true exposure and outcome but nothing else.
    """

    config: WorldConfig
    p_u: np.ndarray  # (nc, ns) joint mass of the latent factors
    p_a: np.ndarray  # (nc,) chance of exposure given the confounding factor
    p_y: np.ndarray  # (2, nc, ns) outcome risk given exposure and factors
    p_s: np.ndarray  # (2, ns) selection chance given exposure and factor
    p_m: np.ndarray | None  # (2, 2) by (true y, true a): chance the copy is 1

    def __post_init__(self) -> None:
        for array in (self.p_u, self.p_a, self.p_y, self.p_s, self.p_m):
            if array is not None:
                array.setflags(write=False)

    def joint(self) -> np.ndarray:
        """Full table over (uc, us, a, y, s, m); m mirrors y when exact."""
        pa = np.stack([1.0 - self.p_a, self.p_a])  # (a, nc)
        py = np.stack([1.0 - self.p_y, self.p_y])  # (y, a, nc, ns)
        ps = np.stack([1.0 - self.p_s, self.p_s])  # (s, a, ns)
        if self.p_m is None:
            pm = np.zeros((2, 2, 2))  # (m, y, a)
            pm[1, 1, :] = 1.0
            pm[0, 0, :] = 1.0
        else:
            pm = np.stack([1.0 - self.p_m, self.p_m])  # (m, y, a)
        return np.einsum("cu,ac,yacu,sau,mya->cuaysm", self.p_u, pa, py, ps, pm)


def generate_world(config: WorldConfig, seed: int) -> World:
    """Draw a random world with the configured mechanisms active.

    When misclassification is active the exposure labels are chosen so the
    outcome risk comparison among the selected runs in the causative
    direction, and classification rates are redrawn until the differential
    factor is at least 1: the misclassification part of the bound is
    one-sided, and these pure relabelings/redraws put the world on the side
    it covers without touching any structural assumption.
    """
    rng = np.random.default_rng(seed)
    nc, ns = config.confounder_levels, config.selection_levels

    for _ in range(_MAX_REDRAWS):
        p_u = rng.dirichlet(np.ones(nc * ns)).reshape(nc, ns)
        if p_u.min() >= _MIN_MASS:
            break
    else:
        raise DegenerateStratum("could not draw latent factors with enough mass")

    if config.confounding:
        p_a = rng.uniform(0.05, 0.95, nc)
    else:
        p_a = np.full(nc, rng.uniform(0.05, 0.95))

    ceiling = config.rare_outcome_ceiling or 1.0
    p_y = rng.uniform(0.001 * ceiling, ceiling, (2, nc, ns))

    if config.selection:
        p_s = rng.uniform(0.05, 0.95, (2, ns))
    else:
        p_s = np.ones((2, ns))

    world = World(config, p_u, p_a, p_y, p_s, _draw_rates(rng, config.misclassification))
    if config.misclassification is not None:
        world = _orient(world)
        for _ in range(_MAX_REDRAWS):
            if _differential_factor(world) >= 1.0:
                break
            world = replace(world, p_m=_draw_rates(rng, config.misclassification))
        else:  # pragma: no cover - each redraw succeeds with fair probability
            raise InfeasibleConfig("could not draw classification rates")
    return world


def _draw_rates(rng: np.random.Generator, kind: str | None) -> np.ndarray | None:
    if kind is None:
        return None
    rates = np.empty((2, 2))
    if kind == "outcome":
        rates[1] = rng.uniform(0.5, 0.99, 2)  # sensitivity by exposure arm
        rates[0] = rng.uniform(0.01, 0.5, 2)  # false positives by exposure arm
    else:
        rates[:, 1] = rng.uniform(0.5, 0.99, 2)  # P(A*=1 | A=1) by outcome
        rates[:, 0] = rng.uniform(0.01, 0.5, 2)  # P(A*=1 | A=0) by outcome
    return rates


def _orient(world: World) -> World:
    """Relabel exposure so the selected outcome risk is higher under A=1."""
    if _selected_risk(world, 1) >= _selected_risk(world, 0):
        return world
    p_m = world.p_m
    if p_m is not None:
        p_m = p_m[:, ::-1].copy()
        if world.config.misclassification == "exposure":
            p_m = 1.0 - p_m  # the recorded copy's labels flip with the true ones
    return World(
        world.config,
        world.p_u,
        1.0 - world.p_a,
        world.p_y[::-1].copy(),
        world.p_s[::-1].copy(),
        p_m,
    )


def _selected_risk(world: World, a: int) -> float:
    mass = world.p_u * _exposure_weights(world, a)[:, None] * world.p_s[a]
    return float((mass * world.p_y[a]).sum() / mass.sum())


def _differential_factor(world: World) -> float:
    """The misclassification bounding factor implied by the error rates."""
    rates = world.p_m
    if rates is None:
        raise StructureMismatch("world has no misclassification")
    if world.config.misclassification == "outcome":
        return float(max(rates[1, 1] / rates[1, 0], rates[0, 1] / rates[0, 0]))
    s1, s0 = rates[1, 1], rates[0, 1]  # P(A*=1 | Y=y, A=1) for y = 1, 0
    f1, f0 = rates[1, 0], rates[0, 0]  # P(A*=1 | Y=y, A=0) for y = 1, 0
    false_positive = (f1 / f0) / ((1.0 - f1) / (1.0 - f0))
    sensitivity = (s1 / s0) / ((1.0 - s1) / (1.0 - s0))
    correct = (s1 / s0) / ((1.0 - f1) / (1.0 - f0))
    incorrect = (f1 / f0) / ((1.0 - s1) / (1.0 - s0))
    return float(max(false_positive, sensitivity, correct, incorrect))


def _exposure_weights(world: World, a: int) -> np.ndarray:
    return world.p_a if a == 1 else 1.0 - world.p_a


def _confounder_given_a(world: World, a: int) -> np.ndarray:
    mass = world.p_u.sum(axis=1) * _exposure_weights(world, a)
    return mass / mass.sum()


def _rr_a_uc(world: World) -> float:
    return float((_confounder_given_a(world, 1) / _confounder_given_a(world, 0)).max())


def _rr_uc_y(world: World) -> float:
    us_given_uc = world.p_u / world.p_u.sum(axis=1, keepdims=True)
    out = 1.0
    for a in (0, 1):
        risk = (us_given_uc * world.p_y[a]).sum(axis=1)  # P(Y=1 | a, uc)
        out = max(out, float(risk.max() / risk.min()))
    return out


def _rr_us_y(world: World, a: int) -> float:
    mass = world.p_u * _exposure_weights(world, a)[:, None]
    uc_given_us = mass / mass.sum(axis=0, keepdims=True)
    risk = (uc_given_us * world.p_y[a]).sum(axis=0)  # P(Y=1 | a, us)
    return float(risk.max() / risk.min())


def _factor_given_a_s(world: World, a: int, s: int) -> np.ndarray:
    chance = world.p_s[a] if s == 1 else 1.0 - world.p_s[a]
    mass = (world.p_u * _exposure_weights(world, a)[:, None]).sum(axis=0) * chance
    total = mass.sum()
    if total < _MIN_MASS:
        raise DegenerateStratum(f"stratum A={a}, S={s} has no mass")
    return mass / total


def _rr_s_us(world: World, a: int) -> float:
    # the relevant reweighting runs toward S=1 for the exposed arm and
    # toward S=0 for the unexposed arm
    if a == 1:
        return float((_factor_given_a_s(world, 1, 1) / _factor_given_a_s(world, 1, 0)).max())
    return float((_factor_given_a_s(world, 0, 0) / _factor_given_a_s(world, 0, 1)).max())


def _joint_given_a_s1(world: World, a: int) -> np.ndarray:
    mass = world.p_u * _exposure_weights(world, a)[:, None] * world.p_s[a]
    total = mass.sum()
    if total < _MIN_MASS:
        raise DegenerateStratum(f"stratum A={a}, S=1 has no mass")
    return mass / total


def _rr_a_usc(world: World) -> float:
    return float((_joint_given_a_s1(world, 1) / _joint_given_a_s1(world, 0)).max())


def _rr_usc_y(world: World) -> float:
    out = 1.0
    for a in (0, 1):
        out = max(out, float(world.p_y[a].max() / world.p_y[a].min()))
    return out


_EXTRACTORS: dict[str, Callable[[World], float]] = {
    "RRAUc": _rr_a_uc,
    "RRUcY": _rr_uc_y,
    "RRUsYA1": lambda w: _rr_us_y(w, 1),
    "RRSUsA1": lambda w: _rr_s_us(w, 1),
    "RRUsYA0": lambda w: _rr_us_y(w, 0),
    "RRSUsA0": lambda w: _rr_s_us(w, 0),
    "RRAUscS": _rr_a_usc,
    "RRUscYS": _rr_usc_y,
    "RRAYy": _differential_factor,
    "RRAYyS": _differential_factor,
    "ORYAa": _differential_factor,
    "ORYAaS": _differential_factor,
}


def _check_structure(world: World, bias_set: BiasSet) -> None:
    config = world.config
    declared = {b.kind: b for b in bias_set.biases}
    sel = declared.get(BiasKind.SELECTION)
    mis = declared.get(BiasKind.MISCLASSIFICATION)
    selected = sel is not None and sel.population == "selected"

    if sel is not None and (sel.risk_direction is not None or sel.s_equals_u):
        raise StructureMismatch(
            "risk-direction and s_equals_u simplifications assume one-sided "
            "selection effects that generated worlds do not enforce"
        )
    if mis is not None and mis.rare_exposure:
        raise StructureMismatch("rare-exposure worlds are not generated")
    if mis is not None and sel is not None and not selected:
        kinds = [b.kind for b in bias_set.biases]
        if kinds.index(BiasKind.MISCLASSIFICATION) < kinds.index(BiasKind.SELECTION):
            raise StructureMismatch(
                "worlds model classification errors within the selected "
                "sample; declare selection before misclassification"
            )
    expected_mis = mis.variable if mis is not None else None
    if config.misclassification != expected_mis:
        raise StructureMismatch(
            f"world misclassification {config.misclassification!r} does not "
            f"match the bias set's {expected_mis!r}"
        )
    if config.selection != (sel is not None):
        raise StructureMismatch("world selection does not match the bias set")
    # a selected-population set covers confounding whether or not it is
    # present, since its parameters range over the joint factor
    if not selected and config.confounding != (BiasKind.CONFOUNDING in declared):
        raise StructureMismatch("world confounding does not match the bias set")


def extract_parameters(world: World, bias_set: BiasSet) -> dict[str, float]:
    """Exact parameter values for a world, keyed by argument name.

    Each ratio is computed from the world's structural tables by taking
    maxima and minima over the latent factor levels.
    """
    _check_structure(world, bias_set)
    return {p.name: _EXTRACTORS[p.name](world) for p in bias_set.parameters}


def observed_and_true_rr(world: World, bias_set: BiasSet) -> tuple[float, float]:
    """The observable risk ratio and the causal risk ratio it may distort.

    The observed ratio conditions on selection and uses the recorded copy
    whenever the structure includes those mechanisms. The true ratio
    standardizes the potential-outcome risks over the latent factors, in the
    whole population or among the selected, per the bias set's target.
    """
    _check_structure(world, bias_set)
    joint = world.joint()  # axes (uc, us, a, y, s, m)
    config = world.config

    if config.misclassification == "exposure":
        # the recorded copy is the analysis exposure
        num = joint[:, :, :, 1, 1, :].sum(axis=(0, 1, 2))  # (m,)
        den = joint[:, :, :, :, 1, :].sum(axis=(0, 1, 2, 3))
    elif config.misclassification == "outcome":
        num = joint[:, :, :, :, 1, 1].sum(axis=(0, 1, 3))  # (a,)
        den = joint[:, :, :, :, 1, :].sum(axis=(0, 1, 3, 4))
    else:
        num = joint[:, :, :, 1, 1, :].sum(axis=(0, 1, 3))  # (a,)
        den = joint[:, :, :, :, 1, :].sum(axis=(0, 1, 3, 4))
    if den.min() < _MIN_MASS or num.min() <= 0.0:
        raise DegenerateStratum("an analysis cell has (almost) no mass")
    risk = num / den
    rr_obs = float(risk[1] / risk[0])

    sel = next((b for b in bias_set.biases if b.kind is BiasKind.SELECTION), None)
    if sel is not None and sel.population == "selected":
        weights = joint[:, :, :, :, 1, :].sum(axis=(2, 3, 4))
        weights = weights / weights.sum()
    else:
        weights = world.p_u
    risk1 = float((weights * world.p_y[1]).sum())
    risk0 = float((weights * world.p_y[0]).sum())
    return rr_obs, risk1 / risk0


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking one world against the bound."""

    ratio: float  # realized observed-to-true risk ratio
    bound: float  # bound evaluated at the world's exact parameters
    holds: bool  # ratio <= bound + 1e-12
    slack: float  # bound - ratio; negative means the bound was violated
    prevalence: float  # largest stratum outcome risk (how rare the outcome is)


def verify_bound(world: World, bias_set: BiasSet) -> BoundReport:
    """Compare the bias realized in a world against the bound's promise."""
    params = extract_parameters(world, bias_set)
    rr_obs, rr_true = observed_and_true_rr(world, bias_set)
    bound = multi_bound(bias_set, params)
    ratio = rr_obs / rr_true
    return BoundReport(
        ratio=ratio,
        bound=bound,
        holds=bool(ratio <= bound + _SLACK),
        slack=float(bound - ratio),
        prevalence=float(world.p_y.max()),
    )


STRUCTURES: dict[str, tuple[WorldConfig, BiasSet]] = {
    "confounding": (
        WorldConfig(confounding=True),
        build_bias_set([confounding()]),
    ),
    "selection": (
        WorldConfig(selection=True),
        build_bias_set([selection()]),
    ),
    "selection_selected": (
        WorldConfig(selection=True),
        build_bias_set([selection("selected")]),
    ),
    "outcome_misclassification": (
        WorldConfig(misclassification="outcome"),
        build_bias_set([misclassification("outcome")]),
    ),
    "result1": (
        WorldConfig(confounding=True, selection=True, misclassification="outcome"),
        build_bias_set([confounding(), selection(), misclassification("outcome")]),
    ),
    "result2": (
        WorldConfig(
            confounding=True,
            selection=True,
            misclassification="exposure",
            rare_outcome_ceiling=0.01,
        ),
        build_bias_set(
            [confounding(), selection(), misclassification("exposure", rare_outcome=True)]
        ),
    ),
    "result3": (
        WorldConfig(confounding=True, selection=True, misclassification="outcome"),
        build_bias_set(
            [confounding(), selection("selected"), misclassification("outcome")]
        ),
    ),
}
