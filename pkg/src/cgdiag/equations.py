"""Exact evaluation, inversion, and satisfaction checking of influence equations.

All arithmetic is over `fractions.Fraction`; there is no floating point
anywhere in the solving path, so conflicts are crisp: two derivations of the
same variable either agree exactly or they do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .model import Influence, as_fraction

ZERO = Fraction(0)

Assignment = Mapping[str, Fraction]


class MissingValueError(ValueError):
    """The environment lacks a value required by the operation."""


class NotAnInputError(ValueError):
    """Backward solving was asked for a variable the equation does not use."""


class StructureError(ValueError):
    """The equation set is not solvable by single-unknown propagation steps."""


def parse_rational(text: str) -> Fraction:
    """Parse an integer, exact decimal, or p/q literal into a Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Render in lowest terms: 'p' or 'p/q' with positive denominator."""
    return str(as_fraction(value))


def _require(env: Assignment, var: str, context: str) -> Fraction:
    try:
        return env[var]
    except KeyError:
        raise MissingValueError(f"{context}: no value for {var!r}") from None


def eval_forward(influence: Influence, env: Assignment) -> Fraction:
    """Value of the output: constant + sum(coefficient * input)."""
    total = influence.equation.constant
    for var, coeff in influence.equation.terms:
        total += coeff * _require(env, var, f"evaluating {influence.id}")
    return total


def eval_backward(influence: Influence, env: Assignment, missing: str) -> Fraction:
    """The unique value of input `missing` making the equation hold.

    Total because every coefficient is nonzero.  Any value `env` may hold
    for `missing` itself is ignored.
    """
    if missing not in influence.inputs:
        raise NotAnInputError(f"{missing!r} is not an input of {influence.id}")
    total = _require(env, influence.output, f"inverting {influence.id}")
    total -= influence.equation.constant
    for var, coeff in influence.equation.terms:
        if var == missing:
            continue
        total -= coeff * _require(env, var, f"inverting {influence.id}")
    return total / influence.equation.coefficient(missing)


def check_satisfied(influence: Influence, env: Assignment, tolerance: Fraction = ZERO) -> tuple[bool, Fraction]:
    """Whether |output - forward value| is within tolerance, plus that magnitude."""
    observed = _require(env, influence.output, f"checking {influence.id}")
    magnitude = abs(observed - eval_forward(influence, env))
    return magnitude <= tolerance, magnitude


@dataclass(frozen=True)
class Residual:
    """Two derivations of one variable and how far apart they landed."""

    variable: str
    route_a: Fraction
    route_b: Fraction

    @property
    def magnitude(self) -> Fraction:
        return abs(self.route_a - self.route_b)


class DerivationMemo:
    """Cache of solved values keyed by (variable, supporting influence set).

    A value derived by single-unknown propagation is the unique solution of a
    square triangular system, so it depends only on which influences support
    it — the cache is sound across structures sharing a sub-derivation.
    """

    def __init__(self) -> None:
        self.values: dict[tuple[str, frozenset[str]], Fraction] = {}
        self.hits = 0

    def lookup(self, var: str, support: frozenset[str]) -> Fraction | None:
        value = self.values.get((var, support))
        if value is not None:
            self.hits += 1
        return value

    def store(self, var: str, support: frozenset[str], value: Fraction) -> None:
        self.values[(var, support)] = value


def _solve_single(influence: Influence, env: Assignment, var: str) -> Fraction:
    if var == influence.output:
        return eval_forward(influence, env)
    return eval_backward(influence, env, var)


def solve_structure(
    equations: Iterable[Influence],
    known: Assignment,
    unknowns: Iterable[str],
    head: str,
    tolerance: Fraction = ZERO,
    memo: DerivationMemo | None = None,
    hold_head: bool = True,
):
    """Propagate values through the equations and test the head's two derivations.

    Returns ``(True, assignment)`` when every route agrees within tolerance
    (the assignment covers all unknowns and the head), or ``(False, residual)``
    with the witnessing pair of values.

    The head's observed value, if present in `known`, is held out and acts as
    one derivation route.  The first derived head value is committed so that
    propagation can continue through the head; a later equation whose values
    are all fixed is re-solved for the head to obtain the second route, or —
    if it does not touch the head — evaluated as a plain check.  With
    ``hold_head=False`` the observed head stays in the environment, for
    structures that only propagate when the head anchors them.
    """
    eqs = sorted(equations, key=lambda inf: inf.id)
    env: dict[str, Fraction] = {
        v: val for v, val in known.items() if v != head or not hold_head
    }
    support: dict[str, frozenset[str]] = {v: frozenset() for v in env}
    head_observed = known.get(head)
    pending = set(unknowns) | {head}

    head_values: list[Fraction] = []
    checks: list[Residual] = []
    used: set[str] = set()

    progress = True
    while progress:
        progress = False
        for inf in eqs:
            if inf.id in used:
                continue
            undefined = [v for v in dict.fromkeys(inf.variables) if v not in env]
            if len(undefined) > 1:
                continue
            used.add(inf.id)
            progress = True
            if not undefined:
                # fully determined: a second head route, or a plain check
                if head in inf.variables:
                    head_values.append(_solve_single(inf, env, head))
                else:
                    predicted = eval_forward(inf, env)
                    checks.append(Residual(inf.output, predicted, env[inf.output]))
                continue
            var = undefined[0]
            var_support = frozenset({inf.id}).union(
                *(support[v] for v in dict.fromkeys(inf.variables) if v != var)
            )
            value = memo.lookup(var, var_support) if memo is not None else None
            if value is None:
                value = _solve_single(inf, env, var)
                if memo is not None:
                    memo.store(var, var_support, value)
            if var == head:
                head_values.append(value)
            env[var] = value
            support[var] = var_support

    if head_observed is not None:
        head_values.append(head_observed)

    missing = sorted(v for v in pending if v not in env)
    if missing:
        raise StructureError("propagation stalled; undefined: " + ", ".join(missing))
    if len(head_values) < 2 and not checks:
        raise StructureError(f"head {head!r} is not double-defined by the structure")

    if len(head_values) >= 2:
        residual = Residual(head, head_values[0], head_values[1])
        if residual.magnitude > tolerance:
            return False, residual
    for check in checks:
        if check.magnitude > tolerance:
            return False, check
    return True, env
