"""Brute-force reference implementations for validating the engine.

These deliberately take a different route than the search pipeline: exact
Gaussian elimination decides feasibility of whole equation sets, and conflicts
and hitting sets come from exhaustive subset sweeps behind a desk-scale guard.
Agreement between engine and oracle is then evidence rather than tautology.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .equations import ZERO, Assignment
from .model import CausalGraph, Influence

SCALE_LIMIT = 12


class ScaleError(ValueError):
    """The exhaustive sweep would be too large to be a trustworthy oracle."""


def linear_feasible(equations: Iterable[Influence], known: Assignment) -> bool:
    """Exact satisfiability of the affine system with the known values fixed.

    Each influence contributes the row  sum(coeff_i * input_i) - output =
    -constant; known variables are substituted into the constant column and
    the rest eliminated over the rationals.  The system is infeasible exactly
    when elimination produces a row  0 = nonzero.
    """
    equations = list(equations)
    columns = sorted(
        {v for inf in equations for v in inf.variables if v not in known}
    )
    index = {v: i for i, v in enumerate(columns)}
    width = len(columns)

    rows: list[list[Fraction]] = []
    for inf in equations:
        row = [ZERO] * (width + 1)
        rhs = -inf.equation.constant
        for var, coeff in inf.equation.terms:
            if var in known:
                rhs -= coeff * known[var]
            else:
                row[index[var]] += coeff
        if inf.output in known:
            rhs += known[inf.output]
        else:
            row[index[inf.output]] -= Fraction(1)
        row[width] = rhs
        rows.append(row)

    pivot_row = 0
    for col in range(width):
        pivot = next(
            (r for r in range(pivot_row, len(rows)) if rows[r][col] != 0), None
        )
        if pivot is None:
            continue
        rows[pivot_row], rows[pivot] = rows[pivot], rows[pivot_row]
        lead = rows[pivot_row][col]
        rows[pivot_row] = [x / lead for x in rows[pivot_row]]
        for r in range(len(rows)):
            if r != pivot_row and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[pivot_row])]
        pivot_row += 1
        if pivot_row == len(rows):
            break

    return all(
        row[width] == 0 or any(x != 0 for x in row[:width]) for row in rows
    )


def oracle_conflicts(graph: CausalGraph, observations: Assignment) -> set[frozenset[str]]:
    """Subset-minimal component sets whose joint correctness is infeasible.

    Sweeps every nonempty component subset: the subset's influences together
    with the observations form an affine system, and the subset is a conflict
    when that system has no exact solution.
    """
    components = sorted({inf.component for inf in graph.declared_influences})
    if len(components) > SCALE_LIMIT:
        raise ScaleError(
            f"{len(components)} components exceed the oracle limit of {SCALE_LIMIT}"
        )
    by_component: dict[str, list[Influence]] = {c: [] for c in components}
    for inf in graph.declared_influences:
        by_component[inf.component].append(inf)

    infeasible: list[frozenset[str]] = []
    for size in range(1, len(components) + 1):
        for subset in combinations(components, size):
            chosen = frozenset(subset)
            if any(prior <= chosen for prior in infeasible):
                continue  # a proper subset already conflicts; not minimal
            equations = [inf for c in subset for inf in by_component[c]]
            if not linear_feasible(equations, observations):
                infeasible.append(chosen)
    return set(infeasible)


def oracle_hitting_sets(conflicts: Iterable[Iterable[str]]) -> set[frozenset[str]]:
    """Subset-minimal hitting sets of the family by exhaustive enumeration."""
    family = [frozenset(c) for c in conflicts]
    universe = sorted(set().union(*family)) if family else []
    if len(universe) > SCALE_LIMIT:
        raise ScaleError(
            f"{len(universe)} components exceed the oracle limit of {SCALE_LIMIT}"
        )
    hitting: list[frozenset[str]] = []
    for size in range(0, len(universe) + 1):
        for subset in combinations(universe, size):
            candidate = frozenset(subset)
            if any(prior <= candidate for prior in hitting):
                continue
            if all(candidate & conflict for conflict in family):
                hitting.append(candidate)
    return set(hitting)
