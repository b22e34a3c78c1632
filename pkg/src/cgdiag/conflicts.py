"""Two-stage systematic conflict generation over a closure.

Stage one enumerates Potential Conflict Structures: influence subsets of size
m+1 whose variables involve exactly m effective unknowns, where single-unknown
propagation can fix every unknown and no proper subset could already carry a
check on its own.  Stage two verifies each structure by exact solving; the
structures whose two head derivations disagree become conflict sets.

Zero-order conflicts (violated equations over fully measured variables) are
always emitted first; orders then ascend, sizes ascend within an order, and
any structure whose components already cover a confirmed conflict is pruned
without solving.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .equations import (
    ZERO,
    Assignment,
    DerivationMemo,
    Residual,
    StructureError,
    check_satisfied,
    solve_structure,
)
from .model import Influence
from .restriction import Closure

Step = tuple[str, str, str]  # (influence id or "obs", solved variable, direction)


@dataclass(frozen=True)
class PotentialConflictStructure:
    """A candidate conflict: m+1 influences over m unknowns with a double-defined head."""

    head: str
    influences: tuple[str, ...]
    unmeasured: tuple[str, ...]
    components: tuple[str, ...]
    observed: tuple[str, ...]
    route_a: tuple[Step, ...]
    route_b: tuple[Step, ...]
    objects: tuple[Influence, ...] = field(compare=False, repr=False)

    @property
    def order(self) -> int:
        """m: the number of effective unknowns the structure must derive."""
        return len(self.unmeasured)

    @property
    def size(self) -> int:
        """j: the number of distinct components under suspicion."""
        return len(self.components)


@dataclass(frozen=True)
class ConflictSet:
    """Components that cannot all be OK, with the witnessing disagreement."""

    components: tuple[str, ...]
    head: str | None
    residual: Residual | None
    order: int
    size: int


@dataclass(frozen=True)
class SearchStrategy:
    max_order: int | None = None
    max_size: int | None = None
    max_count: int | None = None
    tolerance: Fraction = ZERO


@dataclass
class SearchResult:
    """Minimal conflicts in emission order plus the search bookkeeping."""

    conflicts: list[ConflictSet]
    pcs_examined: int = 0
    pcs_pruned: int = 0
    cache_hits: int = 0
    counts_by_order: dict[int, int] = field(default_factory=dict)
    max_order_hit: bool = False
    max_size_hit: bool = False
    max_count_hit: bool = False


def _effective_unknown(closure: Closure, observations: Assignment, var: str) -> bool:
    """Unmeasured, or measured but unobserved: must be derived, cannot anchor."""
    return not closure.graph.variables[var].measured or var not in observations


def _structure_vars(influences: Iterable[Influence]) -> list[str]:
    seen: dict[str, None] = {}
    for inf in influences:
        for var in inf.variables:
            seen.setdefault(var)
    return sorted(seen)


def _peel(influences: Sequence[Influence], defined: Iterable[str]):
    """Single-unknown propagation without values.

    Returns (complete, chains, leftovers): `complete` when every influence was
    consumed, `chains[var]` the ordered derivation steps supporting var, and
    `leftovers` the influences that became fully determined (checks).
    """
    defined = set(defined)
    chains: dict[str, tuple[Step, ...]] = {v: () for v in defined}
    leftovers: list[Influence] = []
    used: set[str] = set()
    eqs = sorted(influences, key=lambda inf: inf.id)
    progress = True
    while progress:
        progress = False
        for inf in eqs:
            if inf.id in used:
                continue
            undefined = [v for v in dict.fromkeys(inf.variables) if v not in defined]
            if len(undefined) > 1:
                continue
            used.add(inf.id)
            progress = True
            if not undefined:
                leftovers.append(inf)
                continue
            var = undefined[0]
            direction = "forward" if var == inf.output else "backward"
            chain = _merge_chains(
                [chains[v] for v in dict.fromkeys(inf.variables) if v != var],
                (inf.id, var, direction),
            )
            chains[var] = chain
            defined.add(var)
    return len(used) == len(eqs), chains, leftovers


def _merge_chains(parts: Iterable[tuple[Step, ...]], final: Step) -> tuple[Step, ...]:
    merged: dict[Step, None] = {}
    for part in parts:
        for step in part:
            merged.setdefault(step)
    merged.setdefault(final)
    return tuple(merged)


def _check_capable(influences: Sequence[Influence], closure: Closure, observations: Assignment) -> bool:
    """Can this set alone check anything: all unknowns derivable, one equation spare."""
    variables = _structure_vars(influences)
    unknowns = [v for v in variables if _effective_unknown(closure, observations, v)]
    if len(influences) <= len(unknowns):
        return False
    complete, _, _ = _peel(influences, set(variables) - set(unknowns))
    return complete


def zero_order_conflicts(
    closure: Closure, observations: Assignment, tolerance: Fraction = ZERO
) -> list[ConflictSet]:
    """Violated influences over fully measured, observed variables: singleton conflicts."""
    conflicts: list[ConflictSet] = []
    seen: set[tuple[str, ...]] = set()
    for inf in closure.influence_objects():
        if any(_effective_unknown(closure, observations, v) for v in inf.variables):
            continue
        satisfied, _ = check_satisfied(inf, observations, tolerance)
        if satisfied:
            continue
        components = (inf.component,)
        if components in seen:
            continue
        seen.add(components)
        residual = Residual(
            inf.output,
            sum(
                (coeff * observations[var] for var, coeff in inf.equation.terms),
                inf.equation.constant,
            ),
            observations[inf.output],
        )
        conflicts.append(ConflictSet(components, inf.output, residual, 0, 1))
    conflicts.sort(key=lambda c: c.components)
    return conflicts


def _select_head(combo, closure, observations, unknowns, observed):
    """Canonical head plus its two routes; one head per structure.

    Preference order: the smallest misbehaving measured variable whose
    held-out peel still derives everything (its observation is route b), then
    the smallest unknown that the leftover equation re-derives, then the
    first candidate of either kind (verification falls back to plain checks).
    """
    variables = _structure_vars(combo)
    misbehaving = [v for v in variables if v in closure.misbehaving and v in observed]
    for head in misbehaving:
        complete, chains, leftovers = _peel(combo, set(observed) - {head})
        if complete and head in chains and not leftovers:
            return head, chains[head], (("obs", head, "observed"),)
    complete, chains, leftovers = _peel(combo, observed)
    if complete and leftovers:
        leftover = leftovers[0]
        for head in unknowns:
            if head in leftover.variables:
                direction = "forward" if head == leftover.output else "backward"
                route_b = _merge_chains(
                    [chains[v] for v in dict.fromkeys(leftover.variables) if v != head],
                    (leftover.id, head, direction),
                )
                return head, chains[head], route_b
        # leftover not touching any unknown twice-over: keep it as a check route
        route_b = _merge_chains(
            [chains[v] for v in dict.fromkeys(leftover.variables)],
            (leftover.id, leftover.output, "check"),
        )
        fallback = misbehaving[0] if misbehaving else unknowns[0]
        return fallback, chains.get(fallback, ()), route_b
    fallback = misbehaving[0] if misbehaving else unknowns[0]
    return fallback, (), (("obs", fallback, "observed"),) if fallback in observed else ()


def enumerate_pcs(closure: Closure, observations: Assignment, order: int) -> list[PotentialConflictStructure]:
    """Every structurally distinct PCS of the given order inside the closure.

    Ordered by increasing size j, then component ids, then influence ids;
    structures identical up to the head choice appear once, under their
    canonical head.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    m = order
    pool = closure.influence_objects()
    structures: list[PotentialConflictStructure] = []
    for combo in combinations(pool, m + 1):
        variables = _structure_vars(combo)
        unknowns = [v for v in variables if _effective_unknown(closure, observations, v)]
        if len(unknowns) != m:
            continue
        observed = tuple(v for v in variables if v not in unknowns)
        complete, _, _ = _peel(combo, observed)
        if not complete:
            continue
        if any(
            _check_capable(subset, closure, observations)
            for size in range(1, len(combo))
            for subset in combinations(combo, size)
        ):
            continue
        head, route_a, route_b = _select_head(combo, closure, observations, unknowns, observed)
        structures.append(
            PotentialConflictStructure(
                head=head,
                influences=tuple(sorted(inf.id for inf in combo)),
                unmeasured=tuple(unknowns),
                components=tuple(sorted({inf.component for inf in combo})),
                observed=observed,
                route_a=tuple(route_a),
                route_b=tuple(route_b),
                objects=tuple(sorted(combo, key=lambda inf: inf.id)),
            )
        )
    structures.sort(key=lambda s: (s.size, s.components, s.influences))
    return structures


def verify_pcs(
    pcs: PotentialConflictStructure,
    observations: Assignment,
    tolerance: Fraction = ZERO,
    memo: DerivationMemo | None = None,
) -> ConflictSet | None:
    """Solve the structure; a conflict exactly when the head's routes disagree."""
    known = {v: observations[v] for v in pcs.observed}
    try:
        consistent, outcome = solve_structure(
            pcs.objects, known, pcs.unmeasured, pcs.head, tolerance, memo
        )
    except StructureError:
        # The chosen head cannot be held out of this structure; verify it as a
        # plain checked system instead (every leftover equation must balance).
        consistent, outcome = solve_structure(
            pcs.objects, known, pcs.unmeasured, pcs.head, tolerance, memo, hold_head=False
        )
    if consistent:
        return None
    return ConflictSet(pcs.components, outcome.variable, outcome, pcs.order, pcs.size)


def find_minimal_conflicts(
    closure: Closure, observations: Assignment, strategy: SearchStrategy | None = None
) -> SearchResult:
    """Drive the search over ascending orders and return minimal conflicts.

    Zero-order conflicts come first, then each order's structures by
    ascending size.  A structure whose component set covers an already
    confirmed conflict is pruned unsolved; the emitted family is an
    antichain ordered by (order, size, components).
    """
    strategy = strategy or SearchStrategy()
    memo = DerivationMemo()
    result = SearchResult(conflicts=[])
    confirmed: list[ConflictSet] = []
    component_sets: set[frozenset[str]] = set()

    def admit(conflict: ConflictSet) -> bool:
        key = frozenset(conflict.components)
        if key in component_sets:
            return False
        component_sets.add(key)
        confirmed.append(conflict)
        if strategy.max_count is not None and len(confirmed) >= strategy.max_count:
            result.max_count_hit = True
            return True
        return False

    stopped = False
    for conflict in zero_order_conflicts(closure, observations, strategy.tolerance):
        if admit(conflict):
            stopped = True
            break

    unknown_count = sum(
        1 for v in closure.variables if _effective_unknown(closure, observations, v)
    )
    top_order = unknown_count
    if strategy.max_order is not None and strategy.max_order < top_order:
        top_order = strategy.max_order
        result.max_order_hit = True

    for m in range(1, top_order + 1):
        if stopped:
            break
        structures = enumerate_pcs(closure, observations, m)
        result.counts_by_order[m] = len(structures)
        for pcs in structures:
            if strategy.max_size is not None and pcs.size > strategy.max_size:
                result.max_size_hit = True
                result.pcs_pruned += 1
                continue
            if any(cover <= set(pcs.components) for cover in component_sets):
                result.pcs_pruned += 1
                continue
            result.pcs_examined += 1
            conflict = verify_pcs(pcs, observations, strategy.tolerance, memo)
            if conflict is None:
                continue
            if admit(conflict):
                stopped = True
                break

    # Late small conflicts can subsume earlier larger ones; keep the antichain.
    minimal = [
        c
        for c in confirmed
        if not any(
            other is not c and set(other.components) < set(c.components) for other in confirmed
        )
    ]
    result.conflicts = minimal
    result.cache_hits = memo.hits
    return result
