"""Information closure CLO(X*) and its decomposition into islands of misbehaviour.

The closure grows from the misbehaving variables through everything that can
carry information about them — unmeasured, unobserved, or misbehaving
variables are traversed; measured, observed, OK variables stop the growth,
but only when all of their influence links end up on one side of the cut.
A variable with links both inside and outside would leak information around
the cut and is interiorized instead.  Unmeasured or misbehaving sources and
sinks terminate growth naturally and stay interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .detection import ObservationError, detect_misbehaving
from .equations import Assignment
from .model import CausalGraph, Influence, Subgraph, UnknownVariableError


@dataclass(frozen=True)
class Closure:
    """A cut-off subgraph: the restricted domain for one diagnosis problem."""

    subgraph: Subgraph
    boundary: frozenset[str]
    misbehaving: frozenset[str]
    graph: CausalGraph = field(compare=False, repr=False)

    @property
    def variables(self) -> frozenset[str]:
        return self.subgraph.variables

    @property
    def influences(self) -> frozenset[str]:
        return self.subgraph.influences

    def influence_objects(self) -> tuple[Influence, ...]:
        return tuple(self.graph.influences[i] for i in sorted(self.subgraph.influences))


def _interior_eligible(graph: CausalGraph, observations: Assignment, misbehaving, var: str) -> bool:
    """Traversable: unmeasured, unobserved, or misbehaving — anything not cuttable."""
    return (not graph.variables[var].measured) or var not in observations or var in misbehaving


def closure(
    graph: CausalGraph,
    observations: Assignment,
    targets: Iterable[str],
    misbehaving: Iterable[str] | None = None,
) -> Closure:
    """Grow CLO(targets) from the targets in both link directions.

    When `misbehaving` is not supplied it is derived from the observations by
    exact detection; `islands` always passes the full detected set so that
    other misbehaving variables met during growth are traversed, not cut at.
    """
    targets = sorted(set(targets))
    if not targets:
        raise ValueError("targets must be nonempty")
    unknown = [t for t in targets if t not in graph.variables]
    if unknown:
        raise UnknownVariableError("unknown variable(s): " + ", ".join(unknown))
    if misbehaving is None:
        misbehaving = detect_misbehaving(graph, observations).misbehaving
    misbehaving = frozenset(misbehaving)

    interior: set[str] = set()
    candidates: set[str] = set()  # potential boundary variables, not yet committed
    seed_only: set[str] = set()  # OK measured targets: their own closure, no growth
    included: set[str] = set()  # influence ids inside the cut
    stack: list[str] = []

    for target in targets:
        if _interior_eligible(graph, observations, misbehaving, target):
            stack.append(target)
        else:
            seed_only.add(target)

    while True:
        while stack:
            var = stack.pop()
            if var in interior:
                continue
            interior.add(var)
            candidates.discard(var)
            seed_only.discard(var)
            for inf in graph.incident(var):
                included.add(inf.id)
                for touched in inf.variables:
                    if touched in interior:
                        continue
                    if _interior_eligible(graph, observations, misbehaving, touched):
                        stack.append(touched)
                    else:
                        candidates.add(touched)

        # Close over induced influences before judging the cut: a link between
        # two closure variables belongs inside even if growth never walked it.
        members = interior | candidates | seed_only
        for inf in graph.influences.values():
            if inf.id not in included and all(v in members for v in inf.variables):
                included.add(inf.id)

        # A candidate with links on both sides of the cut cannot be a boundary;
        # interiorize the smallest one and regrow.
        two_sided = sorted(
            c for c in candidates if any(inf.id not in included for inf in graph.incident(c))
        )
        if two_sided:
            stack.append(two_sided[0])
            candidates.discard(two_sided[0])
            continue
        break

    variables = frozenset(interior | candidates | seed_only)
    return Closure(
        subgraph=Subgraph(variables, frozenset(included)),
        boundary=frozenset(candidates),
        misbehaving=frozenset(v for v in variables if v in misbehaving),
        graph=graph,
    )


def islands(graph: CausalGraph, observations: Assignment, misbehaving: Iterable[str]) -> list[Closure]:
    """Pairwise-disjoint closures, one per connected patch of misbehaviour.

    Per-variable closures sharing anything are regrown from their merged
    target sets until the result is disjoint; ordered by smallest variable id.
    """
    misbehaving = sorted(set(misbehaving))
    for var in misbehaving:
        if var not in graph.variables:
            raise UnknownVariableError(f"unknown variable {var!r}")
        if not graph.variables[var].measured or var not in observations:
            raise ObservationError(f"misbehaving variable {var!r} must be measured and observed")
    if not misbehaving:
        return []

    groups: list[tuple[str, ...]] = [(var,) for var in misbehaving]
    while True:
        closures = [closure(graph, observations, group, misbehaving) for group in groups]
        merged = _merge_overlapping(groups, closures)
        if merged is None:
            return sorted(closures, key=lambda c: min(c.variables))
        groups = merged


def _merge_overlapping(groups, closures):
    """One union-find pass over shared variables; None when already disjoint."""
    parent = list(range(len(groups)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    changed = False
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            if closures[i].variables & closures[j].variables:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
                    changed = True
    if not changed:
        return None
    buckets: dict[int, set[str]] = {}
    for i, group in enumerate(groups):
        buckets.setdefault(find(i), set()).update(group)
    return [tuple(sorted(bucket)) for _, bucket in sorted(buckets.items())]
