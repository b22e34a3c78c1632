"""Causal influence graph model: variables, affine influences, validation, reachability.

A model is a set of variables (measured or unmeasured) plus component-tagged
influences; each influence computes one output variable from its inputs through
an affine equation with exact rational coefficients.  The influence edges must
form a DAG, but several influences may define the same output variable — those
redundant definitions are what make conflicts detectable at all.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence


class ModelError(ValueError):
    """Base class for structural model errors."""


class UnknownVariableError(ModelError):
    """A referenced variable id is not declared in the graph."""


class CycleError(ModelError):
    """The influence edges contain a directed cycle."""


class Measurability(Enum):
    """Whether a variable's value can be observed on the running system."""

    MEASURED = "measured"
    UNMEASURED = "unmeasured"


@dataclass(frozen=True)
class Variable:
    id: str
    measurability: Measurability

    @property
    def measured(self) -> bool:
        return self.measurability is Measurability.MEASURED


def as_fraction(value) -> Fraction:
    """Coerce ints, strings, and Fractions to an exact rational."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


@dataclass(frozen=True)
class AffineEquation:
    """output = constant + sum(coefficient * input), exact rationals throughout.

    Terms are ordered (input id, coefficient) pairs; the order is the
    declaration order and is preserved for serialization round-trips.
    """

    terms: tuple[tuple[str, Fraction], ...]
    constant: Fraction = Fraction(0)

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(var for var, _ in self.terms)

    def coefficient(self, var: str) -> Fraction:
        for v, coeff in self.terms:
            if v == var:
                return coeff
        raise KeyError(var)


@dataclass(frozen=True)
class Influence:
    """One component-tagged equation computing `output` from its inputs."""

    id: str
    component: str
    output: str
    equation: AffineEquation

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.equation.inputs

    @property
    def variables(self) -> tuple[str, ...]:
        """Inputs followed by the output."""
        return self.equation.inputs + (self.output,)


def make_influence(inf_id: str, output: str, terms, constant=0, component: str | None = None) -> Influence:
    """Build an influence from (input, coefficient) pairs.

    The component defaults to the influence id, mirroring the text format.
    """
    equation = AffineEquation(
        tuple((var, as_fraction(coeff)) for var, coeff in terms),
        as_fraction(constant),
    )
    return Influence(inf_id, component if component is not None else inf_id, output, equation)


class CausalGraph:
    """Immutable diagnosable model: variables plus influences between them.

    Construction is permissive — duplicate ids, dangling references, zero
    coefficients and cycles are all representable so that `validate_model`
    can report them as data.  Lookup structures index the first declaration
    of each id.
    """

    def __init__(self, variables: Iterable[Variable], influences: Iterable[Influence]):
        self.declared_variables: tuple[Variable, ...] = tuple(variables)
        self.declared_influences: tuple[Influence, ...] = tuple(influences)

        self.variables: dict[str, Variable] = {}
        for var in self.declared_variables:
            self.variables.setdefault(var.id, var)
        self.influences: dict[str, Influence] = {}
        for inf in self.declared_influences:
            self.influences.setdefault(inf.id, inf)

        into: dict[str, list[Influence]] = {v: [] for v in self.variables}
        out_of: dict[str, list[Influence]] = {v: [] for v in self.variables}
        for inf in self.influences.values():
            if inf.output in into:
                into[inf.output].append(inf)
            for var in inf.inputs:
                if var in out_of:
                    out_of[var].append(inf)
        self._into = {v: tuple(sorted(infs, key=lambda i: i.id)) for v, infs in into.items()}
        self._out_of = {v: tuple(sorted(infs, key=lambda i: i.id)) for v, infs in out_of.items()}

    # -- lookups ---------------------------------------------------------

    def variable_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.variables))

    def influence_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.influences))

    def is_measured(self, var_id: str) -> bool:
        try:
            return self.variables[var_id].measured
        except KeyError:
            raise UnknownVariableError(f"unknown variable {var_id!r}") from None

    def influences_into(self, var_id: str) -> tuple[Influence, ...]:
        """Influences whose output is `var_id` (its definitions)."""
        return self._into.get(var_id, ())

    def influences_out_of(self, var_id: str) -> tuple[Influence, ...]:
        """Influences using `var_id` as an input."""
        return self._out_of.get(var_id, ())

    def incident(self, var_id: str) -> tuple[Influence, ...]:
        """All influences touching `var_id`, as input or output."""
        merged = {inf.id: inf for inf in self._into.get(var_id, ())}
        merged.update({inf.id: inf for inf in self._out_of.get(var_id, ())})
        return tuple(sorted(merged.values(), key=lambda i: i.id))

    @property
    def input_variables(self) -> tuple[str, ...]:
        """Declared variables with no defining influence (roles are derived)."""
        return tuple(sorted(v for v in self.variables if not self._into.get(v)))

    @property
    def output_variables(self) -> tuple[str, ...]:
        """Declared variables feeding no influence."""
        return tuple(sorted(v for v in self.variables if not self._out_of.get(v)))


@dataclass(frozen=True)
class Subgraph:
    """A variable/influence id slice of a graph; influences stay inside the variables."""

    variables: frozenset[str]
    influences: frozenset[str]


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def validate_model(graph: CausalGraph) -> list[Violation]:
    """Check the structural assumptions; an empty report means the model is valid.

    Violations are data, not exceptions: every duplicate id, dangling variable
    reference, zero coefficient, empty equation, and cycle is reported.
    """
    violations: list[Violation] = []

    seen: set[str] = set()
    for var in graph.declared_variables:
        if var.id in seen:
            violations.append(Violation("duplicate-variable", f"variable {var.id!r} declared twice"))
        seen.add(var.id)
    seen = set()
    for inf in graph.declared_influences:
        if inf.id in seen:
            violations.append(Violation("duplicate-influence", f"influence {inf.id!r} declared twice"))
        seen.add(inf.id)

    declared = set(graph.variables)
    for inf in graph.declared_influences:
        for var in dict.fromkeys(inf.variables):
            if var not in declared:
                violations.append(
                    Violation("dangling-variable", f"influence {inf.id!r} references undeclared variable {var!r}")
                )
        if not inf.equation.terms:
            violations.append(Violation("empty-equation", f"influence {inf.id!r} has no input terms"))
        for var, coeff in inf.equation.terms:
            if coeff == 0:
                violations.append(
                    Violation("zero-coefficient", f"influence {inf.id!r} has a zero coefficient on {var!r}")
                )

    cyclic = _cycle_members(graph)
    if cyclic:
        violations.append(Violation("cycle", "cycle among variables: " + ", ".join(sorted(cyclic))))

    return violations


def _cycle_members(graph: CausalGraph) -> set[str]:
    """Variables left over after peeling all zero-indegree nodes (empty = acyclic)."""
    nodes = set(graph.variables)
    for inf in graph.influences.values():
        nodes.update(inf.variables)
    edges = set()
    for inf in graph.influences.values():
        for var in inf.inputs:
            edges.add((var, inf.output))
    indegree = {v: 0 for v in nodes}
    for _, dst in edges:
        indegree[dst] += 1
    queue = [v for v in nodes if indegree[v] == 0]
    remaining = len(nodes)
    while queue:
        v = queue.pop()
        remaining -= 1
        for src, dst in edges:
            if src == v:
                indegree[dst] -= 1
                if indegree[dst] == 0:
                    queue.append(dst)
    if remaining == 0:
        return set()
    return {v for v in nodes if indegree[v] > 0}


def _require_known(graph: CausalGraph, ids: Iterable[str]) -> list[str]:
    ids = list(ids)
    missing = sorted(set(ids) - set(graph.variables))
    if missing:
        raise UnknownVariableError("unknown variable(s): " + ", ".join(missing))
    return ids


def ancestors(graph: CausalGraph, targets: Iterable[str]) -> Subgraph:
    """ANT(targets): every influence on a directed path ending at a target.

    The subgraph's variables are the targets plus all variables of the
    collected influences.
    """
    frontier = _require_known(graph, targets)
    variables = set(frontier)
    influences: set[str] = set()
    while frontier:
        var = frontier.pop()
        for inf in graph.influences_into(var):
            if inf.id in influences:
                continue
            influences.add(inf.id)
            for src in inf.inputs:
                if src not in variables:
                    variables.add(src)
                    frontier.append(src)
    return Subgraph(frozenset(variables), frozenset(influences))


def descendants(graph: CausalGraph, sources: Iterable[str]) -> Subgraph:
    """DESC(sources): every influence on a directed path starting at a source."""
    frontier = _require_known(graph, sources)
    reachable = set(frontier)  # variables with a directed path from a source
    variables = set(frontier)
    influences: set[str] = set()
    while frontier:
        var = frontier.pop()
        for inf in graph.influences_out_of(var):
            influences.add(inf.id)
            # sibling inputs belong to the subgraph but are not descendants
            variables.update(inf.variables)
            if inf.output not in reachable:
                reachable.add(inf.output)
                frontier.append(inf.output)
    return Subgraph(frozenset(variables), frozenset(influences))


def topological_order(graph: CausalGraph) -> list[str]:
    """Variables ordered so that inputs precede outputs; ties broken lexicographically."""
    edges = set()
    for inf in graph.influences.values():
        for var in inf.inputs:
            if var in graph.variables and inf.output in graph.variables:
                edges.add((var, inf.output))
    indegree = {v: 0 for v in graph.variables}
    successors: dict[str, list[str]] = {v: [] for v in graph.variables}
    for src, dst in edges:
        indegree[dst] += 1
        successors[src].append(dst)

    heap = [v for v, deg in indegree.items() if deg == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        var = heapq.heappop(heap)
        order.append(var)
        for nxt in successors[var]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(heap, nxt)
    if len(order) != len(graph.variables):
        stuck = sorted(v for v, deg in indegree.items() if deg > 0)
        raise CycleError("cycle among variables: " + ", ".join(stuck))
    return order
