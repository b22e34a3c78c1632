"""Model-based detection: simulate the all-components-OK system, flag deviations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .equations import ZERO, Assignment, eval_forward, format_rational
from .model import CausalGraph, topological_order


class ObservationError(ValueError):
    """The observation set does not fit the model (coverage or measurability)."""


class OkModelContradiction(Exception):
    """Two definitions of one variable disagree under the all-OK assumption.

    This is a model-authoring error: the redundant definitions are mutually
    inconsistent for the given inputs before any fault enters the picture.
    """

    def __init__(self, variable: str, values):
        self.variable = variable
        self.values = tuple(values)
        rendered = ", ".join(format_rational(v) for v in self.values)
        super().__init__(f"variable {variable!r} is defined as each of: {rendered}")


@dataclass(frozen=True)
class MisbehaviourReport:
    """The detected misbehaving set X* plus the predictions it was judged against."""

    misbehaving: frozenset[str]
    predicted: Mapping[str, Fraction]
    delta: Fraction


def simulate(graph: CausalGraph, inputs: Assignment) -> dict[str, Fraction]:
    """Predict every variable by forward evaluation under the OK assumption.

    `inputs` must cover exactly the graph's input variables.  Where several
    influences define one variable they must agree exactly; disagreement is
    an OkModelContradiction, not a diagnosis.
    """
    input_vars = set(graph.input_variables)
    missing = sorted(input_vars - set(inputs))
    if missing:
        raise ObservationError("missing input value(s): " + ", ".join(missing))
    extra = sorted(set(inputs) - input_vars)
    if extra:
        raise ObservationError("not input variable(s): " + ", ".join(extra))

    env: dict[str, Fraction] = dict(inputs)
    for var in topological_order(graph):
        definitions = graph.influences_into(var)
        if not definitions:
            continue
        values = [eval_forward(inf, env) for inf in definitions]
        if any(v != values[0] for v in values[1:]):
            raise OkModelContradiction(var, values)
        env[var] = values[0]
    return env


def detect_misbehaving(graph: CausalGraph, observations: Assignment, delta: Fraction = ZERO) -> MisbehaviourReport:
    """X*: observed measured variables whose |observed - predicted| exceeds delta.

    Input variables never misbehave (control actions are not fault causes);
    measured variables without observations simply cannot be flagged.
    """
    for var in observations:
        if not graph.is_measured(var):
            raise ObservationError(f"observed variable {var!r} is unmeasured")

    input_vars = set(graph.input_variables)
    missing = sorted(v for v in input_vars if v not in observations)
    if missing:
        raise ObservationError("missing observation for input(s): " + ", ".join(missing))

    predicted = simulate(graph, {v: observations[v] for v in input_vars})
    misbehaving = frozenset(
        var
        for var, value in observations.items()
        if var not in input_vars and abs(value - predicted[var]) > delta
    )
    return MisbehaviourReport(misbehaving, predicted, delta)
