"""Canonical example graphs used across tests, docs, and the CLI corpus.

FORK: one unmeasured hub feeding two measured outputs from one measured input.
CHAIN: two unmeasured variables strung between a measured input and output.
STAR: one unmeasured hub with two measured inputs and two measured outputs.
"""

from __future__ import annotations

from fractions import Fraction

from .model import CausalGraph, Measurability, Variable, make_influence


def _var(vid: str, measured: bool) -> Variable:
    return Variable(
        vid, Measurability.MEASURED if measured else Measurability.UNMEASURED
    )


def fork() -> CausalGraph:
    """P --c1--> U, U --c2--> X, U --c3--> Y; only U unmeasured."""
    return CausalGraph(
        variables=[
            _var("P", True),
            _var("U", False),
            _var("X", True),
            _var("Y", True),
        ],
        influences=[
            make_influence("c1", "U", [("P", 2)]),
            make_influence("c2", "X", [("U", 1)], constant=1),
            make_influence("c3", "Y", [("U", 3)]),
        ],
    )


def chain() -> CausalGraph:
    """P --c1--> U1 --c2--> U2 --c3--> X; U1, U2 unmeasured."""
    return CausalGraph(
        variables=[
            _var("P", True),
            _var("U1", False),
            _var("U2", False),
            _var("X", True),
        ],
        influences=[
            make_influence("c1", "U1", [("P", 1)], constant=1),
            make_influence("c2", "U2", [("U1", 2)]),
            make_influence("c3", "X", [("U2", 1)], constant=3),
        ],
    )


def star() -> CausalGraph:
    """Two measured inputs both defining unmeasured U, which feeds X1 and X2."""
    return CausalGraph(
        variables=[
            _var("P1", True),
            _var("P2", True),
            _var("U", False),
            _var("X1", True),
            _var("X2", True),
        ],
        influences=[
            make_influence("i1", "U", [("P1", 1)]),
            make_influence("i2", "U", [("P2", 1)]),
            make_influence("i3", "X1", [("U", 1)]),
            make_influence("i4", "X2", [("U", 1)]),
        ],
    )


FORK_TEXT = """\
# fork: one unmeasured hub, two measured outputs
var P measured
var U unmeasured
var X measured
var Y measured
inf c1 : U = 2*P
inf c2 : X = 1*U + 1
inf c3 : Y = 3*U
"""

CHAIN_TEXT = """\
# chain: two unmeasured links between measured ends
var P measured
var U1 unmeasured
var U2 unmeasured
var X measured
inf c1 : U1 = 1*P + 1
inf c2 : U2 = 2*U1
inf c3 : X = 1*U2 + 3
"""

STAR_TEXT = """\
# star: doubly defined unmeasured hub
var P1 measured
var P2 measured
var U unmeasured
var X1 measured
var X2 measured
inf i1 : U = 1*P1
inf i2 : U = 1*P2
inf i3 : X1 = 1*U
inf i4 : X2 = 1*U
"""


def _obs(values: dict[str, int]) -> dict[str, Fraction]:
    return {var: Fraction(value) for var, value in values.items()}


FORK_OBS_A = _obs({"P": 1, "X": 5, "Y": 6})
FORK_OBS_B = _obs({"P": 1, "X": 7, "Y": 18})
FORK_OBS_C = _obs({"P": 1, "X": 7, "Y": 6})
FORK_OBS_OK = _obs({"P": 1, "X": 3, "Y": 6})
