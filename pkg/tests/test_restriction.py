"""Closure growth and island decomposition.

`_is_valid_restriction` re-states the closure conditions independently of the
implementation, so returned closures can be checked for validity and — by
single-variable removal — for minimality.
"""

from fractions import Fraction

import pytest

from cgdiag.detection import ObservationError, detect_misbehaving
from cgdiag.model import CausalGraph, Measurability, Variable, make_influence
from cgdiag.restriction import closure, islands
from instancegen import instances

F = Fraction


def test_fork_closure_of_x(fork, fork_obs_a):
    clo = closure(fork, fork_obs_a, {"X"})
    assert clo.variables == frozenset({"P", "U", "X", "Y"})
    assert clo.influences == frozenset({"c1", "c2", "c3"})
    assert clo.boundary == frozenset({"P", "Y"})
    assert clo.misbehaving == frozenset({"X"})


def test_chain_closure_is_whole_chain(chain):
    obs = {"P": F(1), "X": F(10)}
    clo = closure(chain, obs, {"X"})
    assert clo.variables == frozenset({"P", "U1", "U2", "X"})
    assert clo.influences == frozenset({"c1", "c2", "c3"})
    assert clo.boundary == frozenset({"P"})


def test_ok_target_is_its_own_closure(fork, fork_obs_ok):
    clo = closure(fork, fork_obs_ok, {"P"})
    assert clo.variables == frozenset({"P"})
    assert clo.influences == frozenset()
    assert clo.boundary == frozenset()


def test_closure_rejects_unknown_target(fork, fork_obs_a):
    with pytest.raises(ValueError):
        closure(fork, fork_obs_a, {"NOPE"})


def test_closure_rejects_empty_targets(fork, fork_obs_a):
    with pytest.raises(ValueError):
        closure(fork, fork_obs_a, set())


def test_fork_is_one_island(fork, fork_obs_a):
    groups = islands(fork, fork_obs_a, frozenset({"X"}))
    assert len(groups) == 1
    assert groups[0].variables == frozenset({"P", "U", "X", "Y"})


def test_no_misbehaviour_means_no_islands(fork, fork_obs_a):
    assert islands(fork, fork_obs_a, frozenset()) == []


def test_islands_rejects_unobserved_member(fork, fork_obs_a):
    with pytest.raises(ObservationError):
        islands(fork, fork_obs_a, frozenset({"U"}))


def _two_forks():
    """Two disconnected copies of the fork, suffixed a/b."""
    variables = []
    influences = []
    for tag in ("a", "b"):
        variables += [
            Variable(f"P{tag}", Measurability.MEASURED),
            Variable(f"U{tag}", Measurability.UNMEASURED),
            Variable(f"X{tag}", Measurability.MEASURED),
            Variable(f"Y{tag}", Measurability.MEASURED),
        ]
        influences += [
            make_influence(f"c1{tag}", f"U{tag}", [(f"P{tag}", 2)]),
            make_influence(f"c2{tag}", f"X{tag}", [(f"U{tag}", 1)], constant=1),
            make_influence(f"c3{tag}", f"Y{tag}", [(f"U{tag}", 3)]),
        ]
    return CausalGraph(variables=variables, influences=influences)


def test_disjoint_misbehaviour_gives_two_islands():
    graph = _two_forks()
    obs = {
        "Pa": F(1), "Xa": F(5), "Ya": F(6),
        "Pb": F(1), "Xb": F(3), "Yb": F(9),
    }
    groups = islands(graph, obs, frozenset({"Xa", "Yb"}))
    assert len(groups) == 2
    assert groups[0].misbehaving == frozenset({"Xa"})
    assert groups[1].misbehaving == frozenset({"Yb"})
    assert not (groups[0].variables & groups[1].variables)


def test_shared_variables_merge_into_one_island(fork, fork_obs_b):
    groups = islands(fork, fork_obs_b, frozenset({"X", "Y"}))
    assert len(groups) == 1
    assert groups[0].misbehaving == frozenset({"X", "Y"})


# --- validity and minimality against an independent statement ---------------


def _is_valid_restriction(graph, observations, misbehaving, targets, var_set, inf_set):
    """The closure conditions, restated from scratch for brute-force checks."""
    if not set(targets) <= var_set:
        return False
    for inf_id in inf_set:
        inf = graph.influences[inf_id]
        if not set(inf.variables) <= var_set:
            return False  # influence dangling out of the variable set
    for var in var_set:
        incident = {inf.id for inf in graph.incident(var)}
        inside = incident & inf_set
        interior_kind = (
            not graph.variables[var].measured
            or var not in observations
            or var in misbehaving
        )
        if interior_kind:
            if inside != incident:
                return False  # must be traversed through completely
        else:
            if inside not in (set(), incident):
                return False  # OK variable with links on both sides
    return True


def _check_island_minimality(graph, observations, misbehaving):
    for island in islands(graph, observations, misbehaving):
        var_set, inf_set = set(island.variables), set(island.influences)
        targets = set(island.misbehaving)
        assert _is_valid_restriction(
            graph, observations, misbehaving, targets, var_set, inf_set
        )
        for var in sorted(var_set - targets - set(island.boundary)):
            slim_vars = var_set - {var}
            slim_infs = {
                i for i in inf_set if var not in graph.influences[i].variables
            }
            assert not _is_valid_restriction(
                graph, observations, misbehaving, targets, slim_vars, slim_infs
            ), f"{var} is removable from island {sorted(var_set)}"


def test_fork_island_is_valid_and_minimal(fork, fork_obs_a):
    _check_island_minimality(fork, fork_obs_a, frozenset({"X"}))


def test_random_islands_are_valid_and_minimal():
    for inst in instances(40):
        report = detect_misbehaving(inst.graph, inst.observations)
        if report.misbehaving:
            _check_island_minimality(inst.graph, inst.observations, report.misbehaving)


def test_random_islands_partition_the_misbehaving_set():
    for inst in instances(40):
        report = detect_misbehaving(inst.graph, inst.observations)
        if not report.misbehaving:
            continue
        groups = islands(inst.graph, inst.observations, report.misbehaving)
        owned = [set(g.misbehaving) for g in groups]
        assert set().union(*owned) == set(report.misbehaving)
        for i, a in enumerate(owned):
            for b in owned[i + 1 :]:
                assert not (a & b)
        for i, g in enumerate(groups):
            for h in groups[i + 1 :]:
                assert not (set(g.variables) & set(h.variables))
                assert not (set(g.influences) & set(h.influences))


def test_boundaries_are_ok_measured_anchors():
    for inst in instances(40):
        report = detect_misbehaving(inst.graph, inst.observations)
        if not report.misbehaving:
            continue
        for island in islands(inst.graph, inst.observations, report.misbehaving):
            for var in island.boundary:
                assert inst.graph.is_measured(var)
                assert var in inst.observations
                assert var not in report.misbehaving
