"""Text formats, the pipeline driver, and the command-line front end."""

import json
from fractions import Fraction

import pytest

from cgdiag.cli import (
    ModelValidationError,
    ParseError,
    RunOptions,
    main,
    parse_model,
    parse_model_document,
    parse_observations,
    run_pipeline,
)
from cgdiag.fixtures import CHAIN_TEXT, FORK_TEXT, STAR_TEXT

F = Fraction

OBS_A_TEXT = "obs P = 1\nobs X = 5\nobs Y = 6\n"
OBS_OK_TEXT = "obs P = 1\nobs X = 3\nobs Y = 6\n"

CYCLIC_TEXT = """\
var A measured
var B measured
inf c1 : A = 1*B
inf c2 : B = 1*A
"""


# --- parsing -----------------------------------------------------------------


def test_fork_text_parses_to_the_fork_graph(fork):
    graph = parse_model(FORK_TEXT)
    assert graph.variable_ids() == fork.variable_ids()
    assert graph.influence_ids() == fork.influence_ids()
    assert graph.influences["c2"].equation.constant == F(1)


def test_serialization_round_trips():
    text = (
        "# heavily decorated model\n"
        "var P measured\n"
        "var U unmeasured   # hub\n"
        "var X measured\n"
        "inf c1 of motor : U = 1/3*P + -2*X + 0.5\n"
        "inf c2 : X = -1*U\n"
    )
    doc = parse_model_document(text)
    once = doc.serialize()
    again = parse_model_document(once).serialize()
    assert once == again
    assert "of motor" in once
    assert "1/3*P" in once and "1/2" in once  # decimals land in lowest terms
    assert "of c2" not in once  # default component stays implicit


def test_missing_measurability_is_positioned():
    with pytest.raises(ParseError) as err:
        parse_model_document("var P")
    assert err.value.line == 1 and err.value.column == 6
    assert "measured" in str(err.value)


def test_unknown_keyword_is_positioned():
    with pytest.raises(ParseError) as err:
        parse_model_document("vax P measured")
    assert err.value.line == 1 and err.value.column == 1


def test_bare_variable_without_coefficient_is_rejected():
    with pytest.raises(ParseError) as err:
        parse_model_document("inf c : X = P")
    assert err.value.column == 13
    assert "rational" in str(err.value)


def test_constant_only_influence_is_rejected():
    with pytest.raises(ParseError) as err:
        parse_model_document("inf c : X = 5")
    assert "coefficient*variable" in str(err.value)


def test_duplicate_input_is_rejected():
    with pytest.raises(ParseError) as err:
        parse_model_document("inf c : X = 1*P + 2*P")
    assert "duplicate input" in str(err.value)


def test_comment_only_and_blank_lines_are_skipped():
    doc = parse_model_document("\n# nothing here\n   \nvar P measured\n")
    assert len(doc.declarations) == 1


def test_zero_coefficient_fails_validation():
    with pytest.raises(ModelValidationError):
        parse_model("var P measured\nvar X measured\ninf c : X = 0*P\n")


def test_undeclared_variable_fails_validation():
    with pytest.raises(ModelValidationError) as err:
        parse_model("var X measured\ninf c : X = 1*P\n")
    assert err.value.violations


def test_observation_parsing():
    values = parse_observations("obs X = 5\n# note\nobs Y = -1/3\n")
    assert values == {"X": F(5), "Y": F(-1, 3)}


def test_duplicate_observation_is_rejected():
    with pytest.raises(ParseError) as err:
        parse_observations("obs X = 5\nobs X = 6\n")
    assert err.value.line == 2
    assert "duplicate" in str(err.value)


def test_observation_trailing_junk_is_rejected():
    with pytest.raises(ParseError):
        parse_observations("obs X = 5 something")


def test_observation_wrong_keyword_is_rejected():
    with pytest.raises(ParseError):
        parse_observations("value X = 5")


# --- the pipeline driver -----------------------------------------------------


def test_pipeline_on_the_fork(fork, fork_obs_a):
    result = run_pipeline(fork, fork_obs_a)
    assert sorted(result.report.misbehaving) == ["X"]
    assert [c.components for c in result.conflicts] == [("c1", "c2"), ("c2", "c3")]
    assert [d.components for d in result.diagnoses] == [("c2",), ("c1", "c3")]
    assert len(result.islands) == 1


def test_pipeline_without_misbehaviour(fork, fork_obs_ok):
    result = run_pipeline(fork, fork_obs_ok)
    assert result.islands == []
    assert result.conflicts == []
    assert [d.components for d in result.diagnoses] == [()]


def test_approx_mode_defaults_both_thresholds():
    options = RunOptions(mode="approx")
    delta, tolerance = options.thresholds()
    assert delta == tolerance == F(1, 10**6)
    explicit = RunOptions(mode="approx", delta=F(1, 10))
    assert explicit.thresholds() == (F(1, 10), F(1, 10**6))


def test_pipeline_merges_conflicts_across_islands():
    text = (
        "var Pa measured\nvar Xa measured\n"
        "var Pb measured\nvar Xb measured\n"
        "inf ca : Xa = 1*Pa\n"
        "inf cb : Xb = 1*Pb\n"
    )
    graph = parse_model(text)
    obs = {"Pa": F(0), "Xa": F(1), "Pb": F(0), "Xb": F(2)}
    result = run_pipeline(graph, obs)
    assert len(result.islands) == 2
    assert [c.components for c in result.conflicts] == [("ca",), ("cb",)]
    assert [d.components for d in result.diagnoses] == [("ca", "cb")]


# --- the executable ----------------------------------------------------------


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return {
        "fork": write("fork.cg", FORK_TEXT),
        "chain": write("chain.cg", CHAIN_TEXT),
        "star": write("star.cg", STAR_TEXT),
        "cyclic": write("cyclic.cg", CYCLIC_TEXT),
        "broken": write("broken.cg", "var P\n"),
        "obs_a": write("obs_a.txt", OBS_A_TEXT),
        "obs_ok": write("obs_ok.txt", OBS_OK_TEXT),
        "obs_cyclic": write("obs_cyclic.txt", "obs A = 1\nobs B = 1\n"),
        "obs_star_bad": write("obs_star_bad.txt", "obs P1 = 1\nobs P2 = 2\n"),
        "obs_unknown": write("obs_unknown.txt", OBS_A_TEXT + "obs NOPE = 1\n"),
    }


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_diagnose_text_output(files, capsys):
    code, out, err = _run(
        capsys, "diagnose", "-m", files["fork"], "-o", files["obs_a"]
    )
    assert code == 0 and err == ""
    assert "misbehaving: X" in out
    assert "island 1: variables {P, U, X, Y}, boundary {P, Y}" in out
    assert "conflict {c1, c2} (order 1, size 2) [X: 3 vs 5]" in out
    assert "conflicts: {c1, c2}; {c2, c3}" in out
    assert "diagnoses: {c2}; {c1, c3}" in out


def test_diagnose_json_output(files, capsys):
    code, out, err = _run(
        capsys, "diagnose", "-m", files["fork"], "-o", files["obs_a"], "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["command"] == "diagnose"
    assert payload["misbehaving"] == ["X"]
    assert payload["conflicts"] == [["c1", "c2"], ["c2", "c3"]]
    assert payload["diagnoses"] == [["c2"], ["c1", "c3"]]
    island = payload["islands"][0]
    assert island["boundary"] == ["P", "Y"]
    assert island["search"]["counts_by_order"] == {"1": 3}
    assert island["conflicts"][0]["residual"]["magnitude"] == "2"


def test_repeated_runs_are_byte_identical(files, capsys):
    argv = ("diagnose", "-m", files["fork"], "-o", files["obs_a"], "--format", "json")
    _, first, _ = _run(capsys, *argv)
    _, second, _ = _run(capsys, *argv)
    assert first == second
    argv_text = ("diagnose", "-m", files["fork"], "-o", files["obs_a"])
    _, third, _ = _run(capsys, *argv_text)
    _, fourth, _ = _run(capsys, *argv_text)
    assert third == fourth


def test_detect_reports_the_misbehaving_set(files, capsys):
    code, out, _ = _run(capsys, "detect", "-m", files["fork"], "-o", files["obs_a"])
    assert code == 0
    assert out.startswith("misbehaving: X\n")
    assert "predicted: P = 1, U = 2, X = 3, Y = 6" in out


def test_detect_with_a_wide_delta_sees_nothing(files, capsys):
    code, out, _ = _run(
        capsys, "detect", "-m", files["fork"], "-o", files["obs_a"], "--delta", "100"
    )
    assert code == 0
    assert "misbehaving: (none)" in out


def test_simulate_prints_every_variable(files, capsys):
    code, out, _ = _run(capsys, "simulate", "-m", files["fork"], "-o", files["obs_ok"])
    assert code == 0
    assert out == "P = 1\nU = 2\nX = 3\nY = 6\n"


def test_closure_lists_islands(files, capsys):
    code, out, _ = _run(
        capsys, "closure", "-m", files["fork"], "-o", files["obs_a"], "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["islands"] == [
        {
            "variables": ["P", "U", "X", "Y"],
            "influences": ["c1", "c2", "c3"],
            "boundary": ["P", "Y"],
            "misbehaving": ["X"],
        }
    ]


def test_conflicts_subcommand_omits_diagnoses(files, capsys):
    code, out, _ = _run(
        capsys, "conflicts", "-m", files["fork"], "-o", files["obs_a"], "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["conflicts"] == [["c1", "c2"], ["c2", "c3"]]
    assert "diagnoses" not in payload
    assert "diagnoses" not in payload["islands"][0]


def test_max_count_flag_truncates(files, capsys):
    code, out, _ = _run(
        capsys,
        "diagnose", "-m", files["fork"], "-o", files["obs_a"],
        "--max-count", "1", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["conflicts"] == [["c1", "c2"]]
    assert payload["islands"][0]["search"]["max_count_hit"] is True


def test_approx_mode_forgives_tiny_deviation(files, tmp_path, capsys):
    near = tmp_path / "near.txt"
    near.write_text("obs P = 1\nobs X = 30000001/10000000\nobs Y = 6\n")
    code, out, _ = _run(
        capsys,
        "diagnose", "-m", files["fork"], "-o", str(near), "--mode", "approx",
        "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["misbehaving"] == []
    assert payload["conflicts"] == []
    assert payload["diagnoses"] == [[]]


def test_oracle_subcommands_agree_with_the_engine(files, capsys):
    code, out, _ = _run(
        capsys,
        "oracle-diagnose", "-m", files["fork"], "-o", files["obs_a"], "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["conflicts"] == [["c1", "c2"], ["c2", "c3"]]
    assert payload["diagnoses"] == [["c2"], ["c1", "c3"]]

    code, out, _ = _run(
        capsys, "oracle-conflicts", "-m", files["fork"], "-o", files["obs_a"]
    )
    assert code == 0
    assert out == "conflicts: {c1, c2}; {c2, c3}\n"


def test_missing_model_file_exits_one(files, capsys):
    code, _, err = _run(capsys, "diagnose", "-m", "nope.cg", "-o", files["obs_a"])
    assert code == 1
    assert "error" in err


def test_unknown_subcommand_exits_one(files, capsys):
    code, _, err = _run(capsys, "bogus", "-m", files["fork"], "-o", files["obs_a"])
    assert code == 1
    assert "error" in err


def test_model_parse_error_exits_one(files, capsys):
    code, _, err = _run(capsys, "diagnose", "-m", files["broken"], "-o", files["obs_a"])
    assert code == 1
    assert "line 1, column 6" in err


def test_unknown_observed_variable_exits_one(files, capsys):
    code, _, err = _run(
        capsys, "diagnose", "-m", files["fork"], "-o", files["obs_unknown"]
    )
    assert code == 1
    assert "NOPE" in err


def test_cyclic_model_exits_two(files, capsys):
    code, _, err = _run(
        capsys, "diagnose", "-m", files["cyclic"], "-o", files["obs_cyclic"]
    )
    assert code == 2
    assert "invalid model" in err


def test_contradictory_redundancy_exits_three(files, capsys):
    code, _, err = _run(
        capsys, "simulate", "-m", files["star"], "-o", files["obs_star_bad"]
    )
    assert code == 3
    assert "'U'" in err


def test_help_exits_zero(capsys):
    code, out, _ = _run(capsys, "--help")
    assert code == 0
    assert "diagnose" in out
