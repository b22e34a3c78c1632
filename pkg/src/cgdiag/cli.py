"""Model/observation text formats, the pipeline driver, and the CLI.

Model files are line based (``#`` starts a comment):

    var ID (measured|unmeasured)
    inf ID [of COMPONENT] : OUT = RAT*ID { + RAT*ID } [ + RAT ]

Observation files hold one ``obs ID = RAT`` per line.  Rationals are
integers, exact decimals, or ``p/q``.  The component clause defaults to the
influence id, so simple models can treat influences as components directly.

The ``diagnose`` subcommand runs the full pipeline: detect misbehaving
variables, restrict to islands, search each island for minimal conflicts,
and turn the merged conflict family into minimal diagnoses.  Other
subcommands stop at earlier stages; the ``oracle-*`` pair exposes the
brute-force references for debugging.  JSON output is deterministic:
sorted keys, lexicographic set order, rationals in lowest terms.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .conflicts import ConflictSet, SearchResult, SearchStrategy, find_minimal_conflicts
from .detection import (
    MisbehaviourReport,
    ObservationError,
    OkModelContradiction,
    detect_misbehaving,
    simulate,
)
from .diagnosis import Diagnosis, minimal_hitting_sets
from .equations import ZERO, format_rational, parse_rational
from .model import (
    CausalGraph,
    Influence,
    UnknownVariableError,
    Variable,
    Measurability,
    make_influence,
    validate_model,
)
from .oracle import ScaleError, oracle_conflicts, oracle_hitting_sets
from .restriction import Closure, islands

APPROX_DEFAULT = Fraction(1, 10**6)

_ID_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_PUNCT = ":=+*"


class ParseError(ValueError):
    """A positioned syntax error in a model or observation file."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ModelValidationError(ValueError):
    """The parsed model violates a structural rule (cycle, dangling id, ...)."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "invalid model:\n" + "\n".join(f"  - {v}" for v in self.violations)
        )


def _is_identifier(token: str) -> bool:
    return bool(token) and token[0] in _ID_START and all(
        ch in _ID_START or ch.isdigit() for ch in token
    )


def _tokenize(line: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "#":
            break
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append((ch, i + 1))
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace() and line[j] not in _PUNCT + "#":
            j += 1
        tokens.append((line[i:j], i + 1))
        i = j
    return tokens


class _Cursor:
    def __init__(self, tokens: list[tuple[str, int]], lineno: int, width: int):
        self.tokens = tokens
        self.lineno = lineno
        self.width = width
        self.pos = 0

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def take(self, expected: str) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise ParseError(f"expected {expected}", self.lineno, self.width + 1)
        token, column = self.tokens[self.pos]
        self.pos += 1
        return token, column

    def literal(self, text: str) -> None:
        token, column = self.take(f"'{text}'")
        if token != text:
            raise ParseError(f"expected '{text}', found {token!r}", self.lineno, column)

    def identifier(self, what: str) -> str:
        token, column = self.take(what)
        if not _is_identifier(token):
            raise ParseError(f"expected {what}, found {token!r}", self.lineno, column)
        return token

    def rational(self) -> Fraction:
        token, column = self.take("a rational literal")
        try:
            return parse_rational(token)
        except ValueError:
            raise ParseError(
                f"expected a rational literal, found {token!r}", self.lineno, column
            ) from None

    def end(self) -> None:
        if self.pos < len(self.tokens):
            token, column = self.tokens[self.pos]
            raise ParseError(f"unexpected {token!r}", self.lineno, column)


Declaration = tuple[str, object]


@dataclass(frozen=True)
class ModelDocument:
    """The ordered declarations of a model file; serializes back to text."""

    declarations: tuple[Declaration, ...]

    def graph(self) -> CausalGraph:
        variables = [obj for kind, obj in self.declarations if kind == "var"]
        influences = [obj for kind, obj in self.declarations if kind == "inf"]
        return CausalGraph(variables=variables, influences=influences)

    def serialize(self) -> str:
        lines = []
        for kind, obj in self.declarations:
            if kind == "var":
                state = "measured" if obj.measured else "unmeasured"
                lines.append(f"var {obj.id} {state}")
            else:
                clause = f" of {obj.component}" if obj.component != obj.id else ""
                addends = [
                    f"{format_rational(coeff)}*{var}"
                    for var, coeff in obj.equation.terms
                ]
                if obj.equation.constant != 0:
                    addends.append(format_rational(obj.equation.constant))
                rhs = " + ".join(addends)
                lines.append(f"inf {obj.id}{clause} : {obj.output} = {rhs}")
        return "\n".join(lines) + "\n"


def _parse_var(cursor: _Cursor) -> Variable:
    vid = cursor.identifier("a variable id")
    token, column = cursor.take("'measured' or 'unmeasured'")
    if token == "measured":
        state = Measurability.MEASURED
    elif token == "unmeasured":
        state = Measurability.UNMEASURED
    else:
        raise ParseError(
            f"expected 'measured' or 'unmeasured', found {token!r}",
            cursor.lineno,
            column,
        )
    cursor.end()
    return Variable(vid, state)


def _parse_inf(cursor: _Cursor) -> Influence:
    inf_id = cursor.identifier("an influence id")
    component = None
    if cursor.peek() == "of":
        cursor.take("'of'")
        component = cursor.identifier("a component id")
    cursor.literal(":")
    output = cursor.identifier("an output variable")
    cursor.literal("=")

    terms: list[tuple[str, Fraction]] = []
    constant = ZERO
    while True:
        coeff = cursor.rational()
        if cursor.peek() == "*":
            cursor.literal("*")
            column = cursor.tokens[cursor.pos][1] if cursor.pos < len(cursor.tokens) else 0
            var = cursor.identifier("an input variable")
            if any(existing == var for existing, _ in terms):
                raise ParseError(
                    f"duplicate input {var!r} in influence {inf_id!r}",
                    cursor.lineno,
                    column,
                )
            terms.append((var, coeff))
        else:
            constant = coeff
            break
        if cursor.peek() != "+":
            break
        cursor.literal("+")
    cursor.end()
    if not terms:
        raise ParseError(
            f"influence {inf_id!r} needs at least one coefficient*variable term",
            cursor.lineno,
            cursor.width + 1,
        )
    return make_influence(inf_id, output, terms, constant=constant, component=component)


def parse_model_document(text: str) -> ModelDocument:
    declarations: list[Declaration] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line)
        if not tokens:
            continue
        cursor = _Cursor(tokens, lineno, len(line))
        keyword, column = cursor.take("'var' or 'inf'")
        if keyword == "var":
            declarations.append(("var", _parse_var(cursor)))
        elif keyword == "inf":
            declarations.append(("inf", _parse_inf(cursor)))
        else:
            raise ParseError(
                f"expected 'var' or 'inf', found {keyword!r}", lineno, column
            )
    return ModelDocument(tuple(declarations))


def parse_model(text: str) -> CausalGraph:
    """Parse and validate a model file; positioned errors, then structural ones."""
    graph = parse_model_document(text).graph()
    violations = validate_model(graph)
    if violations:
        raise ModelValidationError(violations)
    return graph


def parse_observations(text: str) -> dict[str, Fraction]:
    """Parse `obs ID = RAT` lines; duplicate ids are rejected."""
    values: dict[str, Fraction] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line)
        if not tokens:
            continue
        cursor = _Cursor(tokens, lineno, len(line))
        keyword, column = cursor.take("'obs'")
        if keyword != "obs":
            raise ParseError(f"expected 'obs', found {keyword!r}", lineno, column)
        var = cursor.identifier("a variable id")
        if var in values:
            raise ParseError(f"duplicate observation for {var!r}", lineno, column)
        cursor.literal("=")
        values[var] = cursor.rational()
        cursor.end()
    return values


# --------------------------------------------------------------------------
# pipeline driver


@dataclass(frozen=True)
class RunOptions:
    mode: str = "exact"
    delta: Fraction | None = None
    tolerance: Fraction | None = None
    max_order: int | None = None
    max_size: int | None = None
    max_count: int | None = None

    def thresholds(self) -> tuple[Fraction, Fraction]:
        fallback = APPROX_DEFAULT if self.mode == "approx" else ZERO
        delta = self.delta if self.delta is not None else fallback
        tolerance = self.tolerance if self.tolerance is not None else fallback
        return delta, tolerance


@dataclass
class IslandReport:
    closure: Closure
    search: SearchResult
    diagnoses: list[Diagnosis]


@dataclass
class RunResult:
    """Everything the pipeline produced, ready for rendering."""

    mode: str
    delta: Fraction
    tolerance: Fraction
    report: MisbehaviourReport
    islands: list[IslandReport]
    conflicts: list[ConflictSet]
    diagnoses: list[Diagnosis]


def run_pipeline(
    graph: CausalGraph, observations: dict[str, Fraction], options: RunOptions | None = None
) -> RunResult:
    """Detect, restrict, search, and diagnose; conflicts merged across islands."""
    options = options or RunOptions()
    delta, tolerance = options.thresholds()
    report = detect_misbehaving(graph, observations, delta)

    island_reports: list[IslandReport] = []
    merged: list[ConflictSet] = []
    if report.misbehaving:
        strategy = SearchStrategy(
            max_order=options.max_order,
            max_size=options.max_size,
            max_count=options.max_count,
            tolerance=tolerance,
        )
        for closure in islands(graph, observations, report.misbehaving):
            search = find_minimal_conflicts(closure, observations, strategy)
            local = minimal_hitting_sets(c.components for c in search.conflicts)
            island_reports.append(IslandReport(closure, search, local))
            merged.extend(search.conflicts)

    merged.sort(key=lambda c: (c.order, c.size, c.components))
    seen: set[tuple[str, ...]] = set()
    unique = [c for c in merged if not (c.components in seen or seen.add(c.components))]
    conflicts = [
        c
        for c in unique
        if not any(
            set(other.components) < set(c.components) for other in unique
        )
    ]
    diagnoses = minimal_hitting_sets(c.components for c in conflicts)
    return RunResult(
        mode=options.mode,
        delta=delta,
        tolerance=tolerance,
        report=report,
        islands=island_reports,
        conflicts=conflicts,
        diagnoses=diagnoses,
    )


# --------------------------------------------------------------------------
# rendering


def _rat_map(values: dict[str, Fraction]) -> dict[str, str]:
    return {var: format_rational(val) for var, val in sorted(values.items())}


def _set_text(items) -> str:
    return "{" + ", ".join(items) + "}"


def _family_text(family) -> str:
    rendered = ["{" + ", ".join(members) + "}" for members in family]
    return "; ".join(rendered) if rendered else "(none)"


def _conflict_payload(conflict: ConflictSet) -> dict:
    payload = {
        "components": list(conflict.components),
        "order": conflict.order,
        "size": conflict.size,
        "head": conflict.head,
    }
    if conflict.residual is not None:
        payload["residual"] = {
            "variable": conflict.residual.variable,
            "route_a": format_rational(conflict.residual.route_a),
            "route_b": format_rational(conflict.residual.route_b),
            "magnitude": format_rational(conflict.residual.magnitude),
        }
    return payload


def _search_payload(search: SearchResult) -> dict:
    return {
        "pcs_examined": search.pcs_examined,
        "pcs_pruned": search.pcs_pruned,
        "cache_hits": search.cache_hits,
        "counts_by_order": {str(m): n for m, n in sorted(search.counts_by_order.items())},
        "max_order_hit": search.max_order_hit,
        "max_size_hit": search.max_size_hit,
        "max_count_hit": search.max_count_hit,
    }


def _island_payload(island: IslandReport) -> dict:
    closure = island.closure
    return {
        "variables": sorted(closure.variables),
        "influences": sorted(closure.influences),
        "boundary": sorted(closure.boundary),
        "misbehaving": sorted(closure.misbehaving),
        "conflicts": [_conflict_payload(c) for c in island.search.conflicts],
        "diagnoses": [list(d.components) for d in island.diagnoses],
        "search": _search_payload(island.search),
    }


def _island_text(index: int, island: IslandReport) -> list[str]:
    closure = island.closure
    lines = [
        f"island {index}: variables {_set_text(sorted(closure.variables))},"
        f" boundary {_set_text(sorted(closure.boundary))},"
        f" misbehaving {_set_text(sorted(closure.misbehaving))}"
    ]
    for conflict in island.search.conflicts:
        residual = conflict.residual
        witness = (
            f" [{residual.variable}: {format_rational(residual.route_a)}"
            f" vs {format_rational(residual.route_b)}]"
            if residual is not None
            else ""
        )
        lines.append(
            f"  conflict {_set_text(conflict.components)}"
            f" (order {conflict.order}, size {conflict.size}){witness}"
        )
    lines.append(
        "  diagnoses: " + _family_text(d.components for d in island.diagnoses)
    )
    return lines


def _result_header(result: RunResult) -> list[str]:
    return [
        f"mode: {result.mode} (delta {format_rational(result.delta)},"
        f" tolerance {format_rational(result.tolerance)})",
        "misbehaving: " + (", ".join(sorted(result.report.misbehaving)) or "(none)"),
        "predicted: "
        + (
            ", ".join(
                f"{var} = {format_rational(val)}"
                for var, val in sorted(result.report.predicted.items())
            )
            or "(none)"
        ),
    ]


# --------------------------------------------------------------------------
# subcommands


def _cmd_simulate(graph, observations, options: RunOptions):
    inputs = {v: observations[v] for v in graph.input_variables if v in observations}
    values = simulate(graph, inputs)
    payload = {"command": "simulate", "values": _rat_map(values)}
    text = "\n".join(
        f"{var} = {format_rational(val)}" for var, val in sorted(values.items())
    )
    return payload, text + "\n"


def _cmd_detect(graph, observations, options: RunOptions):
    delta, _ = options.thresholds()
    report = detect_misbehaving(graph, observations, delta)
    payload = {
        "command": "detect",
        "delta": format_rational(delta),
        "misbehaving": sorted(report.misbehaving),
        "predicted": _rat_map(report.predicted),
    }
    text = [
        "misbehaving: " + (", ".join(sorted(report.misbehaving)) or "(none)"),
        "predicted: "
        + (
            ", ".join(
                f"{var} = {format_rational(val)}"
                for var, val in sorted(report.predicted.items())
            )
            or "(none)"
        ),
    ]
    return payload, "\n".join(text) + "\n"


def _cmd_closure(graph, observations, options: RunOptions):
    delta, _ = options.thresholds()
    report = detect_misbehaving(graph, observations, delta)
    groups = (
        islands(graph, observations, report.misbehaving) if report.misbehaving else []
    )
    payload = {
        "command": "closure",
        "delta": format_rational(delta),
        "misbehaving": sorted(report.misbehaving),
        "islands": [
            {
                "variables": sorted(c.variables),
                "influences": sorted(c.influences),
                "boundary": sorted(c.boundary),
                "misbehaving": sorted(c.misbehaving),
            }
            for c in groups
        ],
    }
    lines = ["misbehaving: " + (", ".join(sorted(report.misbehaving)) or "(none)")]
    for index, c in enumerate(groups, start=1):
        lines.append(
            f"island {index}: variables {_set_text(sorted(c.variables))},"
            f" influences {_set_text(sorted(c.influences))},"
            f" boundary {_set_text(sorted(c.boundary))}"
        )
    return payload, "\n".join(lines) + "\n"


def _cmd_conflicts(graph, observations, options: RunOptions):
    result = run_pipeline(graph, observations, options)
    payload = {
        "command": "conflicts",
        "mode": result.mode,
        "delta": format_rational(result.delta),
        "tolerance": format_rational(result.tolerance),
        "misbehaving": sorted(result.report.misbehaving),
        "predicted": _rat_map(result.report.predicted),
        "islands": [_island_payload(i) for i in result.islands],
        "conflicts": [list(c.components) for c in result.conflicts],
    }
    for island in payload["islands"]:
        island.pop("diagnoses")
    lines = _result_header(result)
    for index, island in enumerate(result.islands, start=1):
        lines.extend(_island_text(index, island)[:-1])  # no per-island diagnoses here
    lines.append(
        "conflicts: " + _family_text(c.components for c in result.conflicts)
    )
    return payload, "\n".join(lines) + "\n"


def _cmd_diagnose(graph, observations, options: RunOptions):
    result = run_pipeline(graph, observations, options)
    payload = {
        "command": "diagnose",
        "mode": result.mode,
        "delta": format_rational(result.delta),
        "tolerance": format_rational(result.tolerance),
        "misbehaving": sorted(result.report.misbehaving),
        "predicted": _rat_map(result.report.predicted),
        "islands": [_island_payload(i) for i in result.islands],
        "conflicts": [list(c.components) for c in result.conflicts],
        "diagnoses": [list(d.components) for d in result.diagnoses],
    }
    lines = _result_header(result)
    for index, island in enumerate(result.islands, start=1):
        lines.extend(_island_text(index, island))
    lines.append("conflicts: " + _family_text(c.components for c in result.conflicts))
    lines.append("diagnoses: " + _family_text(d.components for d in result.diagnoses))
    return payload, "\n".join(lines) + "\n"


def _cmd_oracle_conflicts(graph, observations, options: RunOptions):
    found = oracle_conflicts(graph, observations)
    ordered = sorted((tuple(sorted(c)) for c in found), key=lambda c: (len(c), c))
    payload = {"command": "oracle-conflicts", "conflicts": [list(c) for c in ordered]}
    return payload, "conflicts: " + _family_text(ordered) + "\n"


def _cmd_oracle_diagnose(graph, observations, options: RunOptions):
    found = oracle_conflicts(graph, observations)
    hitting = oracle_hitting_sets(found)
    conflicts = sorted((tuple(sorted(c)) for c in found), key=lambda c: (len(c), c))
    diagnoses = sorted((tuple(sorted(h)) for h in hitting), key=lambda h: (len(h), h))
    payload = {
        "command": "oracle-diagnose",
        "conflicts": [list(c) for c in conflicts],
        "diagnoses": [list(d) for d in diagnoses],
    }
    text = (
        "conflicts: " + _family_text(conflicts) + "\n"
        "diagnoses: " + _family_text(diagnoses) + "\n"
    )
    return payload, text


_COMMANDS = {
    "simulate": _cmd_simulate,
    "detect": _cmd_detect,
    "closure": _cmd_closure,
    "conflicts": _cmd_conflicts,
    "diagnose": _cmd_diagnose,
    "oracle-conflicts": _cmd_oracle_conflicts,
    "oracle-diagnose": _cmd_oracle_diagnose,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cgdiag", description="Consistency-based diagnosis over causal influence graphs.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub = subparsers.add_parser(name, help=f"run the {name} stage")
        sub.add_argument("-m", "--model", required=True, help="model file path")
        sub.add_argument(
            "-o", "--observations", required=True, help="observation file path"
        )
        sub.add_argument(
            "--format", choices=("text", "json"), default="text", help="output format"
        )
        if name.startswith("oracle"):
            continue
        sub.add_argument(
            "--mode",
            choices=("exact", "approx"),
            default="exact",
            help="approx defaults delta and tol to 1/1000000",
        )
        sub.add_argument(
            "--delta", type=parse_rational, default=None, help="detection threshold"
        )
        sub.add_argument(
            "--tol", type=parse_rational, default=None, help="verification tolerance"
        )
        if name in ("conflicts", "diagnose"):
            sub.add_argument("--max-order", type=int, default=None, metavar="K")
            sub.add_argument("--max-size", type=int, default=None, metavar="J")
            sub.add_argument("--max-count", type=int, default=None, metavar="N")
    return parser


def _options_from(args: argparse.Namespace) -> RunOptions:
    return RunOptions(
        mode=getattr(args, "mode", "exact"),
        delta=getattr(args, "delta", None),
        tolerance=getattr(args, "tol", None),
        max_order=getattr(args, "max_order", None),
        max_size=getattr(args, "max_size", None),
        max_count=getattr(args, "max_count", None),
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"cgdiag: error: {err}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0

    try:
        model_text = Path(args.model).read_text(encoding="utf-8")
        obs_text = Path(args.observations).read_text(encoding="utf-8")
        graph = parse_model(model_text)
        observations = parse_observations(obs_text)
        payload, text = _COMMANDS[args.command](graph, observations, _options_from(args))
    except ModelValidationError as err:
        print(f"cgdiag: {err}", file=sys.stderr)
        return 2
    except OkModelContradiction as err:
        print(f"cgdiag: {err}", file=sys.stderr)
        return 3
    except (ParseError, ObservationError, ScaleError, UnknownVariableError, OSError) as err:
        print(f"cgdiag: error: {err}", file=sys.stderr)
        return 1

    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
