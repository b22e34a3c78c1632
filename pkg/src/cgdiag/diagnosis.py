"""Diagnoses from conflicts: minimal hitting sets over component ids.

A diagnosis is a minimal set of components whose joint failure explains every
conflict, i.e. a minimal hitting set of the conflict family.  The search
branches on the elements of the first conflict a partial candidate misses,
pruning any branch that can only produce supersets of a known diagnosis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Diagnosis:
    """A minimal candidate fault set, components in sorted order."""

    components: tuple[str, ...]

    def __str__(self) -> str:
        return "{" + ", ".join(self.components) + "}"

    def hits(self, conflict: Iterable[str]) -> bool:
        return any(c in conflict for c in self.components)


def minimal_hitting_sets(conflicts: Iterable[Iterable[str]]) -> list[Diagnosis]:
    """All minimal hitting sets, ordered by size then component ids.

    An empty conflict family means nothing misbehaves: the single empty
    diagnosis.  An empty conflict inside the family is unhittable and
    therefore rejected.
    """
    family = [frozenset(c) for c in conflicts]
    for conflict in family:
        if not conflict:
            raise ValueError("conflict sets must be nonempty")
    if not family:
        return [Diagnosis(())]

    found: list[frozenset[str]] = []

    def extend(candidate: frozenset[str]) -> None:
        if any(prior <= candidate for prior in found):
            return
        unhit = next((c for c in family if not (c & candidate)), None)
        if unhit is None:
            found.append(candidate)
            return
        for element in sorted(unhit):
            extend(candidate | {element})

    extend(frozenset())

    minimal = [
        hs for hs in found if not any(other < hs for other in found)
    ]
    unique = sorted({hs for hs in minimal}, key=lambda hs: (len(hs), tuple(sorted(hs))))
    return [Diagnosis(tuple(sorted(hs))) for hs in unique]


@dataclass(frozen=True)
class ComparisonReport:
    """How the diagnoses of a coarser conflict family relate to a finer one."""

    size_first: int
    size_second: int
    witnesses: tuple[tuple[Diagnosis, Diagnosis | None], ...]
    count_nondecreasing: bool
    all_witnessed: bool


def compare_diagnosis_sets(
    first: Sequence[Diagnosis], second: Sequence[Diagnosis]
) -> ComparisonReport:
    """Pair each diagnosis of `first` with a containing diagnosis of `second`.

    The report records whether the second family is at least as large and
    whether every first-family diagnosis is contained in some second-family
    diagnosis (its witness).
    """
    witnesses = []
    for diag in first:
        cover = set(diag.components)
        witness = next(
            (cand for cand in second if cover <= set(cand.components)), None
        )
        witnesses.append((diag, witness))
    return ComparisonReport(
        size_first=len(first),
        size_second=len(second),
        witnesses=tuple(witnesses),
        count_nondecreasing=len(second) >= len(first),
        all_witnessed=all(w is not None for _, w in witnesses),
    )
