"""Predicate frame catalog: loading, validation, and distribution analytics.

The catalog file is UTF-8, one record per line, six tab-separated fields:
predicate lemma, sense id, argument number, function tag, comma-separated
VerbNet roles (may be empty), and the free-text argument description.
Lines starting with '#' are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

FUNCTION_TAGS = (
    "PPT", "PAG", "GOL", "PRD", "MNR", "DIR", "VSP", "LOC",
    "EXT", "CAU", "COM", "PRP", "TMP", "ADJ", "ADV", "REC",
)

SENSE_ID_RE = re.compile(r"^\d{2,3}$")

MAX_ARG_NUMBER = 6


class CatalogError(ValueError):
    """Malformed or inconsistent catalog input."""


@dataclass(frozen=True)
class FrameArgument:
    """One numbered argument of one predicate sense."""

    predicate: str
    sense: str
    arg_number: int
    function_tag: str
    verbnet_roles: frozenset[str]
    description: str

    def __post_init__(self) -> None:
        if not self.predicate:
            raise CatalogError("empty predicate lemma")
        if not SENSE_ID_RE.match(self.sense):
            raise CatalogError(f"sense id {self.sense!r} must be 2-3 digits")
        if not 0 <= self.arg_number <= MAX_ARG_NUMBER:
            raise CatalogError(f"argument number {self.arg_number} out of range 0..{MAX_ARG_NUMBER}")
        if self.function_tag not in FUNCTION_TAGS:
            raise CatalogError(f"unknown function tag {self.function_tag!r}")

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.predicate, self.sense, self.arg_number)


@dataclass(frozen=True)
class Catalog:
    arguments: tuple[FrameArgument, ...]

    @cached_property
    def senses(self) -> frozenset[tuple[str, str]]:
        return frozenset((a.predicate, a.sense) for a in self.arguments)

    @cached_property
    def predicates(self) -> frozenset[str]:
        return frozenset(a.predicate for a in self.arguments)

    @cached_property
    def by_key(self) -> dict[tuple[str, str, int], FrameArgument]:
        return {a.key: a for a in self.arguments}

    def get(self, predicate: str, sense: str, arg_number: int) -> FrameArgument | None:
        return self.by_key.get((predicate, sense, arg_number))

    def has_sense(self, predicate: str, sense: str) -> bool:
        return (predicate, sense) in self.senses


def parse_catalog_lines(lines: Iterable[str]) -> Catalog:
    arguments: list[FrameArgument] = []
    seen: dict[tuple[str, str, int], int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise CatalogError(f"line {lineno}: expected 6 tab-separated fields, found {len(fields)}")
        predicate, sense, argn, tag, roles, description = fields
        if not argn.strip().isdigit():
            raise CatalogError(f"line {lineno}: argument number {argn!r} is not an integer")
        vnroles = frozenset(r.strip() for r in roles.split(",") if r.strip())
        try:
            arg = FrameArgument(
                predicate=predicate.strip(),
                sense=sense.strip(),
                arg_number=int(argn),
                function_tag=tag.strip(),
                verbnet_roles=vnroles,
                description=description.strip(),
            )
        except CatalogError as exc:
            raise CatalogError(f"line {lineno}: {exc}") from None
        if arg.key in seen:
            raise CatalogError(
                f"line {lineno}: duplicate record for {arg.predicate}.{arg.sense} "
                f"ARG{arg.arg_number} (first defined on line {seen[arg.key]})"
            )
        seen[arg.key] = lineno
        arguments.append(arg)
    return Catalog(tuple(arguments))


def load_catalog(path) -> Catalog:
    with open(path, encoding="utf-8") as fh:
        return parse_catalog_lines(fh)


@dataclass(frozen=True)
class CountsReport:
    predicates: int
    senses: int
    arguments: int


def catalog_stats(catalog: Catalog) -> CountsReport:
    return CountsReport(
        predicates=len(catalog.predicates),
        senses=len(catalog.senses),
        arguments=len(catalog.arguments),
    )


@dataclass(frozen=True)
class CountMatrix:
    """Counts over (row label, argument number) cells with marginals."""

    rows: tuple[str, ...]
    cols: tuple[int, ...]
    cells: tuple[tuple[str, int, int], ...]

    @cached_property
    def _index(self) -> dict[tuple[str, int], int]:
        return {(r, c): n for r, c, n in self.cells}

    def cell(self, row: str, col: int) -> int:
        return self._index.get((row, col), 0)

    def row_total(self, row: str) -> int:
        return sum(self.cell(row, c) for c in self.cols)

    def col_total(self, col: int) -> int:
        return sum(self.cell(r, col) for r in self.rows)

    @property
    def total(self) -> int:
        return sum(n for _, _, n in self.cells)


def _matrix(counts: dict[tuple[str, int], int], rows: tuple[str, ...], cols: tuple[int, ...]) -> CountMatrix:
    cells = tuple((r, c, counts[(r, c)]) for r in rows for c in cols if (r, c) in counts)
    return CountMatrix(rows=rows, cols=cols, cells=cells)


def ftag_by_arg(catalog: Catalog) -> CountMatrix:
    """Function-tag rows by argument-number columns; every record counts once."""
    counts: dict[tuple[str, int], int] = {}
    for a in catalog.arguments:
        key = (a.function_tag, a.arg_number)
        counts[key] = counts.get(key, 0) + 1
    return _matrix(counts, FUNCTION_TAGS, tuple(range(MAX_ARG_NUMBER + 1)))


@dataclass(frozen=True)
class VnRoleReport:
    matrix: CountMatrix
    mapped_arguments: int
    total_arguments: int

    @property
    def coverage(self) -> float:
        if self.total_arguments == 0:
            return 0.0
        return self.mapped_arguments / self.total_arguments


def vnrole_by_arg(catalog: Catalog) -> VnRoleReport:
    """VerbNet-role rows by argument-number columns (0..5).

    An argument carrying k roles contributes k cells, so the grand total
    may exceed the number of role-bearing arguments. Coverage is the
    fraction of arguments carrying at least one role.
    """
    counts: dict[tuple[str, int], int] = {}
    mapped = 0
    for a in catalog.arguments:
        if a.verbnet_roles:
            mapped += 1
        if a.arg_number > 5:
            continue
        for role in a.verbnet_roles:
            key = (role, a.arg_number)
            counts[key] = counts.get(key, 0) + 1
    totals: dict[str, int] = {}
    for (role, _), n in counts.items():
        totals[role] = totals.get(role, 0) + n
    rows = tuple(sorted(totals, key=lambda r: (-totals[r], r)))
    matrix = _matrix(counts, rows, tuple(range(6)))
    return VnRoleReport(matrix=matrix, mapped_arguments=mapped, total_arguments=len(catalog.arguments))
