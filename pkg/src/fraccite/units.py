"""Unit definitions, corpus filtering and assignment of publications to units.

Unit definition files are INI-style, one section per unit::

    [DEFAULT]
    min_pubs = 5

    [Dep Chem]
    set1 = ad=(tsinghua univ same dep chem) and ad=(china not taiwan) and py=2005
    set2 = ad=(tsinghua univ same dep chem engn)
    query = #1 not #2

``setN`` entries are evaluated in numeric order and can be referred to as
``#N`` by later sets and by ``query``. Values may wrap onto indented lines;
a wrapped line must not start with ``#`` or ``;`` (those start comments).
"""

from __future__ import annotations

import configparser
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable, Sequence

from .query import QueryExpr, QueryIndex, evaluate_query, parse_affiliation_query, render
from .records import DocType, PublicationRecord

DEFAULT_MIN_PUBS = 5


@dataclass(frozen=True)
class UnitDefinition:
    name: str
    query: QueryExpr
    min_pubs: int = DEFAULT_MIN_PUBS
    sets: tuple[tuple[int, QueryExpr], ...] = ()


@dataclass(frozen=True)
class Exclusion:
    unit: str
    count: int | None
    reason: str


@dataclass
class UnitAssignment:
    """Result of `assign_units`: members of included units plus the exclusion report."""

    members: dict[str, frozenset[str]] = field(default_factory=dict)
    excluded: list[Exclusion] = field(default_factory=list)

    @property
    def overlap(self) -> int:
        """Number of records that belong to more than one included unit."""
        counts = Counter(rid for ids in self.members.values() for rid in ids)
        return sum(1 for c in counts.values() if c > 1)

    def all_members(self) -> frozenset[str]:
        return frozenset().union(*self.members.values()) if self.members else frozenset()

    def report(self) -> str:
        lines = ["unit\tstatus\tcount\tdetail\n"]
        for name, ids in self.members.items():
            lines.append(f"{name}\tincluded\t{len(ids)}\t\n")
        for ex in self.excluded:
            count = "" if ex.count is None else str(ex.count)
            lines.append(f"{ex.unit}\texcluded\t{count}\t{ex.reason}\n")
        lines.append(f"#overlap\t\t{self.overlap}\trecords assigned to more than one unit\n")
        return "".join(lines)


def filter_corpus(
    corpus: Iterable[PublicationRecord],
    doc_types: Collection[DocType | str],
    year: int | None = None,
) -> list[PublicationRecord]:
    """Keep records of the given document types (and publication year, if given)."""
    wanted = {DocType.parse(t) if isinstance(t, str) else t for t in doc_types}
    return [r for r in corpus if r.doc_type in wanted and (year is None or r.year == year)]


def _set_index(key: str) -> int | None:
    m = re.fullmatch(r"set(\d+)", key)
    return int(m.group(1)) if m else None


def parse_units(text: str) -> list[UnitDefinition]:
    """Parse unit definitions from INI text. Raises ValueError with the unit name on bad input."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"malformed unit definition file: {exc}") from exc
    units = []
    for name in cp.sections():
        section = cp[name]
        if "query" not in section:
            raise ValueError(f"unit {name!r} has no 'query'")
        try:
            min_pubs = int(section.get("min_pubs", str(DEFAULT_MIN_PUBS)))
        except ValueError as exc:
            raise ValueError(f"unit {name!r}: min_pubs must be an integer") from exc
        sets = []
        for key in section:
            idx = _set_index(key)
            if idx is not None:
                sets.append((idx, _parse(name, key, section[key])))
        units.append(UnitDefinition(
            name=name,
            query=_parse(name, "query", section["query"]),
            min_pubs=min_pubs,
            sets=tuple(sorted(sets)),
        ))
    return units


def _parse(unit: str, key: str, text: str) -> QueryExpr:
    try:
        return parse_affiliation_query(" ".join(text.split()))
    except ValueError as exc:
        raise ValueError(f"unit {unit!r}, {key}: {exc}") from exc


def load_units(path: str | Path) -> list[UnitDefinition]:
    return parse_units(Path(path).read_text(encoding="utf-8"))


def render_units(units: Sequence[UnitDefinition]) -> str:
    out = []
    for u in units:
        out.append(f"[{u.name}]\n")
        out.append(f"min_pubs = {u.min_pubs}\n")
        for idx, expr in u.sets:
            out.append(f"set{idx} = {render(expr)}\n")
        out.append(f"query = {render(u.query)}\n\n")
    return "".join(out)


def evaluate_unit(unit: UnitDefinition, corpus: Iterable[PublicationRecord] | QueryIndex) -> frozenset[str]:
    index = corpus if isinstance(corpus, QueryIndex) else QueryIndex(corpus)
    named: dict[int, frozenset[str]] = {}
    for idx, expr in unit.sets:
        named[idx] = evaluate_query(expr, index, named)
    return evaluate_query(unit.query, index, named)


def assign_units(units: Sequence[UnitDefinition], corpus: Iterable[PublicationRecord]) -> UnitAssignment:
    """Evaluate every unit's query; drop units below their `min_pubs` threshold.

    A failing query excludes only its own unit. Records may land in several units.
    """
    names = [u.name for u in units]
    dupes = sorted(n for n, c in Counter(names).items() if c > 1)
    if dupes:
        raise ValueError(f"duplicate unit names: {dupes}")
    index = QueryIndex(corpus)
    result = UnitAssignment()
    for unit in units:
        try:
            ids = evaluate_unit(unit, index)
        except (KeyError, ValueError) as exc:
            result.excluded.append(Exclusion(unit.name, None, f"query error: {exc}"))
            continue
        if len(ids) < unit.min_pubs:
            result.excluded.append(
                Exclusion(unit.name, len(ids), f"fewer than {unit.min_pubs} publications")
            )
            continue
        result.members[unit.name] = ids
    return result
