"""Per-paper citation scores and per-unit impact rows (P, IC, FC, IC/P, FC/P).

Sums are kept as exact rationals; conversion to float happens only when a
value is rendered or handed to the statistics code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .citations import CitationLink, CitationWindow

PARAMETERS = ("P", "IC", "FC", "IC/P", "FC/P")


@dataclass(frozen=True)
class PerPaperScore:
    paper_id: str
    ic: int
    fc: Fraction
    window: CitationWindow | None = None


@dataclass(frozen=True)
class UnitImpact:
    unit: str
    window: CitationWindow
    p: int
    ic: int
    fc: Fraction

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError(f"unit {self.unit!r} has no publications; ratios are undefined")

    @property
    def ic_per_p(self) -> Fraction:
        return Fraction(self.ic, self.p)

    @property
    def fc_per_p(self) -> Fraction:
        return Fraction(self.fc) / self.p

    def value(self, parameter: str) -> Fraction:
        if parameter == "P":
            return Fraction(self.p)
        if parameter == "IC":
            return Fraction(self.ic)
        if parameter == "FC":
            return Fraction(self.fc)
        if parameter == "IC/P":
            return self.ic_per_p
        if parameter == "FC/P":
            return self.fc_per_p
        raise ValueError(f"unknown parameter {parameter!r}; expected one of {PARAMETERS}")


def per_paper_scores(
    links: Iterable[CitationLink],
    cited_ids: Iterable[str],
    window: CitationWindow | None = None,
) -> dict[str, PerPaperScore]:
    """Integer and fractional counts for every cited paper, uncited ones included."""
    ic: dict[str, int] = {}
    fc: dict[str, Fraction] = {}
    order = list(dict.fromkeys(cited_ids))
    wanted = set(order)
    for link in links:
        if link.cited_id not in wanted:
            continue
        if window is not None and link.citing_year not in window:
            continue
        ic[link.cited_id] = ic.get(link.cited_id, 0) + 1
        fc[link.cited_id] = fc.get(link.cited_id, Fraction(0)) + link.weight
    return {pid: PerPaperScore(pid, ic.get(pid, 0), fc.get(pid, Fraction(0)), window) for pid in order}


def unit_impact(
    unit: str,
    member_ids: Iterable[str],
    scores: Mapping[str, PerPaperScore],
    window: CitationWindow,
) -> UnitImpact:
    members = list(dict.fromkeys(member_ids))
    missing = [m for m in members if m not in scores]
    if missing:
        raise KeyError(f"unit {unit!r}: {len(missing)} member(s) have no score, e.g. {missing[0]}")
    return UnitImpact(
        unit=unit,
        window=window,
        p=len(members),
        ic=sum(scores[m].ic for m in members),
        fc=sum((scores[m].fc for m in members), Fraction(0)),
    )


class ImpactTable:
    """One row per unit, one column group per citation window (input orders kept)."""

    def __init__(self, units: Sequence[str], windows: Sequence[CitationWindow],
                 rows: Mapping[tuple[str, CitationWindow], UnitImpact]):
        self.units = tuple(units)
        self.windows = tuple(windows)
        self._rows = dict(rows)
        for u in self.units:
            sizes = {self._rows[(u, w)].p for w in self.windows}
            if len(sizes) > 1:
                raise ValueError(f"unit {u!r} has different P across windows: {sorted(sizes)}")

    def row(self, unit: str, window: CitationWindow) -> UnitImpact:
        return self._rows[(unit, window)]

    def p(self, unit: str) -> int:
        return self._rows[(unit, self.windows[0])].p

    def values(self, parameter: str, window: CitationWindow | None = None) -> list[Fraction]:
        if window is None:
            if parameter != "P":
                raise ValueError(f"parameter {parameter!r} needs a window")
            window = self.windows[0]
        return [self._rows[(u, window)].value(parameter) for u in self.units]

    def __len__(self) -> int:
        return len(self.units)

    def __eq__(self, other):
        if not isinstance(other, ImpactTable):
            return NotImplemented
        return (self.units, self.windows, self._rows) == (other.units, other.windows, other._rows)


def impact_table(
    members: Mapping[str, Iterable[str]],
    links: Sequence[CitationLink],
    windows: Sequence[CitationWindow],
) -> ImpactTable:
    """Aggregate resolved links into a unit-by-window impact table."""
    members = {u: list(ids) for u, ids in members.items()}
    all_ids = [pid for ids in members.values() for pid in ids]
    rows = {}
    for window in windows:
        scores = per_paper_scores(links, all_ids, window)
        for unit, ids in members.items():
            rows[(unit, window)] = unit_impact(unit, ids, scores, window)
    return ImpactTable(list(members), windows, rows)


def paper_distributions(
    members: Mapping[str, Iterable[str]],
    scores: Mapping[str, PerPaperScore],
    measure: str = "fc",
    include_uncited: bool = True,
) -> dict[str, list[float]]:
    """Per-unit lists of per-paper values (`fc` or `ic`) for significance testing."""
    if measure not in ("fc", "ic"):
        raise ValueError("measure must be 'fc' or 'ic'")
    out = {}
    for unit, ids in members.items():
        vals = []
        for pid in ids:
            s = scores[pid]
            if not include_uncited and s.ic == 0:
                continue
            vals.append(float(s.fc) if measure == "fc" else float(s.ic))
        out[unit] = vals
    return out


# --- delimited text I/O ----------------------------------------------------

def format_decimal(x: Fraction | int, places: int = 10) -> str:
    """Fixed-point rendering with trailing zeros removed (exact for short decimals)."""
    x = Fraction(x)
    scaled = round(x * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    frac_text = f"{frac:0{places}d}".rstrip("0")
    return f"{sign}{whole}.{frac_text}" if frac_text else f"{sign}{whole}"


def write_impact_tsv(table: ImpactTable) -> str:
    header = ["unit", "P"]
    for w in table.windows:
        header += [f"IC {w.label}", f"IC/P {w.label}", f"FC {w.label}", f"FC/P {w.label}"]
    lines = ["\t".join(header) + "\n"]
    for u in table.units:
        cells = [u, str(table.p(u))]
        for w in table.windows:
            r = table.row(u, w)
            cells += [str(r.ic), format_decimal(r.ic_per_p), format_decimal(r.fc), format_decimal(r.fc_per_p)]
        lines.append("\t".join(cells) + "\n")
    return "".join(lines)


_COLUMN = re.compile(r"^(IC|FC)\s+(\d{4})\s*[-:]\s*(\d{4})$")


def read_impact_tsv(text: str) -> ImpactTable:
    """Load unit aggregates (P, and IC/FC per window) from tab-delimited text.

    Ratio columns, if present, are ignored and recomputed. FC values are
    read as exact decimals.
    """
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if not lines:
        raise ValueError("empty impact table")
    header = [h.strip() for h in lines[0].split("\t")]
    if header[:2] != ["unit", "P"]:
        raise ValueError("impact table must start with columns 'unit' and 'P'")
    columns: dict[tuple[str, CitationWindow], int] = {}
    windows: list[CitationWindow] = []
    for i, name in enumerate(header):
        m = _COLUMN.match(name)
        if m:
            w = CitationWindow(int(m.group(2)), int(m.group(3)))
            columns[(m.group(1), w)] = i
            if w not in windows:
                windows.append(w)
    for w in windows:
        if ("IC", w) not in columns or ("FC", w) not in columns:
            raise ValueError(f"window {w.label} needs both IC and FC columns")
    units, rows = [], {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split("\t")]
        unit = cells[0]
        try:
            p = int(cells[1])
            for w in windows:
                rows[(unit, w)] = UnitImpact(
                    unit, w, p, int(cells[columns[("IC", w)]]), Fraction(cells[columns[("FC", w)]])
                )
        except (IndexError, ValueError) as exc:
            raise ValueError(f"impact table line {lineno} ({unit!r}): {exc}") from exc
        units.append(unit)
    if len(set(units)) != len(units):
        raise ValueError("duplicate unit names in impact table")
    return ImpactTable(units, windows, rows)
