"""Ranking tables, rank changes and text/Markdown/delimited rendering of results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .citations import CitationWindow
from .metrics import PARAMETERS, ImpactTable, format_decimal
from .stats.correlation import CorrelationMatrix, stars

REPORT_FORMATS = ("tsv", "txt", "md")


@dataclass(frozen=True)
class RankRow:
    rank: int
    unit: str
    value: Fraction


@dataclass(frozen=True)
class RankingTable:
    parameter: str
    window: CitationWindow | None
    rows: tuple[RankRow, ...]

    def rank_of(self, unit: str) -> int:
        for row in self.rows:
            if row.unit == unit:
                return row.rank
        raise KeyError(unit)

    @property
    def units(self) -> list[str]:
        return [r.unit for r in self.rows]

    def exact_ties(self) -> list[list[str]]:
        """Groups of units sharing a rank because their values are exactly equal."""
        groups: dict[int, list[str]] = {}
        for r in self.rows:
            groups.setdefault(r.rank, []).append(r.unit)
        return [g for g in groups.values() if len(g) > 1]

    def rounding_ties(self, decimals: int = 2) -> list[tuple[str, str]]:
        """Adjacent units ranked apart whose values look equal once rounded."""
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            if a.value != b.value and _round_half_up(a.value, decimals) == _round_half_up(b.value, decimals):
                out.append((a.unit, b.unit))
        return out

    def label(self) -> str:
        return self.parameter if self.window is None else f"{self.parameter} {self.window.label}"


@dataclass(frozen=True)
class RankChange:
    unit: str
    rank_a: int
    rank_b: int

    @property
    def delta(self) -> int:
        """Positive when the unit moves up under ranking b."""
        return self.rank_a - self.rank_b


def _round_half_up(x: Fraction, decimals: int) -> Fraction:
    scale = 10**decimals
    return Fraction(math.floor(Fraction(x) * scale + Fraction(1, 2)), scale)


def rank_units(table: ImpactTable, parameter: str, window: CitationWindow | None = None) -> RankingTable:
    """Descending ranking on exact values; equal values share a rank (1, 1, 3 ...)
    and are listed by unit label."""
    if parameter not in PARAMETERS:
        raise ValueError(f"unknown parameter {parameter!r}")
    if parameter == "P":
        window = None
    elif window is None:
        raise ValueError(f"parameter {parameter!r} needs a window")
    values = table.values(parameter, window)
    pairs = sorted(zip(table.units, values), key=lambda uv: (-uv[1], uv[0]))
    rows = []
    for pos, (unit, value) in enumerate(pairs, start=1):
        rank = rows[-1].rank if rows and rows[-1].value == value else pos
        rows.append(RankRow(rank, unit, value))
    return RankingTable(parameter, window, tuple(rows))


def rank_change(a: RankingTable, b: RankingTable) -> list[RankChange]:
    """Rank movement from ranking a to ranking b, listed in b's order."""
    if set(a.units) != set(b.units):
        missing = sorted(set(a.units) ^ set(b.units))
        raise ValueError(f"rankings cover different units: {missing}")
    return [RankChange(r.unit, a.rank_of(r.unit), r.rank) for r in b.rows]


def format_delta(delta: int, blank_zero: bool = True) -> str:
    if delta == 0:
        return "" if blank_zero else "0"
    return f"{delta:+d}"


def format_correlation(r: float, p: float) -> str:
    """Three decimals without the leading zero, stars for p < .05 / .01: '.934(**)'."""
    text = f"{r:.3f}"
    if text.startswith("0."):
        text = text[1:]
    elif text.startswith("-0."):
        text = "-" + text[2:]
    s = stars(p)
    return f"{text}({s})" if s else text


# --- tabular output --------------------------------------------------------

@dataclass
class Tabular:
    name: str
    headers: list[str]
    rows: list[list[str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    align: str = ""  # one 'l' or 'r' per column; default: first left, rest right

    def alignment(self) -> str:
        return self.align or "l" + "r" * (len(self.headers) - 1)


def to_tsv(t: Tabular) -> str:
    lines = ["\t".join(t.headers) + "\n"]
    lines += ["\t".join(row) + "\n" for row in t.rows]
    return "".join(lines)


def to_text(t: Tabular) -> str:
    widths = [len(h) for h in t.headers]
    for row in t.rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    align = t.alignment()

    def fmt(row):
        cells = [c.ljust(w) if a == "l" else c.rjust(w) for c, w, a in zip(row, widths, align)]
        return "  ".join(cells).rstrip() + "\n"

    out = [fmt(t.headers), "  ".join("-" * w for w in widths) + "\n"]
    out += [fmt(row) for row in t.rows]
    out += [f"{n}\n" for n in t.notes]
    return "".join(out)


def _md_cell(text: str) -> str:
    return text.replace("|", "\\|")


def to_markdown(t: Tabular) -> str:
    out = ["| " + " | ".join(_md_cell(h) for h in t.headers) + " |\n"]
    out.append("|" + "|".join(":---" if a == "l" else "---:" for a in t.alignment()) + "|\n")
    out += ["| " + " | ".join(_md_cell(c) for c in row) + " |\n" for row in t.rows]
    if t.notes:
        out.append("\n")
        out += [f"{_md_cell(n)}\n" for n in t.notes]
    return "".join(out)


def _two(x) -> str:
    """Two decimals, rounding exact values half up (2.365 -> 2.37)."""
    scaled = _round_half_up(abs(Fraction(x)), 2) * 100
    sign = "-" if x < 0 else ""
    return f"{sign}{scaled.numerator // 100}.{scaled.numerator % 100:02d}"


def impact_tables(table: ImpactTable) -> tuple[Tabular, Tabular]:
    """(delimited data, display) versions of the per-unit impact table."""
    headers = ["unit", "P"]
    for w in table.windows:
        headers += [f"IC {w.label}", f"IC/P {w.label}", f"FC {w.label}", f"FC/P {w.label}"]
    data = Tabular("impact", headers)
    display = Tabular("impact", headers)
    for u in table.units:
        drow = [u, str(table.p(u))]
        vrow = [u, str(table.p(u))]
        for w in table.windows:
            r = table.row(u, w)
            drow += [str(r.ic), format_decimal(r.ic_per_p), format_decimal(r.fc), format_decimal(r.fc_per_p)]
            vrow += [str(r.ic), _two(r.ic_per_p), _two(r.fc), _two(r.fc_per_p)]
        data.rows.append(drow)
        display.rows.append(vrow)
    return data, display


def ranking_tables(a: RankingTable, b: RankingTable, name: str) -> tuple[Tabular, Tabular]:
    """Side-by-side rankings with the rank change of the unit listed under b."""
    changes = rank_change(a, b)
    headers = ["rank", a.label(), "value", "rank", b.label(), "value", "rank change"]
    data = Tabular(name, headers, align="rlrrlrr")
    display = Tabular(name, headers, align="rlrrlrr")
    for ra, rb, ch in zip(a.rows, b.rows, changes):
        data.rows.append([str(ra.rank), ra.unit, format_decimal(ra.value), str(rb.rank), rb.unit,
                          format_decimal(rb.value), format_delta(ch.delta, blank_zero=False)])
        display.rows.append([str(ra.rank), ra.unit, _two(ra.value), str(rb.rank), rb.unit,
                             _two(rb.value), format_delta(ch.delta)])
    for ranking in (a, b):
        for group in ranking.exact_ties():
            display.notes.append(f"tie in {ranking.label()}: {', '.join(group)} (equal values share a rank)")
        for x, y in ranking.rounding_ties():
            display.notes.append(f"rounding tie in {ranking.label()}: {x} / {y} look equal at 2 decimals")
    data.notes = list(display.notes)
    return data, display


def render_correlation(matrix: CorrelationMatrix) -> str:
    """Spearman above the diagonal, Pearson below, diagonal blank."""
    return to_text(correlation_tables(matrix)[1])


def correlation_tables(matrix: CorrelationMatrix) -> tuple[Tabular, Tabular]:
    labels = list(matrix.labels)
    display = Tabular("correlations", [""] + labels)
    for i, a in enumerate(labels):
        row = [a]
        for j, _ in enumerate(labels):
            if i == j:
                row.append("")
            elif j > i:
                row.append(format_correlation(matrix.spearman_rho[i, j], matrix.spearman_p[i, j]))
            else:
                row.append(format_correlation(matrix.pearson_r[i, j], matrix.pearson_p[i, j]))
        display.rows.append(row)
    display.notes = [
        f"N = {matrix.n}. Spearman rank correlations above the diagonal, Pearson below.",
        "** significant at the 0.01 level (2-tailed); * at the 0.05 level.",
    ]
    data = Tabular("correlations", ["a", "b", "pearson_r", "pearson_p", "spearman_rho", "spearman_p"])
    for i, a in enumerate(labels):
        for j in range(i + 1, len(labels)):
            data.rows.append([a, labels[j], f"{matrix.pearson_r[i, j]:.10f}", f"{matrix.pearson_p[i, j]:.10g}",
                              f"{matrix.spearman_rho[i, j]:.10f}", f"{matrix.spearman_p[i, j]:.10g}"])
    return data, display


def export_report(tables: Iterable[tuple[Tabular, Tabular]], out_dir: str | Path,
                  formats: Sequence[str] = REPORT_FORMATS) -> list[Path]:
    """Write each (data, display) pair as <name>.tsv / .txt / .md. Returns the paths written."""
    for fmt in formats:
        if fmt not in REPORT_FORMATS:
            raise ValueError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for data, display in tables:
        for fmt in formats:
            path = out / f"{data.name}.{fmt}"
            if fmt == "tsv":
                text = to_tsv(data)
            elif fmt == "txt":
                text = to_text(display)
            else:
                text = to_markdown(display)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            written.append(path)
    return written
