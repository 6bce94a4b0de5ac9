"""Citing-to-cited links with fractional weights 1/k and citation windows."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .records import PublicationRecord


class DataIntegrityError(ValueError):
    """Corpus content that makes a weight or link undefined."""


@dataclass(frozen=True, order=True)
class CitationWindow:
    """Inclusive range of citing publication years."""

    start_year: int
    end_year: int

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValueError(f"window start {self.start_year} is after its end {self.end_year}")

    def __contains__(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    @property
    def label(self) -> str:
        return f"{self.start_year}-{self.end_year}"

    @property
    def years(self) -> int:
        return self.end_year - self.start_year + 1

    @classmethod
    def parse(cls, text: str) -> "CitationWindow":
        m = re.fullmatch(r"\s*(\d{4})\s*[:\-]\s*(\d{4})\s*", text)
        if not m:
            raise ValueError(f"window must look like 2005:2009, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class CitationLink:
    citing_id: str
    cited_id: str
    citing_year: int
    ref_count: int
    weight: Fraction
    self_citation: bool = False


def fractional_weight(citing: PublicationRecord) -> Fraction:
    """Exactly 1/k for a citing record with a reference list of length k."""
    if citing.ref_count <= 0:
        raise DataIntegrityError(f"record {citing.id} has ref_count {citing.ref_count}; weight 1/k is undefined")
    return Fraction(1, citing.ref_count)


def resolve_citations(
    cited: Iterable[PublicationRecord],
    citing_corpus: Iterable[PublicationRecord],
    include_self: bool = True,
) -> list[CitationLink]:
    """Join citing records to cited records through their reference keys.

    A cited record is reachable under its id and every alias. Repeated
    mentions inside one reference list collapse to a single link. A link is
    flagged as a self-citation when the citing record is itself in the cited
    set; `include_self=False` drops those links. Output is sorted by
    (citing_id, cited_id), so it does not depend on input order.
    """
    cited = list(cited)
    cited_ids = {r.id for r in cited}
    by_key: dict[str, set[str]] = {}
    for rec in cited:
        for key in (rec.id, *rec.aliases):
            by_key.setdefault(key, set()).add(rec.id)

    links = []
    seen_citing: set[str] = set()
    for citing in citing_corpus:
        if citing.id in seen_citing:
            continue
        seen_citing.add(citing.id)
        if citing.cited_refs and citing.ref_count == 0:
            raise DataIntegrityError(f"record {citing.id} cites {len(citing.cited_refs)} references but has ref_count 0")
        targets: set[str] = set()
        for key in citing.cited_refs:
            targets.update(by_key.get(key, ()))
        if not targets:
            continue
        is_self = citing.id in cited_ids
        if is_self and not include_self:
            continue
        weight = fractional_weight(citing)
        for target in targets:
            links.append(CitationLink(citing.id, target, citing.year, citing.ref_count, weight, is_self))
    links.sort(key=lambda l: (l.citing_id, l.cited_id))
    return links


def apply_window(links: Iterable[CitationLink], window: CitationWindow) -> list[CitationLink]:
    return [l for l in links if window.start_year <= l.citing_year <= window.end_year]


def write_links(links: Sequence[CitationLink]) -> str:
    """Audit dump: citing_id, cited_id, citing_year, k, weight (tab-delimited)."""
    rows = ["citing_id\tcited_id\tciting_year\tk\tweight\tself_citation\n"]
    for l in links:
        rows.append(
            f"{l.citing_id}\t{l.cited_id}\t{l.citing_year}\t{l.ref_count}\t"
            f"{float(l.weight):.10g}\t{int(l.self_citation)}\n"
        )
    return "".join(rows)
