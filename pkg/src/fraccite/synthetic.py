"""Seeded synthetic corpora with known citation behaviour per field.

Two generators live here:

* `generate` draws cited papers per unit and Poisson citation events per
  paper and year, with reference-list lengths k from each field's
  distribution. `expected_metrics` gives the matching closed-form means.
* `realize_aggregates` turns a table of unit aggregates (P, IC and FC per
  window) into a concrete corpus whose pipeline output reproduces those
  aggregates exactly.

Randomness comes from Philox (a counter-based generator) keyed by the seed
and the position of the item being drawn, so every record depends only on
(seed, its own index) and never on generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .citations import CitationWindow
from .metrics import ImpactTable
from .query import normalize_text
from .records import DocType, PublicationRecord, write_canonical

MAX_SEED = 2**64 - 1


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class RefCountDistribution:
    """Distribution of reference-list length k (always >= 1).

    kind "constant" uses `a`; "uniform" is integer-uniform on [a, b];
    "lognormal" is max(1, round(X)) with X log-normal of mean `a` and
    log-scale sigma `b`; "choice" is uniform over the listed `values`.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "constant":
            if int(self.a) != self.a or self.a < 1:
                raise ValueError("constant k must be an integer >= 1")
        elif self.kind == "uniform":
            if int(self.a) != self.a or int(self.b) != self.b or not 1 <= self.a <= self.b:
                raise ValueError("uniform k needs integers 1 <= lo <= hi")
        elif self.kind == "lognormal":
            if not self.a > 0 or not self.b > 0:
                raise ValueError("lognormal k needs a positive mean and sigma")
        elif self.kind == "choice":
            if not self.values or any(int(v) != v or v < 1 for v in self.values):
                raise ValueError("choice k needs a non-empty list of integers >= 1")
            object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        else:
            raise ValueError(f"unknown k distribution {self.kind!r}")

    @classmethod
    def constant(cls, k: int) -> "RefCountDistribution":
        return cls("constant", k)

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "RefCountDistribution":
        return cls("uniform", lo, hi)

    @classmethod
    def lognormal(cls, mean: float, sigma: float) -> "RefCountDistribution":
        return cls("lognormal", mean, sigma)

    @classmethod
    def choice(cls, values: Sequence[int]) -> "RefCountDistribution":
        return cls("choice", values=tuple(values))

    @property
    def min_k(self) -> int:
        if self.kind == "choice":
            return min(self.values)
        return 1 if self.kind == "lognormal" else int(self.a)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, int(self.a), dtype=np.int64)
        if self.kind == "uniform":
            return rng.integers(int(self.a), int(self.b), endpoint=True, size=size)
        if self.kind == "choice":
            return np.asarray(self.values, dtype=np.int64)[rng.integers(0, len(self.values), size=size)]
        mu = math.log(self.a) - self.b**2 / 2
        return np.maximum(1, np.rint(rng.lognormal(mu, self.b, size=size))).astype(np.int64)

    def mean_inverse(self) -> float:
        """E[1/k]."""
        if self.kind == "constant":
            return 1.0 / self.a
        if self.kind == "uniform":
            lo, hi = int(self.a), int(self.b)
            return sum(1.0 / k for k in range(lo, hi + 1)) / (hi - lo + 1)
        if self.kind == "choice":
            return sum(1.0 / k for k in self.values) / len(self.values)
        mu = math.log(self.a) - self.b**2 / 2

        def cdf(x):
            return 0.5 * math.erfc(-(math.log(x) - mu) / (self.b * math.sqrt(2)))

        total, k = cdf(1.5), 2
        prev = cdf(1.5)
        while True:
            cur = cdf(k + 0.5)
            total += (cur - prev) / k
            prev = cur
            if 1.0 - cur < 1e-15 or k > 10**7:
                return total
            k += 1


@dataclass(frozen=True)
class FieldProfile:
    name: str
    ref_count_distribution: RefCountDistribution
    citations_per_paper_rate: float
    half_life: float = math.inf
    unit_names: tuple[str, ...] = ()
    cited_refs_per_doc: int = 1  # in-corpus references carried by each citing document

    def __post_init__(self):
        if not self.citations_per_paper_rate >= 0:
            raise ValueError(f"field {self.name!r}: citation rate must be >= 0")
        if not self.half_life > 0:
            raise ValueError(f"field {self.name!r}: half-life must be > 0")
        if self.cited_refs_per_doc < 1:
            raise ValueError(f"field {self.name!r}: cited_refs_per_doc must be >= 1")

    @property
    def units(self) -> tuple[str, ...]:
        return self.unit_names or (f"{self.name} Unit",)

    def yearly_rate(self, age: int) -> float:
        """Expected citing documents per paper in the year `age` years after publication."""
        if math.isinf(self.half_life):
            return self.citations_per_paper_rate
        return self.citations_per_paper_rate * 0.5 ** (age / self.half_life)


@dataclass(frozen=True)
class SyntheticSpec:
    fields: tuple[FieldProfile, ...]
    papers_per_unit: int = 20
    cited_year: int = 2005
    citing_year_range: CitationWindow = CitationWindow(2005, 2009)
    seed: int = 0

    def __post_init__(self):
        if not self.fields:
            raise ValueError("at least one field is required")
        if self.papers_per_unit < 1:
            raise ValueError("papers_per_unit must be >= 1")
        if self.citing_year_range.start_year < self.cited_year:
            raise ValueError("citing years must not precede the cited year")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")
        names = [f.name for f in self.fields]
        units = [u for f in self.fields for u in f.units]
        if len(set(names)) != len(names) or len(set(units)) != len(units):
            raise ValueError("field and unit names must be unique")
        for f in self.fields:
            if f.cited_refs_per_doc > f.ref_count_distribution.min_k:
                raise ValueError(
                    f"infeasible field {f.name!r}: {f.cited_refs_per_doc} in-corpus references per "
                    f"document exceed the smallest reference list ({f.ref_count_distribution.min_k})"
                )


@dataclass
class SyntheticCorpus:
    cited: list[PublicationRecord]
    citing: list[PublicationRecord]
    labels: dict[str, tuple[str, str]] = field(default_factory=dict)  # paper id -> (unit, field)

    @property
    def records(self) -> list[PublicationRecord]:
        return self.cited + self.citing

    def members(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for pid, (unit, _) in self.labels.items():
            out.setdefault(unit, []).append(pid)
        return out

    def to_canonical(self) -> str:
        return write_canonical(self.records)

    def labels_tsv(self) -> str:
        rows = ["paper_id\tunit\tfield\n"]
        rows += [f"{pid}\t{u}\t{f}\n" for pid, (u, f) in self.labels.items()]
        return "".join(rows)


def _unit_address(unit: str) -> str:
    return f"Synthetic Univ, {unit}, Testville"


def generate(spec: SyntheticSpec) -> SyntheticCorpus:
    """Draw a corpus for `spec`.

    Per cited paper and citing year the number of citing documents is
    Poisson(rate * 0.5 ** (age / half_life)). Each citing document belongs
    to the cited paper's field and draws k from that field's distribution.
    With `cited_refs_per_doc` > 1, citation events of one field and year
    are packed into documents citing distinct papers.
    """
    cited, citing, labels = [], [], {}
    years = range(spec.citing_year_range.start_year, spec.citing_year_range.end_year + 1)
    for fi, prof in enumerate(spec.fields):
        events_by_year: dict[int, list[str]] = {y: [] for y in years}
        rates = np.array([prof.yearly_rate(y - spec.cited_year) for y in years])
        paper_no = 0
        for unit in prof.units:
            for _ in range(spec.papers_per_unit):
                pid = f"SYN-{fi:02d}-{paper_no:06d}"
                rng = _rng(spec.seed, 0, fi, paper_no)
                k_own = int(prof.ref_count_distribution.sample(rng, 1)[0])
                counts = rng.poisson(rates)
                cited.append(PublicationRecord(
                    id=pid, year=spec.cited_year, doc_type=DocType.ARTICLE, source=prof.name,
                    addresses=(_unit_address(unit),), ref_count=k_own,
                ))
                labels[pid] = (unit, prof.name)
                for y, c in zip(years, counts.tolist()):
                    events_by_year[y].extend([pid] * c)
                paper_no += 1
        for y in years:
            events = events_by_year[y]
            if not events:
                continue
            docs = _pack(events, prof.cited_refs_per_doc)
            rng = _rng(spec.seed, 1, fi, y)
            ks = prof.ref_count_distribution.sample(rng, len(docs))
            for j, (refs, k) in enumerate(zip(docs, ks.tolist())):
                citing.append(PublicationRecord(
                    id=f"SYN-{fi:02d}-{y}-{j:07d}", year=y, doc_type=DocType.ARTICLE, source=prof.name,
                    addresses=(f"Citing Lab, {prof.name}",), ref_count=k, cited_refs=tuple(refs),
                ))
    return SyntheticCorpus(cited, citing, labels)


def _pack(events: list[str], per_doc: int) -> list[list[str]]:
    """Split events (grouped by paper) into documents citing distinct papers."""
    if per_doc == 1:
        return [[e] for e in events]
    longest = max(events.count(e) for e in set(events))
    n_docs = max(math.ceil(len(events) / per_doc), longest)
    return [events[j::n_docs] for j in range(n_docs)]


def expected_metrics(spec: SyntheticSpec, window: CitationWindow) -> dict[str, tuple[float, float]]:
    """Per field, (E[IC/P], E[FC/P]) for citations falling in `window`."""
    out = {}
    lo = max(window.start_year, spec.citing_year_range.start_year)
    hi = min(window.end_year, spec.citing_year_range.end_year)
    for prof in spec.fields:
        e_ic = sum(prof.yearly_rate(y - spec.cited_year) for y in range(lo, hi + 1))
        out[prof.name] = (e_ic, e_ic * prof.ref_count_distribution.mean_inverse())
    return out


# --- corpora realizing published aggregates --------------------------------

_PART_SIZES = (100, 50, 25, 20, 10, 5, 4, 2, 1)  # weights in hundredths: 1/k for k dividing 100


def _split_weight(total_hundredths: int, n: int) -> list[int]:
    """n parts from _PART_SIZES summing exactly to total_hundredths (greedy)."""
    if not n <= total_hundredths <= 100 * n:
        raise ValueError(f"cannot split {total_hundredths / 100} into {n} weights of the form 1/k")
    parts, rest = [], total_hundredths - n
    for _ in range(n):
        c = next(c for c in _PART_SIZES if c - 1 <= rest)
        parts.append(c)
        rest -= c - 1
    if rest:
        raise ValueError(f"cannot split {total_hundredths / 100} into {n} weights of the form 1/k")
    return parts


def _hundredths(x: Fraction) -> int:
    scaled = x * 100
    if scaled.denominator != 1:
        raise ValueError(f"fractional count {float(x)} is not a multiple of 0.01")
    return int(scaled)


@dataclass
class RealizedCorpus:
    records: list[PublicationRecord]
    units_ini: str
    cited_year: int


def realize_aggregates(table: ImpactTable, seed: int = 0, cited_year: int = 2005,
                       institution: str = "Tsinghua Univ") -> RealizedCorpus:
    """Build a corpus whose unit aggregates equal `table` exactly.

    Windows must be nested and start at `cited_year`; FC values must be
    multiples of 0.01. Every citation is its own citing document whose
    reference-list length k divides 100, so weights are exact hundredths.
    Citations are spread over each unit's P papers by the seeded generator.
    """
    windows = sorted(table.windows, key=lambda w: w.end_year)
    for w in windows:
        if w.start_year != cited_year:
            raise ValueError(f"window {w.label} must start at the cited year {cited_year}")
    records: list[PublicationRecord] = []
    citing: list[PublicationRecord] = []
    for ui, unit in enumerate(table.units):
        p = table.p(unit)
        ids = [f"U{ui:02d}-{i:05d}" for i in range(p)]
        for pid in ids:
            records.append(PublicationRecord(
                id=pid, year=cited_year, doc_type=DocType.ARTICLE, source="Realized",
                addresses=(f"{institution}, {unit}, Beijing 100084, Peoples R China",), ref_count=20,
            ))
        prev_ic, prev_fc, prev_end = 0, Fraction(0), cited_year - 1
        for wi, w in enumerate(windows):
            row = table.row(unit, w)
            n, fc = row.ic - prev_ic, row.fc - prev_fc
            if n < 0 or fc < 0:
                raise ValueError(f"unit {unit!r}: counts shrink from one window to the next")
            parts = _split_weight(_hundredths(fc), n) if n else []
            if not n and fc:
                raise ValueError(f"unit {unit!r}: fractional count without citations in {w.label}")
            rng = _rng(seed, 2, ui, wi)
            targets = rng.integers(0, p, size=n)
            years = rng.integers(prev_end + 1, w.end_year, endpoint=True, size=n)
            for j, (c, t, y) in enumerate(zip(parts, targets.tolist(), years.tolist())):
                citing.append(PublicationRecord(
                    id=f"X{ui:02d}-{wi}-{j:05d}", year=y, doc_type=DocType.ARTICLE, source="Realized",
                    addresses=("Citing Lab, Elsewhere",), ref_count=100 // c, cited_refs=(ids[t],),
                ))
            prev_ic, prev_fc, prev_end = row.ic, row.fc, w.end_year
    return RealizedCorpus(records + citing, units_config(table.units, institution, cited_year), cited_year)


def _quote(name: str) -> str:
    return '"' + name.replace('"', "") + '"'


def units_config(units: Sequence[str], institution: str, cited_year: int, min_pubs: int = 5) -> str:
    """INI unit definitions matching each unit name within the institution's address.

    When one unit's name occurs inside another's (Dep Chem / Dep Chem Engn),
    the longer units are subtracted.
    """
    out = []
    inst = _quote(institution.lower())
    for unit in units:
        needle = normalize_text(unit)
        wider = [u for u in units if u != unit and needle in normalize_text(u)]
        base = f"ad=({inst} same {_quote(unit)}) and py={cited_year}"
        out.append(f"[{unit}]\nmin_pubs = {min_pubs}\n")
        if wider:
            out.append(f"set1 = {base}\n")
            out.append("set2 = " + " or ".join(f"ad=({inst} same {_quote(u)})" for u in wider) + "\n")
            out.append("query = #1 not #2\n\n")
        else:
            out.append(f"query = {base}\n\n")
    return "".join(out)
