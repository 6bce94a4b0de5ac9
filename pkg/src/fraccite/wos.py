"""Web of Science export parsing (field-tagged plain text and tab-delimited).

Only the tags needed for citation counting are interpreted:

    UT  record key            PY  publication year      DT  document type
    SO  source title          C1  author addresses      NR  reference count
    CR  cited references      DI  DOI                   AU/J9/VL/BP  citation key

Cited references are reduced to keys: ``doi:<doi>`` when the reference
carries a DOI, otherwise the upper-cased reference string without its DOI
part. Records get the same keys as aliases so that citing records can be
joined to them.
"""

from __future__ import annotations

import re
from typing import BinaryIO

from .records import DocType, ParseIssue, PublicationRecord, read_text

MULTI_VALUED = frozenset({"AU", "AF", "C1", "CR", "BE", "CA", "RP", "EM", "OI", "RI", "FU"})

_TAG_LINE = re.compile(r"^([A-Z][A-Z0-9])(?: (.*))?$")
_DOI_IN_REF = re.compile(r",?\s*DOI\s+\[?([^\s,\]]+)", re.IGNORECASE)
_BRACKETED_AUTHORS = re.compile(r"\[[^\]]*\]")


def doi_key(doi: str) -> str:
    doi = doi.strip().lower()
    for prefix in ("https://doi.org/", "http://dx.doi.org/", "doi:"):
        if doi.startswith(prefix):
            doi = doi[len(prefix):]
    return "doi:" + doi


def reference_key(ref: str) -> str:
    """Normalize one cited-reference string to the key used for joining."""
    ref = " ".join(ref.split()).strip().rstrip(".")
    m = _DOI_IN_REF.search(ref)
    if m:
        return doi_key(m.group(1))
    return ref.upper()


def _split_addresses(values: list[str]) -> list[str]:
    out = []
    for value in values:
        value = _BRACKETED_AUTHORS.sub("", value)
        for part in value.split(";"):
            part = part.strip()
            if part:
                out.append(part)
    return out


def _split_refs(values: list[str]) -> list[str]:
    return [p.strip() for v in values for p in v.split(";") if p.strip()]


def _first_author_key(author: str) -> str:
    # "Wang, H" -> "WANG H"  (the form used in CR strings)
    last, _, initials = author.partition(",")
    return " ".join(f"{last} {initials.replace('.', '').replace(' ', '')}".upper().split())


def _record_aliases(fields: dict[str, list[str]]) -> tuple[str, ...]:
    aliases = []
    doi = " ".join(fields.get("DI", [])).strip()
    if doi:
        aliases.append(doi_key(doi))
    authors = fields.get("AU", [])
    j9 = " ".join(fields.get("J9", [])).strip()
    year = " ".join(fields.get("PY", [])).strip()
    if authors and j9 and year:
        parts = [_first_author_key(authors[0].split(";")[0]), year, j9.upper()]
        vol = " ".join(fields.get("VL", [])).strip()
        page = " ".join(fields.get("BP", [])).strip()
        if vol:
            parts.append(f"V{vol}")
        if page:
            parts.append(f"P{page}")
        aliases.append(", ".join(parts))
    return tuple(aliases)


def _build_record(fields: dict[str, list[str]], line: int, issues: list[ParseIssue]) -> PublicationRecord | None:
    uid = " ".join(fields.get("UT", [])).strip()
    if not uid:
        issues.append(ParseIssue(line, None, "record has no UT (accession number)"))
        return None
    py = " ".join(fields.get("PY", [])).strip()
    if not re.fullmatch(r"\d{4}", py):
        issues.append(ParseIssue(line, uid, f"missing or invalid PY {py!r}"))
        return None
    refs = []
    seen = set()
    for ref in _split_refs(fields.get("CR", [])):
        key = reference_key(ref)
        if key not in seen:
            seen.add(key)
            refs.append(key)
    nr_text = " ".join(fields.get("NR", [])).strip()
    if nr_text:
        if not nr_text.isdigit():
            issues.append(ParseIssue(line, uid, f"invalid NR {nr_text!r}"))
            return None
        ref_count = int(nr_text)
    else:
        ref_count = len(refs)
    if ref_count < len(refs):
        issues.append(ParseIssue(line, uid, f"NR {ref_count} is smaller than the {len(refs)} distinct CR entries; using {len(refs)}"))
        ref_count = len(refs)
    return PublicationRecord(
        id=uid,
        year=int(py),
        doc_type=DocType.parse(" ".join(fields.get("DT", []))),
        source=" ".join(" ".join(fields.get("SO", [])).split()),
        addresses=tuple(_split_addresses(fields.get("C1", []))),
        ref_count=ref_count,
        cited_refs=tuple(refs),
        aliases=_record_aliases(fields),
    )


def _parse_tagged(text: str) -> tuple[list[PublicationRecord], list[ParseIssue]]:
    records, issues = [], []
    fields: dict[str, list[str]] = {}
    tag = None
    start = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("  ") and tag is not None:
            value = line.strip()
            if tag in MULTI_VALUED:
                fields[tag].append(value)
            else:
                fields[tag][-1] = f"{fields[tag][-1]} {value}"
            continue
        m = _TAG_LINE.match(line.rstrip())
        if not m:
            issues.append(ParseIssue(lineno, None, f"unrecognized line {line[:40]!r}"))
            continue
        tag, value = m.group(1), (m.group(2) or "").strip()
        if tag in ("FN", "VR", "EF"):
            tag = None
            continue
        if tag == "ER":
            if fields:
                rec = _build_record(fields, start, issues)
                if rec is not None:
                    records.append(rec)
            fields, tag, start = {}, None, None
            continue
        if start is None:
            start = lineno
        fields.setdefault(tag, []).append(value)
    if fields:
        issues.append(ParseIssue(start, " ".join(fields.get("UT", [])) or None, "record not terminated by ER"))
    return records, issues


def _parse_tab_delimited(text: str) -> tuple[list[PublicationRecord], list[ParseIssue]]:
    lines = [l.rstrip("\r") for l in text.split("\n")]
    header = [h.strip() for h in lines[0].split("\t")]
    records, issues = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        fields: dict[str, list[str]] = {}
        for tag, cell in zip(header, cells):
            cell = cell.strip()
            if not cell or not tag:
                continue
            if tag in ("AU", "AF"):
                fields[tag] = [a.strip() for a in cell.split(";") if a.strip()]
            else:
                fields[tag] = [cell]
        rec = _build_record(fields, lineno, issues)
        if rec is not None:
            records.append(rec)
    return records, issues


def _looks_tab_delimited(text: str) -> bool:
    first = text.split("\n", 1)[0]
    return "\t" in first and "UT" in [c.strip() for c in first.split("\t")]


def parse_wos_export(stream: BinaryIO | bytes | str) -> tuple[list[PublicationRecord], list[ParseIssue]]:
    """Parse a WoS export; returns the records and a list of record-level issues.

    Raises CorpusReadError if the stream cannot be read or decoded.
    Records with a UT already seen earlier in the stream are reported and dropped.
    """
    text = read_text(stream)
    if not text.strip():
        return [], []
    if _looks_tab_delimited(text):
        records, issues = _parse_tab_delimited(text)
    else:
        records, issues = _parse_tagged(text)
    seen: set[str] = set()
    unique = []
    for rec in records:
        if rec.id in seen:
            issues.append(ParseIssue(None, rec.id, "duplicate UT; later record dropped"))
            continue
        seen.add(rec.id)
        unique.append(rec)
    return unique, issues
