"""Publication records and the canonical line-delimited JSON corpus format."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import BinaryIO, Iterable, Sequence


class DocType(str, Enum):
    ARTICLE = "article"
    REVIEW = "review"
    PROCEEDINGS_PAPER = "proceedings-paper"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str) -> "DocType":
        """Map a free-text document type (WoS `DT` value or canonical name)."""
        for part in text.split(";"):
            key = " ".join(part.strip().lower().replace("-", " ").split())
            if key in _DOC_TYPE_NAMES:
                return _DOC_TYPE_NAMES[key]
        return cls.OTHER


_DOC_TYPE_NAMES = {
    "article": DocType.ARTICLE,
    "review": DocType.REVIEW,
    "proceedings paper": DocType.PROCEEDINGS_PAPER,
    "proceeding paper": DocType.PROCEEDINGS_PAPER,
    "other": DocType.OTHER,
}

DEFAULT_DOC_TYPES = frozenset({DocType.ARTICLE, DocType.REVIEW, DocType.PROCEEDINGS_PAPER})


@dataclass(frozen=True)
class PublicationRecord:
    """One indexed document.

    `ref_count` is the full length of the reference list (WoS `NR`), which may
    exceed the number of `cited_refs` that resolve inside the corpus.
    `aliases` are extra keys under which other records may cite this one
    (a normalized DOI or a WoS cited-reference string).
    """

    id: str
    year: int
    doc_type: DocType = DocType.OTHER
    source: str = ""
    addresses: tuple[str, ...] = ()
    ref_count: int = 0
    cited_refs: tuple[str, ...] = ()
    aliases: tuple[str, ...] = field(default=(), compare=True)

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be nonempty")
        if not 1000 <= self.year <= 9999:
            raise ValueError(f"record {self.id}: year {self.year} is not a 4-digit year")
        if self.ref_count < 0:
            raise ValueError(f"record {self.id}: negative reference count")


@dataclass(frozen=True)
class ParseIssue:
    """A record-level problem found while parsing; parsing continued past it."""

    line: int | None
    record_id: str | None
    message: str


class CorpusReadError(OSError):
    """The input stream could not be read or decoded at all."""


def read_text(stream: BinaryIO | bytes | str) -> str:
    """Decode a byte stream (UTF-8, optional BOM) into text."""
    try:
        if isinstance(stream, str):
            return stream
        data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
        if isinstance(data, str):
            return data
        return bytes(data).decode("utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusReadError(f"unreadable corpus stream: {exc}") from exc


_CANONICAL_FIELDS = ("id", "year", "doc_type", "source", "addresses", "ref_count", "cited_refs", "aliases")


def record_to_dict(rec: PublicationRecord) -> dict:
    return {
        "id": rec.id,
        "year": rec.year,
        "doc_type": rec.doc_type.value,
        "source": rec.source,
        "addresses": list(rec.addresses),
        "ref_count": rec.ref_count,
        "cited_refs": list(rec.cited_refs),
        "aliases": list(rec.aliases),
    }


def record_from_dict(obj: dict) -> PublicationRecord:
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    if "id" not in obj or not isinstance(obj["id"], str):
        raise ValueError("missing or non-string 'id'")
    year = obj.get("year")
    if not isinstance(year, int) or isinstance(year, bool):
        raise ValueError(f"record {obj['id']}: 'year' must be an integer")

    def strings(key):
        value = obj.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValueError(f"record {obj['id']}: '{key}' must be a list of strings")
        return tuple(value)

    ref_count = obj.get("ref_count", 0)
    if not isinstance(ref_count, int) or isinstance(ref_count, bool):
        raise ValueError(f"record {obj['id']}: 'ref_count' must be an integer")
    return PublicationRecord(
        id=obj["id"],
        year=year,
        doc_type=DocType.parse(str(obj.get("doc_type", "other"))),
        source=str(obj.get("source", "")),
        addresses=strings("addresses"),
        ref_count=ref_count,
        cited_refs=strings("cited_refs"),
        aliases=strings("aliases"),
    )


def parse_canonical(stream: BinaryIO | bytes | str) -> tuple[list[PublicationRecord], list[ParseIssue]]:
    """Decode one JSON object per line; bad lines are reported and skipped."""
    text = read_text(stream)
    records, issues = [], []
    # split on LF only: str.splitlines() would also break on U+0085 / U+2028,
    # which may appear unescaped inside JSON strings
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        obj = None
        try:
            obj = json.loads(line)
            records.append(record_from_dict(obj))
        except (ValueError, TypeError) as exc:
            rid = obj.get("id") if isinstance(obj, dict) else None
            issues.append(ParseIssue(lineno, rid if isinstance(rid, str) else None, str(exc)))
    return records, issues


def dumps_record(rec: PublicationRecord) -> str:
    return json.dumps(record_to_dict(rec), ensure_ascii=False, separators=(",", ":"))


def write_canonical(records: Iterable[PublicationRecord], stream=None) -> str:
    """Serialize records, one per line (LF). Returns the text; also writes it if `stream` is given."""
    text = "".join(dumps_record(r) + "\n" for r in records)
    if stream is not None:
        if isinstance(stream, io.TextIOBase):
            stream.write(text)
        else:
            stream.write(text.encode("utf-8"))
    return text


def write_issues(issues: Sequence[ParseIssue]) -> str:
    """Parse report as tab-delimited text: line, record id, message."""
    out = ["line\trecord_id\tmessage\n"]
    for issue in issues:
        line = "" if issue.line is None else str(issue.line)
        out.append(f"{line}\t{issue.record_id or ''}\t{' '.join(issue.message.split())}\n")
    return "".join(out)
