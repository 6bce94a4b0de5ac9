"""Affiliation query language in the style of WoS advanced search.

    ad=(tsinghua univ same dep phys or tsinghua univ same phys dep)
        and ad=(china not taiwan) and py=2005
    #1 not #2

Operators, tightest first: ``same`` (phrases co-occurring in a single
address), ``not`` (set difference), ``and``, ``or``. Keywords are
case-insensitive. A leading ``not`` complements against the whole corpus.
Phrases may be double-quoted to include keywords literally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .records import PublicationRecord

KEYWORDS = frozenset({"and", "or", "not", "same"})


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, offset: int, expected: str | None = None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnresolvedReference(KeyError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"query references #{index}, which is not defined")

    def __str__(self):
        return self.args[0]


# --- expression tree -------------------------------------------------------

@dataclass(frozen=True)
class Phrase:
    """Address phrase atom; `text` is lower-cased with single spaces."""

    text: str

    def __post_init__(self):
        object.__setattr__(self, "text", " ".join(self.text.lower().split()))
        if not self.text:
            raise ValueError("empty phrase")


@dataclass(frozen=True)
class Year:
    year: int


@dataclass(frozen=True)
class Same:
    phrases: tuple[Phrase, ...]


@dataclass(frozen=True)
class And:
    left: "QueryExpr"
    right: "QueryExpr"


@dataclass(frozen=True)
class Or:
    left: "QueryExpr"
    right: "QueryExpr"


@dataclass(frozen=True)
class Not:
    """Set difference: records matching `left` but not `right`."""

    left: "QueryExpr"
    right: "QueryExpr"


@dataclass(frozen=True)
class Complement:
    operand: "QueryExpr"


@dataclass(frozen=True)
class Ref:
    index: int


QueryExpr = Union[Phrase, Year, Same, And, Or, Not, Complement, Ref]


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<eq>=)
  | (?P<ref>\#\d+)
  | (?P<quoted>"[^"]*")
  | (?P<word>[^\s()="]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # lparen rparen eq ref quoted word kw end
    text: str
    offset: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "word" and value.lower() in KEYWORDS:
                toks.append(_Tok("kw", value.lower(), pos))
            elif kind == "quoted":
                toks.append(_Tok("quoted", value[1:-1], pos))
            else:
                toks.append(_Tok(kind, value, pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def _is_kw(self, word: str) -> bool:
        return self.tok.kind == "kw" and self.tok.text == word

    def _expect(self, kind: str, expected: str) -> _Tok:
        if self.tok.kind != kind:
            got = self.tok.text or "end of query"
            raise QuerySyntaxError(f"unexpected {got!r}", self.tok.offset, expected)
        return self._advance()

    def parse(self) -> QueryExpr:
        if self.tok.kind == "end":
            raise QuerySyntaxError("empty query", 0, "ad=(...), py=YYYY or #n")
        expr = self._or()
        if self.tok.kind != "end":
            raise QuerySyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset, "and, or, not or end of query")
        return expr

    # top level
    def _or(self) -> QueryExpr:
        left = self._and()
        while self._is_kw("or"):
            self._advance()
            left = Or(left, self._and())
        return left

    def _and(self) -> QueryExpr:
        left = self._diff()
        while self._is_kw("and"):
            self._advance()
            left = And(left, self._diff())
        return left

    def _diff(self) -> QueryExpr:
        left = self._unary()
        while self._is_kw("not"):
            self._advance()
            left = Not(left, self._unary())
        return left

    def _unary(self) -> QueryExpr:
        if self._is_kw("not"):
            self._advance()
            return Complement(self._unary())
        return self._primary()

    def _primary(self) -> QueryExpr:
        tok = self.tok
        if tok.kind == "lparen":
            self._advance()
            expr = self._or()
            self._expect("rparen", "')'")
            return expr
        if tok.kind == "ref":
            self._advance()
            return Ref(int(tok.text[1:]))
        if tok.kind == "word" and self.toks[self.i + 1].kind == "eq":
            field = tok.text.lower()
            self._advance()
            self._advance()
            if field == "ad":
                return self._address_group()
            if field == "py":
                ytok = self.tok
                if ytok.kind != "word" or not re.fullmatch(r"\d{4}", ytok.text):
                    raise QuerySyntaxError(f"invalid year {ytok.text!r}", ytok.offset, "a 4-digit year")
                self._advance()
                return Year(int(ytok.text))
            raise QuerySyntaxError(f"unknown field {field!r}", tok.offset, "ad or py")
        raise QuerySyntaxError(
            f"unexpected {tok.text or 'end of query'!r}", tok.offset, "ad=(...), py=YYYY, #n or '('"
        )

    # inside ad=( ... )
    def _address_group(self) -> QueryExpr:
        if self.tok.kind == "lparen":
            self._advance()
            expr = self._addr_or()
            self._expect("rparen", "')' closing the address group")
            return expr
        return self._addr_same()

    def _addr_or(self) -> QueryExpr:
        left = self._addr_and()
        while self._is_kw("or"):
            self._advance()
            left = Or(left, self._addr_and())
        return left

    def _addr_and(self) -> QueryExpr:
        left = self._addr_diff()
        while self._is_kw("and"):
            self._advance()
            left = And(left, self._addr_diff())
        return left

    def _addr_diff(self) -> QueryExpr:
        left = self._addr_same()
        while self._is_kw("not"):
            self._advance()
            left = Not(left, self._addr_same())
        return left

    def _addr_same(self) -> QueryExpr:
        start = self.tok.offset
        if self.tok.kind == "lparen":
            self._advance()
            first: QueryExpr = self._addr_or()
            self._expect("rparen", "')'")
        else:
            first = self._phrase()
        if not self._is_kw("same"):
            return first
        if not isinstance(first, Phrase):
            raise QuerySyntaxError("SAME operands must be plain phrases", start, "a phrase")
        phrases = [first]
        while self._is_kw("same"):
            self._advance()
            phrases.append(self._phrase())
        return Same(tuple(phrases))

    def _phrase(self) -> Phrase:
        words = []
        start = self.tok.offset
        while self.tok.kind in ("word", "quoted"):
            words.append(self._advance().text)
        if not words or not " ".join(words).strip():
            got = self.tok.text or "end of query"
            raise QuerySyntaxError(f"unexpected {got!r}", start, "an address phrase")
        return Phrase(" ".join(words))


def parse_affiliation_query(text: str) -> QueryExpr:
    """Parse a query string into an expression tree.

    >>> parse_affiliation_query("#1 not #2")
    Not(left=Ref(index=1), right=Ref(index=2))
    """
    return _Parser(text).parse()


# --- rendering -------------------------------------------------------------

def _render_phrase(p: Phrase) -> str:
    words = p.text.split()
    if any(w in KEYWORDS or not re.fullmatch(r'[^\s()="]+', w) for w in words):
        return f'"{p.text}"'
    return p.text


def render(expr: QueryExpr) -> str:
    """Canonical, fully parenthesized text form; parses back to an equal tree."""
    if isinstance(expr, Phrase):
        return f"ad=({_render_phrase(expr)})"
    if isinstance(expr, Same):
        return "ad=(" + " same ".join(_render_phrase(p) for p in expr.phrases) + ")"
    if isinstance(expr, Year):
        return f"py={expr.year:04d}"
    if isinstance(expr, Ref):
        return f"#{expr.index}"
    if isinstance(expr, Complement):
        return f"(not {render(expr.operand)})"
    op = {And: "and", Or: "or", Not: "not"}[type(expr)]
    return f"({render(expr.left)} {op} {render(expr.right)})"


# --- evaluation ------------------------------------------------------------

_NON_WORD = re.compile(r"[^\w]+")


def normalize_text(text: str) -> str:
    """Lower-case, punctuation to spaces, whitespace collapsed, space-padded."""
    return " " + " ".join(_NON_WORD.sub(" ", text.lower()).split()) + " "


class QueryIndex:
    """Pre-normalized view of a corpus for repeated query evaluation."""

    def __init__(self, corpus: Iterable[PublicationRecord]):
        self.records = list(corpus)
        self.universe = frozenset(r.id for r in self.records)
        self._addresses = [(r.id, [normalize_text(a) for a in r.addresses]) for r in self.records]
        self._by_year: dict[int, set[str]] = {}
        for r in self.records:
            self._by_year.setdefault(r.year, set()).add(r.id)
        self._cache: dict[tuple, frozenset[str]] = {}

    def phrase(self, phrase: Phrase) -> frozenset[str]:
        return self.same((phrase,))

    def same(self, phrases: tuple[Phrase, ...]) -> frozenset[str]:
        key = tuple(p.text for p in phrases)
        hit = self._cache.get(key)
        if hit is None:
            needles = [normalize_text(t) for t in key]
            hit = frozenset(
                rid for rid, addrs in self._addresses
                if any(all(n in a for n in needles) for a in addrs)
            )
            self._cache[key] = hit
        return hit

    def year(self, year: int) -> frozenset[str]:
        return frozenset(self._by_year.get(year, ()))


def evaluate_query(
    expr: QueryExpr,
    corpus: Iterable[PublicationRecord] | QueryIndex,
    named_results: Mapping[int, Iterable[str]] | None = None,
) -> frozenset[str]:
    """Ids of the records matching `expr`. `#n` is looked up in `named_results`."""
    index = corpus if isinstance(corpus, QueryIndex) else QueryIndex(corpus)
    named = named_results or {}

    def ev(node: QueryExpr) -> frozenset[str]:
        if isinstance(node, Phrase):
            return index.phrase(node)
        if isinstance(node, Same):
            return index.same(node.phrases)
        if isinstance(node, Year):
            return index.year(node.year)
        if isinstance(node, Ref):
            if node.index not in named:
                raise UnresolvedReference(node.index)
            return frozenset(named[node.index])
        if isinstance(node, Complement):
            return index.universe - ev(node.operand)
        if isinstance(node, And):
            return ev(node.left) & ev(node.right)
        if isinstance(node, Or):
            return ev(node.left) | ev(node.right)
        if isinstance(node, Not):
            return ev(node.left) - ev(node.right)
        raise TypeError(f"not a query expression: {node!r}")

    return ev(expr)
