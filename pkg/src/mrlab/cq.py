"""Conjunctive queries over named relations, plus the SQL-subset parser.

Grammar:  SELECT [DISTINCT] a.x [AS '...'], ... FROM R [AS] r, S s, ...
          [WHERE r.x = s.y AND r.z = 'const' AND ...]
Identifiers, qualified attributes, single-quoted string or integer
constants, AND-only conjunctions, equality only.  Output-column aliases
are accepted and ignored; DISTINCT is implied either way because the
probabilistic semantics is set-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .relation import Scalar, SchemaError


class ParseError(Exception):
    """Syntax or resolution failure, annotated with the character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class ConjunctiveQuery:
    """rels in declaration order; attributes are qualified `Rel.attr` strings."""

    rels: tuple[str, ...]
    relation_attrs: tuple[tuple[str, tuple[str, ...]], ...]
    head: tuple[str, ...]
    join_preds: tuple[tuple[str, str], ...] = ()
    sel_preds: tuple[tuple[str, Scalar], ...] = ()
    distinct: bool = True

    def __post_init__(self):
        attrs = set(self.attrs())
        for a in self.head:
            if a not in attrs:
                raise SchemaError(f"head attribute {a} not in Attr(q)")
        for l, r in self.join_preds:
            if l not in attrs or r not in attrs:
                raise SchemaError(f"join predicate {l}={r} outside Attr(q)")
        for a, _ in self.sel_preds:
            if a not in attrs:
                raise SchemaError(f"selection predicate on unknown {a}")

    def attr_map(self) -> dict[str, tuple[str, ...]]:
        return dict(self.relation_attrs)

    def attrs(self) -> tuple[str, ...]:
        """Attr(q): all qualified attributes, declaration order."""
        return tuple(f"{rel}.{a}" for rel, attrs in self.relation_attrs
                     for a in attrs)

    def head_set(self) -> frozenset[str]:
        return frozenset(self.head)

    def restrict(self, rels: Sequence[str]) -> "ConjunctiveQuery":
        """Subquery over a subset of relations, keeping applicable predicates."""
        keep = set(rels)
        amap = self.attr_map()
        rel_of = lambda qattr: qattr.split(".", 1)[0]
        return ConjunctiveQuery(
            rels=tuple(r for r in self.rels if r in keep),
            relation_attrs=tuple((r, amap[r]) for r in self.rels if r in keep),
            head=tuple(a for a in self.head if rel_of(a) in keep),
            join_preds=tuple((l, r) for l, r in self.join_preds
                             if rel_of(l) in keep and rel_of(r) in keep),
            sel_preds=tuple((a, c) for a, c in self.sel_preds
                            if rel_of(a) in keep),
        )

    def with_head(self, head: Sequence[str]) -> "ConjunctiveQuery":
        return ConjunctiveQuery(self.rels, self.relation_attrs, tuple(head),
                                self.join_preds, self.sel_preds, self.distinct)


def serialize_query(q: ConjunctiveQuery) -> str:
    parts = [f"SELECT DISTINCT {', '.join(q.head)}",
             f"FROM {', '.join(q.rels)}"]
    preds = [f"{l} = {r}" for l, r in q.join_preds]
    preds += [f"{a} = {c}" if isinstance(c, int) else f"{a} = '{c}'"
              for a, c in q.sel_preds]
    if preds:
        parts.append(f"WHERE {' AND '.join(preds)}")
    return " ".join(parts)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<qattr>[A-Za-z_]\w*\.[A-Za-z_]\w*)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<int>-?\d+)
  | (?P<str>'[^']*')
  | (?P<punct>[,=()])
""", re.VERBOSE)

_KEYWORDS = {"select", "distinct", "from", "where", "and", "as"}


def _tokenize(text: str):
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, schemas: Mapping[str, Sequence[str]]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.schemas = {name: tuple(attrs) for name, attrs in schemas.items()}

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_kw(self, word: str):
        kind, value, pos = self.next()
        if kind != "ident" or value.lower() != word:
            raise ParseError(f"expected {word.upper()}, got {value!r}", pos)

    def at_kw(self, word: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "ident" and value.lower() == word

    def parse(self) -> ConjunctiveQuery:
        self.expect_kw("select")
        if self.at_kw("distinct"):
            self.next()
        head_raw = self.parse_head()
        self.expect_kw("from")
        rels, aliases = self.parse_from()
        preds = []
        if self.at_kw("where"):
            self.next()
            preds = self.parse_predicates()
        kind, value, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"trailing input {value!r}", pos)
        return self.resolve(head_raw, rels, aliases, preds)

    def parse_head(self):
        head = []
        while True:
            kind, value, pos = self.next()
            if kind not in ("qattr", "ident"):
                raise ParseError(f"expected output column, got {value!r}", pos)
            head.append((value, pos))
            if self.at_kw("as"):  # output alias: accepted, ignored
                self.next()
                akind, avalue, apos = self.next()
                if akind not in ("str", "ident"):
                    raise ParseError(f"bad column alias {avalue!r}", apos)
            kind, value, pos = self.peek()
            if kind == "punct" and value == ",":
                self.next()
                continue
            return head

    def parse_from(self):
        rels, aliases = [], {}
        while True:
            kind, value, pos = self.next()
            if kind != "ident" or value.lower() in _KEYWORDS:
                raise ParseError(f"expected relation name, got {value!r}", pos)
            if value not in self.schemas:
                raise ParseError(f"unknown relation {value!r}", pos)
            if value in rels:
                raise ParseError(f"self-joins are not supported ({value})", pos)
            rels.append(value)
            aliases[value] = value
            explicit_as = self.at_kw("as")
            if explicit_as:
                self.next()
            kind, alias, apos = self.peek()
            if kind == "ident" and alias.lower() not in _KEYWORDS:
                self.next()
                if alias in aliases:
                    raise ParseError(f"duplicate alias {alias!r}", apos)
                aliases[alias] = rels[-1]
            elif explicit_as:
                raise ParseError(f"expected alias after AS, got {alias!r}", apos)
            kind, value, pos = self.peek()
            if kind == "punct" and value == ",":
                self.next()
                continue
            return rels, aliases

    def parse_predicates(self):
        preds = []
        while True:
            lkind, lvalue, lpos = self.next()
            if lkind != "qattr":
                raise ParseError(f"expected qualified attribute, got {lvalue!r}", lpos)
            okind, ovalue, opos = self.next()
            if not (okind == "punct" and ovalue == "="):
                raise ParseError(f"only equality predicates are supported, "
                                 f"got {ovalue!r}", opos)
            rkind, rvalue, rpos = self.next()
            if rkind == "qattr":
                preds.append(("join", (lvalue, lpos), (rvalue, rpos)))
            elif rkind == "int":
                preds.append(("sel", (lvalue, lpos), int(rvalue)))
            elif rkind == "str":
                preds.append(("sel", (lvalue, lpos), rvalue[1:-1]))
            else:
                raise ParseError(f"expected attribute or constant, got {rvalue!r}",
                                 rpos)
            if self.at_kw("and"):
                self.next()
                continue
            return preds

    def resolve_attr(self, raw: str, pos: int, rels, aliases) -> str:
        if "." in raw:
            prefix, attr = raw.split(".", 1)
            if prefix not in aliases:
                raise ParseError(f"unknown relation or alias {prefix!r}", pos)
            rel = aliases[prefix]
            if attr not in self.schemas[rel]:
                raise ParseError(f"relation {rel} has no attribute {attr!r}", pos)
            return f"{rel}.{attr}"
        owners = [r for r in rels if raw in self.schemas[r]]
        if not owners:
            raise ParseError(f"unknown attribute {raw!r}", pos)
        if len(owners) > 1:
            raise ParseError(f"ambiguous attribute {raw!r} "
                             f"(in {', '.join(owners)})", pos)
        return f"{owners[0]}.{raw}"

    def resolve(self, head_raw, rels, aliases, preds) -> ConjunctiveQuery:
        head = tuple(self.resolve_attr(raw, pos, rels, aliases)
                     for raw, pos in head_raw)
        join_preds, sel_preds = [], []
        for pred in preds:
            if pred[0] == "join":
                _, (lraw, lpos), (rraw, rpos) = pred
                join_preds.append((self.resolve_attr(lraw, lpos, rels, aliases),
                                   self.resolve_attr(rraw, rpos, rels, aliases)))
            else:
                _, (lraw, lpos), const = pred
                sel_preds.append((self.resolve_attr(lraw, lpos, rels, aliases),
                                  const))
        return ConjunctiveQuery(
            rels=tuple(rels),
            relation_attrs=tuple((r, self.schemas[r]) for r in rels),
            head=head,
            join_preds=tuple(join_preds),
            sel_preds=tuple(sel_preds),
        )


def parse_query(text: str, schemas: Mapping[str, Sequence[str]]) -> ConjunctiveQuery:
    """Parse and resolve a query against the given relation schemas."""
    return _Parser(text, schemas).parse()
