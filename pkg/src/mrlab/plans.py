"""Logical plan trees: Scan / Select / Project / Join.

Plans are immutable and hashable so they can live in memo tables and
equivalence sets.  The text form is a parenthesized prefix notation, e.g.
`project[did,rid](join[did](scan Emp, scan Dept))`, and is bit-exact:
serialize(parse(s)) == s for canonical s.  Join brackets list join pairs
(`a` for a shared name, `l=r` otherwise); `join[]` is a cross product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .relation import SchemaError
from .relops import Comparison

Plan = Union["Scan", "Select", "Project", "Join"]


class PlanError(Exception):
    """Structurally invalid plan (bad refs, duplicate columns, parse failure)."""


@dataclass(frozen=True)
class Scan:
    rel: str


@dataclass(frozen=True)
class Select:
    cond: Comparison
    child: Plan


@dataclass(frozen=True)
class Project:
    attrs: tuple[str, ...]
    child: Plan


@dataclass(frozen=True)
class Join:
    on: tuple[tuple[str, str], ...]
    left: Plan
    right: Plan


def out_attrs(plan: Plan, schemas: Mapping[str, Sequence[str]]) -> tuple[str, ...]:
    """Output attribute names of a plan node; raises PlanError on bad refs."""
    if isinstance(plan, Scan):
        if plan.rel not in schemas:
            raise PlanError(f"scan of unknown relation {plan.rel!r}")
        return tuple(schemas[plan.rel])
    if isinstance(plan, Select):
        attrs = out_attrs(plan.child, schemas)
        refs = [plan.cond.attr] + ([plan.cond.rhs] if plan.cond.rhs_is_attr else [])
        for a in refs:
            if a not in attrs:
                raise PlanError(f"selection on missing attribute {a!r}")
        return attrs
    if isinstance(plan, Project):
        attrs = out_attrs(plan.child, schemas)
        for a in plan.attrs:
            if a not in attrs:
                raise PlanError(f"projection of missing attribute {a!r}")
        return plan.attrs
    if isinstance(plan, Join):
        left = out_attrs(plan.left, schemas)
        right = out_attrs(plan.right, schemas)
        for l, r in plan.on:
            if l not in left or r not in right:
                raise PlanError(f"join pair {l}={r} not present in inputs")
        dropped = {r for l, r in plan.on if l == r}
        merged = left + tuple(a for a in right if a not in dropped)
        if len(set(merged)) != len(merged):
            raise PlanError(f"join would duplicate attributes: {merged}")
        return merged
    raise PlanError(f"not a plan node: {plan!r}")


def rels_of(plan: Plan) -> tuple[str, ...]:
    """Relations scanned by the subtree, left-to-right."""
    if isinstance(plan, Scan):
        return (plan.rel,)
    if isinstance(plan, (Select, Project)):
        return rels_of(plan.child)
    return rels_of(plan.left) + rels_of(plan.right)


def serialize_plan(plan: Plan) -> str:
    if isinstance(plan, Scan):
        return f"scan {plan.rel}"
    if isinstance(plan, Select):
        return f"select[{plan.cond}]({serialize_plan(plan.child)})"
    if isinstance(plan, Project):
        return f"project[{','.join(plan.attrs)}]({serialize_plan(plan.child)})"
    if isinstance(plan, Join):
        pairs = ",".join(l if l == r else f"{l}={r}" for l, r in plan.on)
        return f"join[{pairs}]({serialize_plan(plan.left)}, {serialize_plan(plan.right)})"
    raise PlanError(f"not a plan node: {plan!r}")


class _PlanParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise PlanError(f"{msg} at position {self.pos} in plan text")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eat(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        if start == self.pos:
            self.error("expected identifier")
        return self.text[start:self.pos]

    def until(self, ch: str) -> str:
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == ch and depth == 0:
                return self.text[start:self.pos]
            self.pos += 1
        self.error(f"expected {ch!r}")

    def parse(self) -> Plan:
        plan = self.node()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input")
        return plan

    def node(self) -> Plan:
        op = self.word().lower()
        if op == "scan":
            return Scan(self.word())
        self.eat("[")
        spec = self.until("]").strip()
        self.eat("]")
        self.eat("(")
        if op == "select":
            child = self.node()
            self.eat(")")
            return Select(self.condition(spec), child)
        if op == "project":
            attrs = tuple(a.strip() for a in spec.split(",") if a.strip())
            if not attrs:
                self.error("projection needs attributes")
            child = self.node()
            self.eat(")")
            return Project(attrs, child)
        if op == "join":
            left = self.node()
            self.eat(",")
            right = self.node()
            self.eat(")")
            pairs = []
            for part in (p.strip() for p in spec.split(",") if p.strip()):
                l, _, r = part.partition("=")
                pairs.append((l.strip(), (r or l).strip()))
            return Join(tuple(pairs), left, right)
        self.error(f"unknown operator {op!r}")

    def condition(self, spec: str) -> Comparison:
        for op in ("<=", ">=", "!=", "=", "<", ">"):
            if op in spec:
                lhs, rhs = spec.split(op, 1)
                lhs, rhs = lhs.strip(), rhs.strip()
                if rhs.startswith("'") and rhs.endswith("'") and len(rhs) >= 2:
                    return Comparison(lhs, op, rhs[1:-1])
                try:
                    return Comparison(lhs, op, int(rhs))
                except ValueError:
                    return Comparison(lhs, op, rhs, rhs_is_attr=True)
        self.error(f"no comparison operator in {spec!r}")


def parse_plan(text: str) -> Plan:
    return _PlanParser(text).parse()


def validate_plan(plan: Plan, schemas: Mapping[str, Sequence[str]]) -> None:
    """Raise PlanError if any reference in the tree fails to resolve."""
    try:
        out_attrs(plan, schemas)
    except SchemaError as exc:
        raise PlanError(str(exc)) from exc
