"""Relations with a probability and an event-lineage column per tuple.

TSV interchange: first line holds tab-separated attribute names, an optional
trailing `prob` column holds existence probabilities, and event ids are
auto-assigned `<relname>:<1-based row>`.  Columns where every cell parses as
an integer are typed as integers; everything else stays a string.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .provenance import ProvenanceFormula

Scalar = int | str


class SchemaError(Exception):
    """Unknown/duplicate attribute or malformed relation data."""


class CatalogMissError(Exception):
    """A required T/V statistic is absent from the catalog."""


@dataclass(frozen=True)
class Schema:
    relation_name: str
    attributes: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaError(f"duplicate attribute in {self.relation_name}: "
                              f"{self.attributes}")

    def check_has(self, attr: str) -> None:
        if attr not in self.attributes:
            raise SchemaError(f"{self.relation_name} has no attribute {attr!r}")


@dataclass
class ProbTuple:
    values: dict[str, Scalar]
    prob: float = 1.0
    event: Optional[ProvenanceFormula] = None

    def __post_init__(self):
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"probability out of range: {self.prob}")

    def key(self, attrs: Sequence[str]) -> tuple[Scalar, ...]:
        return tuple(self.values[a] for a in attrs)


@dataclass
class Relation:
    schema: Schema
    tuples: list[ProbTuple] = field(default_factory=list)

    def __post_init__(self):
        for t in self.tuples:
            if set(t.values) != set(self.schema.attributes):
                raise SchemaError(
                    f"tuple {t.values} does not conform to schema "
                    f"{self.schema.attributes}")

    @property
    def name(self) -> str:
        return self.schema.relation_name

    @property
    def attributes(self) -> tuple[str, ...]:
        return self.schema.attributes

    def __len__(self) -> int:
        return len(self.tuples)

    def rows(self) -> list[tuple[Scalar, ...]]:
        return [t.key(self.attributes) for t in self.tuples]


def relation_from_rows(name: str, attributes: Sequence[str],
                       rows: Iterable[Sequence[Scalar]],
                       probs: Optional[Sequence[float]] = None,
                       events: Optional[Sequence[str]] = None) -> Relation:
    """Build a base relation; each tuple gets a single-literal lineage."""
    schema = Schema(name, tuple(attributes))
    rows = list(rows)
    if probs is None:
        probs = [1.0] * len(rows)
    if events is None:
        events = [f"{name}:{i + 1}" for i in range(len(rows))]
    tuples = [
        ProbTuple(dict(zip(schema.attributes, row)), prob,
                  ProvenanceFormula.literal(event))
        for row, prob, event in zip(rows, probs, events)
    ]
    return Relation(schema, tuples)


def _type_columns(header: list[str], cells: list[list[str]]) -> list[list[Scalar]]:
    typed: list[list[Scalar]] = [list(row) for row in cells]
    for col in range(len(header)):
        try:
            parsed = [int(row[col]) for row in cells]
        except ValueError:
            continue
        for i, v in enumerate(parsed):
            typed[i][col] = v
    return typed


def load_relation_tsv(path: str | Path, name: Optional[str] = None) -> Relation:
    """Read a relation from TSV; see the module docstring for the format."""
    path = Path(path)
    name = name or path.stem
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty relation file")
    header = lines[0].split("\t")
    has_prob = bool(header) and header[-1] == "prob"
    attrs = header[:-1] if has_prob else header

    cells, probs = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != len(header):
            raise SchemaError(f"{path}:{lineno}: expected {len(header)} columns, "
                              f"got {len(parts)}")
        if has_prob:
            probs.append(float(parts[-1]))
            cells.append(parts[:-1])
        else:
            probs.append(1.0)
            cells.append(parts)

    return relation_from_rows(name, attrs, _type_columns(attrs, cells), probs)


def dump_relation_tsv(rel: Relation, with_prob: bool = True) -> str:
    header = list(rel.attributes) + (["prob"] if with_prob else [])
    out = ["\t".join(header)]
    for t in rel.tuples:
        row = [str(t.values[a]) for a in rel.attributes]
        if with_prob:
            row.append(repr(t.prob))
        out.append("\t".join(row))
    return "\n".join(out) + "\n"


@dataclass
class Catalog:
    """T(R) tuple counts and V(R, attrs) distinct-value counts.

    File format: lines `T <rel> <count>`, `V <rel> <attr[,attr...]> <count>`
    and `FD <rel.attr[,...]> <rel.attr[,...]>` for user-supplied base
    functional dependencies.
    """

    t: dict[str, float] = field(default_factory=dict)
    v: dict[tuple[str, tuple[str, ...]], float] = field(default_factory=dict)
    base_fds: list[tuple[frozenset[str], frozenset[str]]] = field(default_factory=list)

    def tuples(self, rel: str) -> float:
        if rel not in self.t:
            raise CatalogMissError(f"no T({rel}) statistic in catalog")
        return self.t[rel]

    def values(self, rel: str, attrs: Sequence[str]) -> Optional[float]:
        """V(rel, attrs) if recorded, else None (callers approximate)."""
        return self.v.get((rel, tuple(sorted(attrs))))

    def set_t(self, rel: str, count: float) -> None:
        self.t[rel] = count

    def set_v(self, rel: str, attrs: Sequence[str], count: float) -> None:
        self.v[(rel, tuple(sorted(attrs)))] = count

    @classmethod
    def from_relations(cls, relations: Mapping[str, Relation]) -> "Catalog":
        """Exact statistics measured from materialized relations."""
        cat = cls()
        for name, rel in relations.items():
            cat.set_t(name, len(rel))
            for a in rel.attributes:
                cat.set_v(name, [a], len({t.values[a] for t in rel.tuples}))
            cat.set_v(name, rel.attributes,
                      len({t.key(rel.attributes) for t in rel.tuples}))
        return cat


def load_catalog(path: str | Path) -> Catalog:
    cat = Catalog()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind == "T" and len(parts) == 3:
            cat.set_t(parts[1], float(parts[2]))
        elif kind == "V" and len(parts) == 4:
            cat.set_v(parts[1], parts[2].split(","), float(parts[3]))
        elif kind == "FD" and len(parts) == 3:
            cat.base_fds.append((frozenset(parts[1].split(",")),
                                 frozenset(parts[2].split(","))))
        else:
            raise SchemaError(f"{path}:{lineno}: bad catalog line {line!r}")
    return cat
