"""The five relational operators as single MapReduce jobs.

Selection is map-only; projection merges duplicates in the reducer with
p = 1 - prod(1 - p_i) and ORed lineage; join multiplies probabilities and
ANDs lineage.  Select-project and select-join fuse the selection into the
mapper of the downstream job, which is where the communication savings the
fused patterns exist for come from.

Every operator runs exactly one engine job; pass cost_log=[] to collect the
per-job CostCounters (measured cost = map input + reduce input records).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import engine
from .provenance import ProvenanceFormula
from .relation import ProbTuple, Relation, Schema, SchemaError, Scalar

_OPS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Comparison:
    """attr <op> (attr | constant); integers compare numerically, strings
    lexicographically, and ordering across the two types is rejected."""

    attr: str
    op: str
    rhs: Scalar
    rhs_is_attr: bool = False

    def __post_init__(self):
        if self.op not in _OPS:
            raise SchemaError(f"unsupported comparison operator {self.op!r}")

    def holds(self, values: dict[str, Scalar]) -> bool:
        left = values[self.attr]
        right = values[self.rhs] if self.rhs_is_attr else self.rhs
        if type(left) is not type(right):
            if self.op == "=":
                return False
            if self.op == "!=":
                return True
            raise SchemaError(
                f"cannot order {left!r} against {right!r} in {self}")
        return _OPS[self.op](left, right)

    def check_schema(self, schema: Schema) -> None:
        schema.check_has(self.attr)
        if self.rhs_is_attr:
            schema.check_has(self.rhs)

    def __str__(self) -> str:
        rhs = str(self.rhs) if self.rhs_is_attr or isinstance(self.rhs, int) \
            else f"'{self.rhs}'"
        return f"{self.attr}{self.op}{rhs}"


def _payload(t: ProbTuple, attrs: Sequence[str]):
    return (t.key(attrs), t.prob, t.event)


def _records(rel: Relation) -> list[engine.KeyValue]:
    return [(i, _payload(t, rel.attributes)) for i, t in enumerate(rel.tuples)]


def _to_tuples(attrs: Sequence[str], payloads) -> list[ProbTuple]:
    return [ProbTuple(dict(zip(attrs, vals)), prob, event)
            for vals, prob, event in payloads]


def _run(spec: engine.JobSpec, rel_records, split_size, workers, cost_log):
    splits = engine.make_splits(rel_records, split_size)
    result = engine.run_job(spec, splits, workers=workers)
    if cost_log is not None:
        cost_log.append(result.counters)
    return result


def _merge_group(values):
    """Duplicate elimination for projection: OR events, union probability."""
    miss = 1.0
    event = None
    for prob, ev in values:
        miss *= 1.0 - prob
        if ev is not None:
            event = ev if event is None else event.or_(ev)
    return 1.0 - miss, event


def op_select(rel: Relation, cond: Comparison, *, split_size: int = 2,
              workers: int = 1, cost_log: Optional[list] = None) -> Relation:
    """Map-only filter; probabilities and lineage pass through unchanged."""
    cond.check_schema(rel.schema)

    def mapper(record, _ctx):
        i, (vals, prob, event) = record
        if cond.holds(dict(zip(rel.attributes, vals))):
            yield i, (vals, prob, event)

    result = _run(engine.JobSpec(mapper=mapper), _records(rel),
                  split_size, workers, cost_log)
    out = _to_tuples(rel.attributes, (v for _, v in result.output))
    return Relation(Schema(f"select({rel.name})", rel.attributes), out)


def op_project(rel: Relation, attrs: Sequence[str], *, split_size: int = 2,
               workers: int = 1, num_reducers: int = 2,
               cost_log: Optional[list] = None) -> Relation:
    """Project and merge duplicates (1 - prod(1-p), OR of lineage)."""
    attrs = tuple(attrs)
    if not attrs:
        raise SchemaError("projection needs at least one attribute")
    for a in attrs:
        rel.schema.check_has(a)

    def mapper(record, _ctx):
        _, (vals, prob, event) = record
        row = dict(zip(rel.attributes, vals))
        yield tuple(row[a] for a in attrs), (prob, event)

    def reducer(key, values, _ctx):
        prob, event = _merge_group(values)
        yield key, (prob, event)

    result = _run(engine.JobSpec(mapper=mapper, reducer=reducer,
                                 num_reducers=num_reducers),
                  _records(rel), split_size, workers, cost_log)
    out = [ProbTuple(dict(zip(attrs, key)), prob, event)
           for key, (prob, event) in result.output]
    return Relation(Schema(f"project({rel.name})", attrs), out)


def _join_attrs(left: Relation, right: Relation,
                on: Optional[Sequence[tuple[str, str]]]):
    if on is None:  # natural join on shared attribute names
        shared = [a for a in left.attributes if a in right.attributes]
        on = [(a, a) for a in shared]
    on = list(on)
    for l, r in on:
        left.schema.check_has(l)
        right.schema.check_has(r)
    dropped = {r for l, r in on if l == r}
    out_attrs = left.attributes + tuple(a for a in right.attributes
                                        if a not in dropped)
    if len(set(out_attrs)) != len(out_attrs):
        raise SchemaError(f"join of {left.name} and {right.name} would "
                          f"duplicate attributes {out_attrs}")
    return on, out_attrs


def _combine(lrow, rrow, left, right, out_attrs):
    lvals, lprob, lev = lrow
    rvals, rprob, rev = rrow
    row = dict(zip(left.attributes, lvals))
    row.update(zip(right.attributes, rvals))
    event = lev.and_(rev) if lev is not None and rev is not None else None
    return tuple(row[a] for a in out_attrs), lprob * rprob, event


def op_join(left: Relation, right: Relation,
            on: Optional[Sequence[tuple[str, str]]] = None, *,
            split_size: int = 2, workers: int = 1, num_reducers: int = 2,
            cost_log: Optional[list] = None) -> Relation:
    """Equi-join (natural when `on` omitted, cross product when `on` is []).

    Mappers tag each tuple with its side; the reducer pairs the two sides.
    Output probability is the product, lineage the conjunction.
    """
    on, out_attrs = _join_attrs(left, right, on)
    lkeys = [l for l, _ in on]
    rkeys = [r for _, r in on]

    def mapper(record, _ctx):
        side, (vals, prob, event) = record
        attrs, keys = (left.attributes, lkeys) if side == 0 else (right.attributes, rkeys)
        row = dict(zip(attrs, vals))
        yield tuple(row[a] for a in keys), (side, (vals, prob, event))

    def reducer(key, values, _ctx):
        lrows = [v for side, v in values if side == 0]
        rrows = [v for side, v in values if side == 1]
        for lrow in lrows:
            for rrow in rrows:
                yield key, _combine(lrow, rrow, left, right, out_attrs)

    records = [(0, _payload(t, left.attributes)) for t in left.tuples]
    records += [(1, _payload(t, right.attributes)) for t in right.tuples]
    result = _run(engine.JobSpec(mapper=mapper, reducer=reducer,
                                 num_reducers=num_reducers),
                  records, split_size, workers, cost_log)
    out = _to_tuples(out_attrs, (v for _, v in result.output))
    return Relation(Schema(f"join({left.name},{right.name})", out_attrs), out)


def op_select_project(rel: Relation, cond: Comparison, attrs: Sequence[str], *,
                      split_size: int = 2, workers: int = 1,
                      num_reducers: int = 2,
                      cost_log: Optional[list] = None) -> Relation:
    """project(select(rel)) in one job: the mapper filters before emitting."""
    cond.check_schema(rel.schema)
    attrs = tuple(attrs)
    if not attrs:
        raise SchemaError("projection needs at least one attribute")
    for a in attrs:
        rel.schema.check_has(a)

    def mapper(record, _ctx):
        _, (vals, prob, event) = record
        row = dict(zip(rel.attributes, vals))
        if cond.holds(row):
            yield tuple(row[a] for a in attrs), (prob, event)

    def reducer(key, values, _ctx):
        prob, event = _merge_group(values)
        yield key, (prob, event)

    result = _run(engine.JobSpec(mapper=mapper, reducer=reducer,
                                 num_reducers=num_reducers),
                  _records(rel), split_size, workers, cost_log)
    out = [ProbTuple(dict(zip(attrs, key)), prob, event)
           for key, (prob, event) in result.output]
    return Relation(Schema(f"select_project({rel.name})", attrs), out)


def op_select_join(left: Relation, right: Relation, cond: Comparison,
                   on: Optional[Sequence[tuple[str, str]]] = None, *,
                   split_size: int = 2, workers: int = 1, num_reducers: int = 2,
                   cost_log: Optional[list] = None) -> Relation:
    """select(left) joined with right in one job; the left-side mapper
    filters before emitting, the right side maps as in a plain join."""
    cond.check_schema(left.schema)
    on, out_attrs = _join_attrs(left, right, on)
    lkeys = [l for l, _ in on]
    rkeys = [r for _, r in on]

    def mapper(record, _ctx):
        side, (vals, prob, event) = record
        if side == 0:
            row = dict(zip(left.attributes, vals))
            if not cond.holds(row):
                return
            yield tuple(row[a] for a in lkeys), (0, (vals, prob, event))
        else:
            row = dict(zip(right.attributes, vals))
            yield tuple(row[a] for a in rkeys), (1, (vals, prob, event))

    def reducer(key, values, _ctx):
        lrows = [v for side, v in values if side == 0]
        rrows = [v for side, v in values if side == 1]
        for lrow in lrows:
            for rrow in rrows:
                yield key, _combine(lrow, rrow, left, right, out_attrs)

    records = [(0, _payload(t, left.attributes)) for t in left.tuples]
    records += [(1, _payload(t, right.attributes)) for t in right.tuples]
    result = _run(engine.JobSpec(mapper=mapper, reducer=reducer,
                                 num_reducers=num_reducers),
                  records, split_size, workers, cost_log)
    out = _to_tuples(out_attrs, (v for _, v in result.output))
    return Relation(Schema(f"select_join({left.name},{right.name})", out_attrs), out)
