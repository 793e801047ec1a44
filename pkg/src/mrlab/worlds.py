"""Possible-worlds semantics and the brute-force ground truth.

A probabilistic database with n tuples has 2^n worlds; the marginal oracle
evaluates a query per world with plain nested loops (no MapReduce, no plan
machinery) so it stays independent of the code paths it judges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping, Optional

from .cq import ConjunctiveQuery
from .plans import Join, Plan, Project, Scan, Select
from .relation import ProbTuple, Relation, Schema
from .relops import op_join, op_project, op_select

DEFAULT_WORLD_LIMIT = 20


class WorldLimitError(Exception):
    """Database exceeds the exact world-enumeration limit."""


@dataclass(frozen=True)
class PossibleWorld:
    present: frozenset[str]
    prob: float


@dataclass
class ProbDatabase:
    relations: dict[str, Relation] = field(default_factory=dict)
    events: dict[str, float] = field(default_factory=dict)

    def add_relation(self, rel: Relation) -> None:
        """Register a base relation; every tuple must carry one event literal."""
        seen = []
        for t in rel.tuples:
            if t.event is None or len(t.event.conjuncts) != 1:
                raise ValueError(f"base tuple in {rel.name} lacks a single "
                                 f"event literal")
            (conj,) = t.event.conjuncts
            if len(conj) != 1:
                raise ValueError(f"base tuple in {rel.name} must carry exactly "
                                 f"one literal, got {sorted(conj)}")
            (lit,) = conj
            if lit in self.events:
                raise ValueError(f"duplicate event literal {lit!r}")
            self.events[lit] = t.prob
            seen.append(lit)
        self.relations[rel.name] = rel

    def schemas(self) -> dict[str, tuple[str, ...]]:
        return {name: rel.attributes for name, rel in self.relations.items()}

    def tuple_count(self) -> int:
        return sum(len(r) for r in self.relations.values())

    def literal_of(self, rel_name: str, index: int) -> str:
        t = self.relations[rel_name].tuples[index]
        (conj,) = t.event.conjuncts
        (lit,) = conj
        return lit


def enumerate_worlds(db: ProbDatabase,
                     limit: int = DEFAULT_WORLD_LIMIT) -> Iterator[PossibleWorld]:
    """All 2^n worlds with their probabilities; refuses n > limit."""
    n = db.tuple_count()
    if n > limit:
        raise WorldLimitError(
            f"database has {n} tuples, world enumeration limit is {limit}")
    literals = [db.literal_of(name, i)
                for name, rel in db.relations.items()
                for i in range(len(rel))]
    for mask in range(1 << n):
        prob = 1.0
        present = []
        for i, lit in enumerate(literals):
            if mask >> i & 1:
                prob *= db.events[lit]
                present.append(lit)
            else:
                prob *= 1.0 - db.events[lit]
        yield PossibleWorld(frozenset(present), prob)


def _answer_in_world(db: ProbDatabase, q: ConjunctiveQuery,
                     present: frozenset[str]) -> set[tuple]:
    """Set-semantics answer of q in one world, by naive nested loops."""
    world_rels = []
    for rel_name in q.rels:
        rel = db.relations[rel_name]
        world_rels.append([
            (rel_name, t.values) for i, t in enumerate(rel.tuples)
            if db.literal_of(rel_name, i) in present
        ])

    def qval(row_map, qattr):
        rel, attr = qattr.split(".", 1)
        return row_map[rel][attr]

    answers = set()
    for combo in product(*world_rels):
        row_map = {rel: values for rel, values in combo}
        if any(qval(row_map, l) != qval(row_map, r) for l, r in q.join_preds):
            continue
        if any(qval(row_map, a) != c for a, c in q.sel_preds):
            continue
        answers.add(tuple(qval(row_map, a) for a in q.head))
    return answers


def oracle_marginals(db: ProbDatabase, q: ConjunctiveQuery,
                     limit: int = DEFAULT_WORLD_LIMIT) -> Relation:
    """Marginal probability of every possible answer tuple, by enumerating
    all possible worlds; sorted by probability descending."""
    marginals: dict[tuple, float] = {}
    for world in enumerate_worlds(db, limit):
        for answer in _answer_in_world(db, q, world.present):
            marginals[answer] = marginals.get(answer, 0.0) + world.prob

    head_names = tuple(a.split(".", 1)[1] for a in q.head)
    schema = Schema("oracle", head_names)
    tuples = [ProbTuple(dict(zip(head_names, vals)), prob)
              for vals, prob in sorted(marginals.items(),
                                       key=lambda kv: (-kv[1], kv[0]))]
    return Relation(schema, tuples)


def _strip_events(rel: Relation) -> Relation:
    stripped = [ProbTuple(dict(t.values), t.prob, None) for t in rel.tuples]
    return Relation(rel.schema, stripped)


def _eval(db: ProbDatabase, plan: Plan, provenance: bool,
          cost_log: Optional[list]) -> Relation:
    if isinstance(plan, Scan):
        if plan.rel not in db.relations:
            from .plans import PlanError
            raise PlanError(f"plan scans unknown relation {plan.rel!r}")
        rel = db.relations[plan.rel]
        return rel if provenance else _strip_events(rel)
    if isinstance(plan, Select):
        child = _eval(db, plan.child, provenance, cost_log)
        return op_select(child, plan.cond, cost_log=cost_log)
    if isinstance(plan, Project):
        child = _eval(db, plan.child, provenance, cost_log)
        return op_project(child, plan.attrs, cost_log=cost_log)
    if isinstance(plan, Join):
        left = _eval(db, plan.left, provenance, cost_log)
        right = _eval(db, plan.right, provenance, cost_log)
        return op_join(left, right, plan.on, cost_log=cost_log)
    from .plans import PlanError
    raise PlanError(f"not a plan node: {plan!r}")


def eval_plan_extensional(db: ProbDatabase, plan: Plan,
                          cost_log: Optional[list] = None) -> Relation:
    """Run the plan with operator-local probability rules.

    Matches oracle_marginals exactly when the plan is safe; an unsafe plan
    produces the right tuples with wrong probabilities.
    """
    return _eval(db, plan, provenance=False, cost_log=cost_log)


def eval_plan_with_provenance(db: ProbDatabase, plan: Plan,
                              cost_log: Optional[list] = None) -> Relation:
    """Run the plan tracking lineage: selections pass formulas through,
    joins AND, projections OR.  The per-tuple probabilities it returns are
    the plan's extensional values; exact answers come from
    formula_probability over each tuple's lineage."""
    return _eval(db, plan, provenance=True, cost_log=cost_log)
