"""Boolean lineage over tuple-existence events, kept in DNF.

Every base tuple owns one event literal; selections pass formulas through,
joins AND them, projections OR them.  Probabilities are computed exactly by
summing the truth table over the formula's own variables, which is what the
provenance control group is for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

DEFAULT_VARIABLE_LIMIT = 24


class FormulaLimitError(Exception):
    """Formula has more variables than the configured exact-evaluation limit."""


@dataclass(frozen=True)
class ProvenanceFormula:
    """Disjunction of conjunctions of positive event literals."""

    conjuncts: frozenset[frozenset[str]]

    def __post_init__(self):
        for c in self.conjuncts:
            if not c and len(self.conjuncts) > 1:
                raise ValueError("empty conjunct only allowed as the lone 'true' term")

    @classmethod
    def literal(cls, event_id: str) -> "ProvenanceFormula":
        return cls(frozenset({frozenset({event_id})}))

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.conjuncts:
            out |= c
        return frozenset(out)

    def or_(self, other: "ProvenanceFormula") -> "ProvenanceFormula":
        return ProvenanceFormula(self.conjuncts | other.conjuncts)

    def and_(self, other: "ProvenanceFormula") -> "ProvenanceFormula":
        return ProvenanceFormula(
            frozenset(a | b for a in self.conjuncts for b in other.conjuncts)
        )

    def __str__(self) -> str:
        parts = sorted("(" + "&".join(sorted(c)) + ")" for c in self.conjuncts)
        return "|".join(parts) if parts else "false"


def or_all(formulas: Iterable[ProvenanceFormula]) -> ProvenanceFormula:
    acc: frozenset[frozenset[str]] = frozenset()
    for f in formulas:
        acc |= f.conjuncts
    return ProvenanceFormula(acc)


def formula_probability(formula: ProvenanceFormula,
                        events: Mapping[str, float],
                        variable_limit: int = DEFAULT_VARIABLE_LIMIT) -> float:
    """Exact probability of a DNF formula under independent events.

    Sums world probabilities over the formula's variables only; refuses
    formulas wider than variable_limit.
    """
    variables = sorted(formula.variables())
    n = len(variables)
    if n > variable_limit:
        raise FormulaLimitError(
            f"formula has {n} variables, exact evaluation limit is {variable_limit}"
        )
    missing = [v for v in variables if v not in events]
    if missing:
        raise KeyError(f"unknown event literals: {missing}")

    index = {v: i for i, v in enumerate(variables)}
    conjunct_masks = [
        sum(1 << index[v] for v in conjunct) for conjunct in formula.conjuncts
    ]
    if not conjunct_masks:
        return 0.0

    total = 0.0
    for world in range(1 << n):
        if not any(mask & world == mask for mask in conjunct_masks):
            continue
        p = 1.0
        for i, v in enumerate(variables):
            p *= events[v] if world >> i & 1 else 1.0 - events[v]
        total += p
    return total
