"""Stratification of normal rules with respect to negation."""

from __future__ import annotations

from .errors import StratificationError
from .syntax import Atom, Not


def stratify(rules, base_preds=()) -> dict:
    """Assign each predicate a stratum; negation may only look down.

    Uses the standard relaxation: a head predicate sits at least as high as
    its positive body predicates and strictly above its negated ones.  A
    stratum exceeding the predicate count certifies a cycle through
    negation.
    """
    strata: dict = {pred: 0 for pred in base_preds}
    deps = []
    for rule in rules:
        strata.setdefault(rule.head.pred, 0)
        for lit in rule.body:
            if isinstance(lit, Atom):
                strata.setdefault(lit.pred, 0)
                deps.append((rule.head.pred, lit.pred, 0))
            elif isinstance(lit, Not):
                strata.setdefault(lit.atom.pred, 0)
                deps.append((rule.head.pred, lit.atom.pred, 1))
    limit = len(strata) + 1
    changed = True
    while changed:
        changed = False
        for head, body, step in deps:
            need = strata[body] + step
            if strata[head] < need:
                if need > limit:
                    raise StratificationError(
                        f"negation cycle through predicate {head!r}"
                    )
                strata[head] = need
                changed = True
    return strata
