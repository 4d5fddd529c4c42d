"""Optimal answer sets for programs with one choice rule and weak constraints.

Exhaustive by design: every subset of the ground choice atoms within the
cardinality bounds is checked, so the candidate pool is capped at 20.
Penalties follow answer-set convention: distinct ground ``[w@p, d...]``
tuples per level, levels compared from the highest priority down, lower
summed weight better, final ties broken by the lexicographically least
atom set.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import EngineError, TooManyChoices, Unsatisfiable, UniverseError
from .evaluate import evaluate_stratified, match_body
from .ground import Universe
from .syntax import (
    Atom,
    Program,
    atom_text,
    subst_atom,
    subst_term,
)

MAX_CHOICE_ATOMS = 20


@dataclass(frozen=True)
class OptimalResult:
    model: frozenset
    penalty: tuple  # ((level, cost), ...) sorted by level descending


def _candidate_atoms(choice, base_model) -> list:
    seen: dict = {}
    for element in choice.elements:
        for env in match_body(element.condition, base_model):
            atom = subst_atom(element.atom, env)
            seen.setdefault(atom, None)
    ordered = sorted(seen, key=atom_text)
    if len(ordered) > MAX_CHOICE_ATOMS:
        raise TooManyChoices(
            f"{len(ordered)} ground choice atoms exceed the cap of {MAX_CHOICE_ATOMS}"
        )
    return ordered


def _penalty(weaks, model, levels: tuple) -> tuple:
    tuples: set = set()
    for weak in weaks:
        for env in match_body(weak.body, model):
            weight = subst_term(weak.weight, env)
            if not isinstance(weight, int):
                raise EngineError(f"weak-constraint weight {weight!r} not an integer")
            discs = tuple(subst_term(d, env) for d in weak.discriminators)
            tuples.add((weak.priority, weight, discs))
    sums = {level: 0 for level in levels}
    for level, weight, _ in tuples:
        sums[level] += weight
    return tuple((level, sums[level]) for level in levels)


def solve_optimal(program: Program, facts=(), universe: Universe | None = None) -> OptimalResult:
    """Best answer set of a ground-instantiable choice + weak program."""
    if len(program.choices) != 1:
        raise EngineError(
            f"solve_optimal needs exactly one choice rule, got {len(program.choices)}"
        )
    choice = program.choices[0]
    normal = Program(rules=list(program.rules), facts=list(program.facts))
    base_model = evaluate_stratified(normal, facts)
    candidates = _candidate_atoms(choice, base_model)

    lower = choice.lower
    if choice.upper is None:
        upper = len(candidates)
    elif isinstance(choice.upper, int):
        upper = choice.upper
    else:
        if universe is None:
            raise UniverseError(
                f"choice upper bound {choice.upper!r} needs a universe constant"
            )
        upper = universe.resolve_const(choice.upper)
    upper = min(upper, len(candidates))

    choice_preds = {element.atom.pred for element in choice.elements}
    levels = tuple(sorted({w.priority for w in program.weaks}, reverse=True))

    best = None
    for size in range(max(lower, 0), upper + 1):
        for subset in combinations(candidates, size):
            model = evaluate_stratified(normal, tuple(facts) + subset)
            derived_choice = {a for a in model if a.pred in choice_preds}
            if derived_choice != set(subset):
                continue  # a normal rule re-derived choice atoms: bounds void
            penalty = _penalty(program.weaks, model, levels)
            key = (
                tuple(cost for _, cost in penalty),
                tuple(sorted(atom_text(a) for a in model)),
            )
            if best is None or key < best[0]:
                best = (key, OptimalResult(model, penalty))
    if best is None:
        raise Unsatisfiable("no choice subset within bounds yields an answer set")
    return best[1]
