"""Explicit grounding against a sorted universe.

Variables draw their sort from their leading letters (digits stripped,
lowercased): ``V1`` and ``V2`` share sort ``v``, ``DX`` has sort ``dx``.
The time variable ``t`` is an ordinary integer sort.  Grounding replaces
every variable with every constant of its sort and partially evaluates
comparisons: true ones are dropped from bodies, false ones delete the
instance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

from .errors import EngineError, UniverseError
from .syntax import (
    Atom,
    ChoiceElement,
    ChoiceRule,
    Cmp,
    Not,
    Program,
    Rule,
    Var,
    WeakConstraint,
    is_ground_atom,
    literal_vars,
    subst_atom,
    subst_term,
    term_vars,
)

_SORT_RE = re.compile(r"^([A-Za-z]+?)\d*$")


def sort_of_variable(name: str) -> str:
    match = _SORT_RE.match(name)
    if match is None:
        raise UniverseError(f"cannot infer a sort for variable {name!r}")
    return match.group(1).lower()


@dataclass(frozen=True)
class Universe:
    """Constant domains per sort, plus named integer constants."""

    sorts: Mapping[str, Sequence] = field(default_factory=dict)
    consts: Mapping[str, int] = field(default_factory=dict)

    def domain_of(self, variable: str) -> Sequence:
        sort = sort_of_variable(variable)
        domain = self.sorts.get(sort)
        if not domain:
            raise UniverseError(
                f"sort {sort!r} (variable {variable!r}) has no constants"
            )
        return domain

    def resolve_const(self, term) -> int:
        if isinstance(term, int):
            return term
        name = term.name if isinstance(term, Var) else term
        if name in self.consts:
            return self.consts[name]
        raise UniverseError(f"named constant {name!r} is not defined")


def _assignments(variables: tuple, universe: Universe):
    domains = [universe.domain_of(v) for v in variables]
    for combo in product(*domains):
        yield dict(zip(variables, combo))


def _fold_body(body: tuple, env: dict):
    """Substitute and partially evaluate; None when a comparison fails."""
    folded = []
    for lit in body:
        if isinstance(lit, Atom):
            folded.append(subst_atom(lit, env))
        elif isinstance(lit, Not):
            folded.append(Not(subst_atom(lit.atom, env)))
        else:
            lhs = subst_term(lit.lhs, env)
            rhs = subst_term(lit.rhs, env)
            if isinstance(lhs, int) and isinstance(rhs, int):
                if not Cmp.holds(lhs, lit.op, rhs):
                    return None
            else:
                folded.append(Cmp(lhs, lit.op, rhs))
    return tuple(folded)


def ground(program: Program, universe: Universe) -> Program:
    """Instantiate every statement over the universe's sorts."""
    out = Program(facts=list(program.facts))
    for rule in program.rules:
        variables = tuple(dict.fromkeys(
            v for lit in (rule.head, *rule.body) for v in literal_vars(lit)
        ))
        for env in _assignments(variables, universe):
            body = _fold_body(rule.body, env)
            if body is None:
                continue
            head = subst_atom(rule.head, env)
            if not is_ground_atom(head):
                raise EngineError(f"ungrounded head {head!r}")
            if body:
                out.rules.append(Rule(head, body))
            else:
                out.facts.append(head)
    for choice in program.choices:
        elements = []
        for element in choice.elements:
            variables = tuple(dict.fromkeys(
                v
                for part in (element.atom, *element.condition)
                for v in literal_vars(part)
            ))
            for env in _assignments(variables, universe):
                condition = _fold_body(element.condition, env)
                if condition is None:
                    continue
                elements.append(
                    ChoiceElement(subst_atom(element.atom, env), condition)
                )
        upper = choice.upper
        if upper is not None:
            upper = universe.resolve_const(upper)
        out.choices.append(ChoiceRule(choice.lower, tuple(elements), upper))
    for weak in program.weaks:
        variables = tuple(dict.fromkeys(
            list(v for lit in weak.body for v in literal_vars(lit))
            + list(term_vars(weak.weight))
            + [v for disc in weak.discriminators for v in term_vars(disc)]
        ))
        for env in _assignments(variables, universe):
            body = _fold_body(weak.body, env)
            if body is None:
                continue
            out.weaks.append(
                WeakConstraint(
                    body,
                    subst_term(weak.weight, env),
                    weak.priority,
                    tuple(subst_term(d, env) for d in weak.discriminators),
                )
            )
    return out
