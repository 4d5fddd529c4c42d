"""Stratified evaluation by per-stratum least fixpoint.

Rules are matched against the fact store by unification joins, so safe
programs evaluate directly over their active domain; explicitly grounded
programs are just the degenerate case.  Fact iteration uses insertion
order throughout to keep evaluation reproducible.
"""

from __future__ import annotations

from .errors import EngineError
from .stratify import stratify
from .syntax import (
    Arith,
    Atom,
    Cmp,
    Compound,
    Not,
    Program,
    Var,
    is_ground_atom,
    literal_vars,
    rule_text,
    subst_atom,
)

_MISSING = object()


def _bind(pat, val, env: dict, trail: list) -> bool:
    tpat = type(pat)
    if tpat is str or tpat is int:
        return pat == val
    if tpat is Var:
        cur = env.get(pat.name, _MISSING)
        if cur is _MISSING:
            env[pat.name] = val
            trail.append(pat.name)
            return True
        return cur == val
    if tpat is Arith:
        if type(val) is not int:
            return False
        cur = env.get(pat.var, _MISSING)
        if cur is _MISSING:
            env[pat.var] = pat.coeff * (val - pat.offset)
            trail.append(pat.var)
            return True
        return pat.coeff * cur + pat.offset == val
    if tpat is Compound:
        if (
            type(val) is not Compound
            or val.functor != pat.functor
            or len(val.args) != len(pat.args)
        ):
            return False
        for p, v in zip(pat.args, val.args):
            if not _bind(p, v, env, trail):
                return False
        return True
    raise EngineError(f"cannot match term {pat!r}")


def _match_atom(atom: Atom, fact_args: tuple, env: dict, trail: list) -> bool:
    if len(atom.args) != len(fact_args):
        return False
    for pat, val in zip(atom.args, fact_args):
        if not _bind(pat, val, env, trail):
            return False
    return True


def _cmp_value(term, env: dict) -> int:
    tterm = type(term)
    if tterm is int:
        return term
    if tterm is Var:
        val = env.get(term.name, _MISSING)
    elif tterm is Arith:
        val = env.get(term.var, _MISSING)
        if val is not _MISSING and type(val) is int:
            return term.coeff * val + term.offset
    else:
        val = term
    if val is _MISSING:
        raise EngineError(f"comparison over unbound variable in {term!r}")
    if type(val) is not int:
        raise EngineError(f"comparison over non-integer value {val!r}")
    return val


def _schedule(body: tuple) -> tuple:
    """Order literals so tests run as soon as their variables are bound."""
    pending = list(body)
    ordered: list = []
    bound: set = set()
    while pending:
        placed = False
        for lit in pending:
            if type(lit) is Atom:
                continue
            if all(name in bound for name in literal_vars(lit)):
                ordered.append(lit)
                pending.remove(lit)
                placed = True
                break
        if placed:
            continue
        for lit in pending:
            if type(lit) is Atom:
                ordered.append(lit)
                pending.remove(lit)
                bound.update(literal_vars(lit))
                placed = True
                break
        if not placed:
            raise EngineError(
                f"literals {pending!r} reference unbound variables"
            )
    return tuple(ordered)


def _solve(schedule: tuple, idx: int, env: dict, trail: list, db: dict):
    if idx == len(schedule):
        yield env
        return
    lit = schedule[idx]
    tlit = type(lit)
    if tlit is Atom:
        facts = db.get(lit.pred)
        if not facts:
            return
        for fact_args in tuple(facts):
            mark = len(trail)
            if _match_atom(lit, fact_args, env, trail):
                yield from _solve(schedule, idx + 1, env, trail, db)
            while len(trail) > mark:
                del env[trail.pop()]
    elif tlit is Cmp:
        if Cmp.holds(_cmp_value(lit.lhs, env), lit.op, _cmp_value(lit.rhs, env)):
            yield from _solve(schedule, idx + 1, env, trail, db)
    else:
        atom = subst_atom(lit.atom, env)
        if not is_ground_atom(atom):
            raise EngineError(f"negated atom {atom!r} not ground at evaluation")
        facts = db.get(atom.pred)
        if facts is None or atom.args not in facts:
            yield from _solve(schedule, idx + 1, env, trail, db)


def _as_rules(program) -> tuple:
    if isinstance(program, Program):
        if program.choices or program.weaks:
            raise EngineError(
                "evaluate_stratified handles normal rules only; "
                "use solve_optimal for choice/weak programs"
            )
        return tuple(program.rules), tuple(program.facts)
    return tuple(program), ()


def evaluate_stratified(program, facts=()) -> frozenset:
    """Least fixpoint of a stratified program; returns facts plus derived."""
    rules, own_facts = _as_rules(program)
    db: dict = {}
    for atom in tuple(own_facts) + tuple(facts):
        if not isinstance(atom, Atom) or not is_ground_atom(atom):
            raise EngineError(f"facts must be ground atoms, got {atom!r}")
        db.setdefault(atom.pred, {})[atom.args] = None
    strata = stratify(rules)
    by_stratum: dict = {}
    for rule in rules:
        by_stratum.setdefault(strata[rule.head.pred], []).append(
            (rule, _schedule(rule.body))
        )
    for level in sorted(by_stratum):
        layer = by_stratum[level]
        changed = True
        while changed:
            changed = False
            for rule, schedule in layer:
                for env in _solve(schedule, 0, {}, [], db):
                    head = subst_atom(rule.head, env)
                    if not is_ground_atom(head):
                        raise EngineError(
                            f"derived atom {head!r} not ground in {rule_text(rule)}"
                        )
                    bucket = db.setdefault(head.pred, {})
                    if head.args not in bucket:
                        bucket[head.args] = None
                        changed = True
    return frozenset(
        Atom(pred, args) for pred, bucket in db.items() for args in bucket
    )


def match_body(body: tuple, atoms) -> list:
    """All bindings of a literal sequence against ground atoms.

    Used by choice grounding and weak-constraint scoring; returns a list of
    environment dicts.
    """
    db: dict = {}
    for atom in atoms:
        db.setdefault(atom.pred, {})[atom.args] = None
    return [dict(env) for env in _solve(_schedule(body), 0, {}, [], db)]
