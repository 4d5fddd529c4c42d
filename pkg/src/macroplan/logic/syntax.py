"""Syntax objects for the restricted rule language.

Ground terms are plain Python values: symbolic constants are ``str`` and
integers are ``int``.  Variables, offset arithmetic, and depth-1 compound
terms (action terms such as ``move(north)``) get small immutable wrapper
classes so atoms stay cheap to hash and compare.

The designated time variable ``t`` is lowercase but parses as a variable;
it is exempt from the safety check because learned rule heads carry it
dangling (their bodies are written time-free).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

TIME_VAR = "t"


class Var:
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self) -> int:
        return hash(("var", self.name))

    def __repr__(self) -> str:
        return f"Var({self.name})"


class Arith:
    """Linear term ``coeff * var + offset`` with ``coeff`` in {+1, -1}."""

    __slots__ = ("var", "coeff", "offset")

    def __init__(self, var: str, coeff: int, offset: int) -> None:
        if coeff not in (1, -1):
            raise ValueError("coefficient must be +1 or -1")
        self.var = var
        self.coeff = coeff
        self.offset = offset

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Arith)
            and other.var == self.var
            and other.coeff == self.coeff
            and other.offset == self.offset
        )

    def __hash__(self) -> int:
        return hash(("arith", self.var, self.coeff, self.offset))

    def __repr__(self) -> str:
        return f"Arith({term_text(self)})"


class Compound:
    """Depth-1 structured term, e.g. ``move(north)``.  Args hold no nesting."""

    __slots__ = ("functor", "args")

    def __init__(self, functor: str, args: tuple) -> None:
        self.functor = functor
        self.args = args

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Compound)
            and other.functor == self.functor
            and other.args == self.args
        )

    def __hash__(self) -> int:
        return hash(("comp", self.functor, self.args))

    def __repr__(self) -> str:
        return f"Compound({term_text(self)})"


Term = Union[str, int, Var, Arith, Compound]


class Atom:
    __slots__ = ("pred", "args")

    def __init__(self, pred: str, args: tuple = ()) -> None:
        self.pred = pred
        self.args = args

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Atom)
            and other.pred == self.pred
            and other.args == self.args
        )

    def __hash__(self) -> int:
        return hash((self.pred, self.args))

    def __repr__(self) -> str:
        return f"Atom({atom_text(self)})"


class Not:
    __slots__ = ("atom",)

    def __init__(self, atom: Atom) -> None:
        self.atom = atom

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Not) and other.atom == self.atom

    def __hash__(self) -> int:
        return hash(("not", self.atom))

    def __repr__(self) -> str:
        return f"Not({atom_text(self.atom)})"


CMP_OPS = ("<", "<=", ">", ">=", "=", "!=")


class Cmp:
    __slots__ = ("lhs", "op", "rhs")

    def __init__(self, lhs: Term, op: str, rhs: Term) -> None:
        if op not in CMP_OPS:
            raise ValueError(f"unknown comparison operator {op!r}")
        self.lhs = lhs
        self.op = op
        self.rhs = rhs

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Cmp)
            and other.lhs == self.lhs
            and other.op == self.op
            and other.rhs == self.rhs
        )

    def __hash__(self) -> int:
        return hash(("cmp", self.lhs, self.op, self.rhs))

    def __repr__(self) -> str:
        return f"Cmp({literal_text(self)})"

    @staticmethod
    def holds(left: int, op: str, right: int) -> bool:
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "=":
            return left == right
        return left != right


Literal = Union[Atom, Not, Cmp]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple = ()

    def __repr__(self) -> str:
        return f"Rule({rule_text(self)})"


@dataclass(frozen=True)
class ChoiceElement:
    atom: Atom
    condition: tuple = ()


@dataclass(frozen=True)
class ChoiceRule:
    lower: int
    elements: tuple
    upper: Term | None = None


@dataclass(frozen=True)
class WeakConstraint:
    body: tuple
    weight: Term
    priority: int
    discriminators: tuple = ()


@dataclass
class Program:
    """A parsed program: normal rules, facts, and optional optimization parts."""

    rules: list = field(default_factory=list)
    facts: list = field(default_factory=list)
    choices: list = field(default_factory=list)
    weaks: list = field(default_factory=list)

    def __add__(self, other: "Program") -> "Program":
        return Program(
            rules=self.rules + other.rules,
            facts=self.facts + other.facts,
            choices=self.choices + other.choices,
            weaks=self.weaks + other.weaks,
        )


def term_vars(term: Term) -> Iterator[str]:
    if isinstance(term, Var):
        yield term.name
    elif isinstance(term, Arith):
        yield term.var
    elif isinstance(term, Compound):
        for arg in term.args:
            yield from term_vars(arg)


def atom_vars(atom: Atom) -> Iterator[str]:
    for arg in atom.args:
        yield from term_vars(arg)


def literal_vars(literal: Literal) -> Iterator[str]:
    if isinstance(literal, Atom):
        yield from atom_vars(literal)
    elif isinstance(literal, Not):
        yield from atom_vars(literal.atom)
    else:
        yield from term_vars(literal.lhs)
        yield from term_vars(literal.rhs)


def is_ground_term(term: Term) -> bool:
    if isinstance(term, (Var, Arith)):
        return False
    if isinstance(term, Compound):
        return all(is_ground_term(a) for a in term.args)
    return True


def is_ground_atom(atom: Atom) -> bool:
    return all(is_ground_term(a) for a in atom.args)


def subst_term(term: Term, env: dict) -> Term:
    if isinstance(term, Var):
        return env.get(term.name, term)
    if isinstance(term, Arith):
        val = env.get(term.var)
        if val is None:
            return term
        return term.coeff * val + term.offset
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(subst_term(a, env) for a in term.args))
    return term


def subst_atom(atom: Atom, env: dict) -> Atom:
    return Atom(atom.pred, tuple(subst_term(a, env) for a in atom.args))


def subst_literal(literal: Literal, env: dict) -> Literal:
    if isinstance(literal, Atom):
        return subst_atom(literal, env)
    if isinstance(literal, Not):
        return Not(subst_atom(literal.atom, env))
    return Cmp(subst_term(literal.lhs, env), literal.op, subst_term(literal.rhs, env))


def subst_rule(rule: Rule, env: dict) -> Rule:
    return Rule(
        subst_atom(rule.head, env),
        tuple(subst_literal(lit, env) for lit in rule.body),
    )


def term_text(term: Term) -> str:
    if isinstance(term, str):
        return term
    if isinstance(term, int):
        return str(term)
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Arith):
        sign = "" if term.coeff == 1 else "-"
        if term.offset == 0:
            return f"{sign}{term.var}"
        op = "+" if term.offset > 0 else "-"
        return f"{sign}{term.var}{op}{abs(term.offset)}"
    if isinstance(term, Compound):
        inner = ",".join(term_text(a) for a in term.args)
        return f"{term.functor}({inner})"
    raise TypeError(f"not a term: {term!r}")


def atom_text(atom: Atom) -> str:
    if not atom.args:
        return atom.pred
    return f"{atom.pred}({','.join(term_text(a) for a in atom.args)})"


def literal_text(literal: Literal) -> str:
    if isinstance(literal, Atom):
        return atom_text(literal)
    if isinstance(literal, Not):
        return f"not {atom_text(literal.atom)}"
    return f"{term_text(literal.lhs)} {literal.op} {term_text(literal.rhs)}"


def rule_text(rule: Rule) -> str:
    if not rule.body:
        return f"{atom_text(rule.head)}."
    body = ", ".join(literal_text(lit) for lit in rule.body)
    return f"{atom_text(rule.head)} :- {body}."


def atom_to_term(atom: Atom) -> Term:
    """An atom reused as a term, e.g. the action atom inside ``init(...)``."""
    if not atom.args:
        return atom.pred
    return Compound(atom.pred, atom.args)


def term_to_atom(term: Term) -> Atom:
    if isinstance(term, str):
        return Atom(term)
    if isinstance(term, Compound):
        return Atom(term.functor, term.args)
    raise TypeError(f"term does not name an atom: {term!r}")


def positive_vars(body: Iterable) -> set:
    """Variables bound by positive body atoms (through arithmetic too)."""
    bound: set = set()
    for lit in body:
        if isinstance(lit, Atom):
            bound.update(atom_vars(lit))
    return bound
