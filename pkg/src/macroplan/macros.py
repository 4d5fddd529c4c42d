"""Grounding persistent macro-actions from a belief.

A macro for action ``a`` is the longest run the learned start/continue
theory licenses: ``init`` must fire on the belief's feature atoms, then
``contd`` must keep firing while the per-action transition rules rewrite
the features one symbolic step at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .core import ParticleBelief
from .flatconfig import parse_flat
from .logic.evaluate import evaluate_stratified
from .logic.parser import parse_program
from .logic.syntax import TIME_VAR, Atom, Rule, subst_rule, term_to_atom

DEFAULT_L_MAX = 10

_ASSET_DIR = Path(__file__).parent / "assets"


def asset_path(name: str) -> Path:
    return _ASSET_DIR / name


def load_asset_text(name: str) -> str:
    return asset_path(name).read_text()


@dataclass(frozen=True)
class MacroAction:
    """A constant action repeated ``length`` times (length 0 = no macro)."""

    action: int
    length: int

    def steps(self, t: int) -> int:
        if not 0 <= t < self.length:
            raise IndexError(f"macro step {t} outside length {self.length}")
        return self.action

    def __len__(self) -> int:
        return self.length


@dataclass(frozen=True)
class Hypothesis:
    init_rules: tuple[Rule, ...]
    contd_rules: tuple[Rule, ...]


def load_hypothesis(text: str) -> Hypothesis:
    program = parse_program(text)
    if program.choices or program.weaks or program.facts:
        raise ValueError("hypothesis files may contain only init/contd rules")
    init: list[Rule] = []
    contd: list[Rule] = []
    for rule in program.rules:
        if rule.head.pred == "init":
            init.append(rule)
        elif rule.head.pred == "contd":
            contd.append(rule)
        else:
            raise ValueError(f"unexpected head predicate {rule.head.pred!r}")
    return Hypothesis(tuple(init), tuple(contd))


@dataclass(frozen=True)
class TransitionAxioms:
    """Feature rewrite rules; bodies name the acting action's atom.

    Rules without an action atom apply to every action.  A predicate is
    rewritten for an action when some applicable rule heads it; all other
    feature predicates persist unchanged.
    """

    rules: tuple[Rule, ...]
    action_preds: frozenset[str]

    def _tag(self, rule: Rule):
        for lit in rule.body:
            if isinstance(lit, Atom) and lit.pred in self.action_preds:
                return (lit.pred, lit.args[:-1])
        return None

    def for_action(self, action_atom: Atom):
        key = (action_atom.pred, action_atom.args)
        applicable = tuple(
            r for r in self.rules if self._tag(r) in (None, key)
        )
        rewritten = frozenset(r.head.pred for r in applicable)
        return applicable, rewritten


def load_transitions(text: str, action_preds: Sequence[str]) -> TransitionAxioms:
    program = parse_program(text)
    if program.choices or program.weaks:
        raise ValueError("transition files may contain only normal rules")
    rules = tuple(program.rules) + tuple(Rule(f, ()) for f in program.facts)
    return TransitionAxioms(rules, frozenset(action_preds))


def _derives_event(rules: Sequence[Rule], facts: frozenset[Atom], pred: str, term) -> bool:
    model = evaluate_stratified(rules, facts)
    return Atom(pred, (term,)) in model or Atom(pred, (term, 1)) in model


def _advance(
    applicable: Sequence[Rule],
    rewritten: frozenset[str],
    action_atom: Atom,
    features: frozenset[Atom],
    background: Sequence[Atom],
) -> frozenset[Atom]:
    """One symbolic step: features@0 + action@0 |- features@1, frame for the rest."""
    facts: list[Atom] = [Atom(a.pred, a.args + (0,)) for a in features]
    facts.append(Atom(action_atom.pred, action_atom.args + (0,)))
    facts.extend(background)
    model = evaluate_stratified(applicable, facts)
    nxt = {a for a in features if a.pred not in rewritten}
    for atom in model:
        if atom.pred in rewritten and atom.args and atom.args[-1] == 1:
            nxt.add(Atom(atom.pred, atom.args[:-1]))
    return frozenset(nxt)


def unroll_macro(
    action: int,
    term,
    features: frozenset[Atom],
    hypothesis: Hypothesis,
    transitions: TransitionAxioms,
    l_max: int = DEFAULT_L_MAX,
    background: Sequence[Atom] = (),
) -> MacroAction:
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    env = {TIME_VAR: 1}
    init_rules = [subst_rule(r, env) for r in hypothesis.init_rules]
    if not _derives_event(init_rules, features, "init", term):
        return MacroAction(action, 0)
    contd_rules = [subst_rule(r, env) for r in hypothesis.contd_rules]
    action_atom = term_to_atom(term)
    applicable, rewritten = transitions.for_action(action_atom)
    applicable = [subst_rule(r, env) for r in applicable]
    current = features
    length = 1
    while length < l_max:
        current = _advance(applicable, rewritten, action_atom, current, background)
        if not _derives_event(contd_rules, current, "contd", term):
            break
        length += 1
    return MacroAction(action, length)


@dataclass(frozen=True)
class MacroBinding:
    """Adapter tying one domain model to the symbolic layer."""

    action_count: int
    learnable: tuple[int, ...]
    term_of: Callable[[int], object]
    featurize: Callable[[ParticleBelief], frozenset[Atom]]
    extra_atoms: Callable[[ParticleBelief], tuple[Atom, ...]] = field(
        default=lambda belief: ()
    )
    background: tuple[Atom, ...] = ()


def compute_macro_set(
    belief: ParticleBelief,
    binding: MacroBinding,
    hypothesis: Hypothesis,
    transitions: TransitionAxioms,
    l_max: int = DEFAULT_L_MAX,
) -> dict[int, MacroAction]:
    """Gamma map: one featurize call, one independent unroll per action."""
    features = binding.featurize(belief) | frozenset(binding.extra_atoms(belief))
    learnable = set(binding.learnable)
    macros: dict[int, MacroAction] = {}
    for a in range(binding.action_count):
        if a in learnable:
            macros[a] = unroll_macro(
                a,
                binding.term_of(a),
                features,
                hypothesis,
                transitions,
                l_max,
                binding.background,
            )
        else:
            macros[a] = MacroAction(a, 0)
    return macros


# ------------------------------------------------------------- coverage


def parse_coverage(text: str) -> dict[str, float]:
    table: dict[str, float] = {}
    for key, value in parse_flat(text).items():
        cov = float(value)
        if not 0.0 <= cov <= 1.0:
            raise ValueError(f"coverage for {key!r} outside [0,1]: {cov}")
        table[key] = cov
    return table


def coverage_table(
    names: dict[str, int], table: dict[str, float], action_count: int
) -> dict[int, float]:
    """Per-action-id coverage; actions without learned theories default to 1.0."""
    out = {a: 1.0 for a in range(action_count)}
    for name, cov in table.items():
        if name not in names:
            raise ValueError(f"coverage entry for unknown action {name!r}")
        out[names[name]] = cov
    return out


# ------------------------------------------------------- shipped bindings


def rocksample_binding(model) -> MacroBinding:
    from .domains import rocksample as rs

    return MacroBinding(
        action_count=model.action_count,
        learnable=rs.MOVEMENT_ACTIONS,
        term_of=lambda a: rs.action_term(model, a),
        featurize=lambda belief: rs.featurize(model, belief),
    )


def pocman_binding(model) -> MacroBinding:
    from .domains import pocman as pm

    return MacroBinding(
        action_count=model.action_count,
        learnable=pm.MOVEMENT_ACTIONS,
        term_of=pm.action_term,
        featurize=lambda belief: pm.featurize(model, belief),
        extra_atoms=lambda belief: (pm.position_atom(belief.particles[0]),),
        background=pm.background_atoms(model),
    )


def load_rocksample_theory() -> Hypothesis:
    return load_hypothesis(load_asset_text("rocksample_theory.lp"))


def load_rocksample_transitions() -> TransitionAxioms:
    return load_transitions(
        load_asset_text("rocksample_transitions.lp"),
        ("north", "south", "east", "west"),
    )


def load_pocman_theory() -> Hypothesis:
    return load_hypothesis(load_asset_text("pocman_theory.lp"))


def load_pocman_transitions() -> TransitionAxioms:
    return load_transitions(load_asset_text("pocman_transitions.lp"), ("move",))


def load_rocksample_coverage(action_count: int) -> dict[int, float]:
    from .domains import rocksample as rs

    names = {"north": rs.NORTH, "south": rs.SOUTH, "east": rs.EAST, "west": rs.WEST}
    return coverage_table(
        names, parse_coverage(load_asset_text("rocksample_coverage.txt")), action_count
    )


def load_pocman_coverage() -> dict[int, float]:
    from .domains import pocman as pm

    names = {"north": pm.NORTH, "south": pm.SOUTH, "east": pm.EAST, "west": pm.WEST}
    return coverage_table(
        names, parse_coverage(load_asset_text("pocman_coverage.txt")), 4
    )
