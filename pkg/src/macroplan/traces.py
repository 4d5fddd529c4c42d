"""Execution traces and their export as logic-learning examples.

A trace is the per-step record of an episode: the symbolic features of
the belief, the executed action, the reward.  High-return traces are
segmented into constant-action runs; each run becomes one start example
and one continue example per following step, in the ILASP example
syntax.  The same module verifies how much of an example set a learned
theory covers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from statistics import fmean
from typing import Callable, Iterable, Sequence

from .core import discounted_return
from .logic.evaluate import evaluate_stratified
from .logic.parser import parse_program
from .logic.syntax import TIME_VAR, Atom, Rule, atom_text, is_ground_atom, subst_rule
from .macros import Hypothesis, load_asset_text


@dataclass(frozen=True)
class TraceStep:
    features: frozenset[Atom]
    action: int
    reward: float


@dataclass(frozen=True)
class Trace:
    steps: tuple[TraceStep, ...]

    def discounted_return(self, discount: float) -> float:
        return discounted_return([s.reward for s in self.steps], discount)

    def __len__(self) -> int:
        return len(self.steps)


def select_traces(traces: Sequence[Trace], discount: float) -> tuple[Trace, ...]:
    """Traces whose discounted return is strictly above the input mean."""
    if not traces:
        raise ValueError("no traces to select from")
    returns = [t.discounted_return(discount) for t in traces]
    mean = fmean(returns)
    return tuple(t for t, g in zip(traces, returns) if g > mean)


@dataclass(frozen=True)
class Cdpi:
    """One partial interpretation: derive all inclusions, no exclusion."""

    id: str
    inclusions: frozenset[Atom]
    exclusions: frozenset[Atom]
    context: frozenset[Atom]

    def __post_init__(self) -> None:
        overlap = self.inclusions & self.exclusions
        if overlap:
            raise ValueError(f"atoms both included and excluded: {overlap}")


def _event_atoms(
    pred: str, action: int, term_of: Callable[[int], object], learnable: Sequence[int]
) -> tuple[frozenset[Atom], frozenset[Atom]]:
    include = frozenset({Atom(pred, (term_of(action),))})
    exclude = frozenset(
        Atom(pred, (term_of(a),)) for a in learnable if a != action
    )
    return include, exclude


def emit_cdpis(
    trace: Trace,
    term_of: Callable[[int], object],
    learnable: Sequence[int],
    prefix: str = "e",
) -> tuple[Cdpi, ...]:
    """Examples from maximal constant-action runs of learnable actions.

    A run of n > 1 equal actions yields one init example at its first
    step and a contd example at each later step; runs of other actions
    or of length 1 yield nothing.
    """
    if len(trace) < 2:
        raise ValueError("a trace needs at least two steps to segment")
    allowed = set(learnable)
    cdpis: list[Cdpi] = []
    count = 0
    i = 0
    steps = trace.steps
    while i < len(steps):
        j = i + 1
        while j < len(steps) and steps[j].action == steps[i].action:
            j += 1
        action = steps[i].action
        if j - i > 1 and action in allowed:
            inc, exc = _event_atoms("init", action, term_of, learnable)
            count += 1
            cdpis.append(Cdpi(f"{prefix}{count}", inc, exc, steps[i].features))
            inc, exc = _event_atoms("contd", action, term_of, learnable)
            for k in range(i + 1, j):
                count += 1
                cdpis.append(Cdpi(f"{prefix}{count}", inc, exc, steps[k].features))
        i = j
    return tuple(cdpis)


# --------------------------------------------------------------- export


def _atom_set_text(atoms: frozenset[Atom]) -> str:
    return ", ".join(sorted(atom_text(a) for a in atoms))


def format_ilasp(cdpis: Iterable[Cdpi]) -> str:
    lines = [
        "#pos({}, {{{}}}, {{{}}}, {{{}}}).".format(
            c.id,
            _atom_set_text(c.inclusions),
            _atom_set_text(c.exclusions),
            _atom_set_text(c.context),
        )
        for c in cdpis
    ]
    return "".join(line + "\n" for line in lines)


def export_ilasp(cdpis: Iterable[Cdpi], path) -> None:
    with open(path, "w") as handle:
        handle.write(format_ilasp(cdpis))


_POS_RE = re.compile(
    r"#pos\(\s*(\w+)\s*,\s*\{(.*?)\}\s*,\s*\{(.*?)\}\s*,\s*\{(.*?)\}\s*\)\.\s*$"
)


def _parse_atom_set(text: str) -> frozenset[Atom]:
    text = text.strip()
    if not text:
        return frozenset()
    program = parse_program(f"parsed_set :- {text}.")
    atoms = []
    for literal in program.rules[0].body:
        if not isinstance(literal, Atom) or not is_ground_atom(literal):
            raise ValueError(f"example atoms must be ground, got {literal!r}")
        atoms.append(literal)
    return frozenset(atoms)


def parse_ilasp(text: str) -> tuple[Cdpi, ...]:
    cdpis = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        match = _POS_RE.match(line)
        if match is None:
            raise ValueError(f"not a #pos record: {line!r}")
        ident, inc, exc, ctx = match.groups()
        cdpis.append(
            Cdpi(ident, _parse_atom_set(inc), _parse_atom_set(exc), _parse_atom_set(ctx))
        )
    return tuple(cdpis)


# ------------------------------------------------------------- coverage


def load_ec_prelude() -> tuple[Rule, ...]:
    return tuple(parse_program(load_asset_text("ec_prelude.lp")).rules)


def _covered(rules: Sequence[Rule], cdpi: Cdpi) -> bool:
    model = evaluate_stratified(rules, cdpi.context)

    def derived(atom: Atom) -> bool:
        return atom in model or Atom(atom.pred, atom.args + (1,)) in model

    return all(derived(a) for a in cdpi.inclusions) and not any(
        derived(a) for a in cdpi.exclusions
    )


def check_coverage(
    hypothesis: Hypothesis, prelude: Sequence[Rule], cdpis: Sequence[Cdpi]
) -> float:
    """Fraction of examples the theory covers; vacuously 1.0 when empty.

    Contexts are time-free, so rules are grounded at the first step of
    the clock before evaluation.
    """
    if not cdpis:
        return 1.0
    env = {TIME_VAR: 1}
    rules = [
        subst_rule(r, env)
        for r in (*prelude, *hypothesis.init_rules, *hypothesis.contd_rules)
    ]
    covered = sum(1 for c in cdpis if _covered(rules, c))
    return covered / len(cdpis)


# -------------------------------------------------------------- archive


def format_traces(traces: Iterable[Trace]) -> str:
    """One header line per trace, then one line per step."""
    out: list[str] = []
    for trace in traces:
        out.append(f"trace {len(trace)}")
        for step in trace.steps:
            atoms = " ".join(sorted(atom_text(a) for a in step.features))
            out.append(f"{step.action} {step.reward!r} {atoms}".rstrip())
    return "".join(line + "\n" for line in out)


def parse_traces(text: str) -> tuple[Trace, ...]:
    lines = [line for line in text.splitlines() if line.strip()]
    traces: list[Trace] = []
    i = 0
    while i < len(lines):
        head = lines[i].split()
        if len(head) != 2 or head[0] != "trace":
            raise ValueError(f"expected a trace header, got {lines[i]!r}")
        n = int(head[1])
        steps = []
        for line in lines[i + 1 : i + 1 + n]:
            action_text, reward_text, *atom_texts = line.split()
            features = (
                _parse_atom_set(", ".join(atom_texts)) if atom_texts else frozenset()
            )
            steps.append(TraceStep(features, int(action_text), float(reward_text)))
        if len(steps) != n:
            raise ValueError("trace archive truncated")
        traces.append(Trace(tuple(steps)))
        i += 1 + n
    return tuple(traces)


def save_traces(traces: Iterable[Trace], path) -> None:
    with open(path, "w") as handle:
        handle.write(format_traces(traces))


def load_traces(path) -> tuple[Trace, ...]:
    with open(path) as handle:
        return parse_traces(handle.read())
