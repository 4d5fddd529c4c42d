"""Determinized sparse tree search with configurable bound policies.

The belief is frozen into K scenarios, each owning a per-depth family of
deterministic random streams, so every (scenario, depth, action) step
outcome is reproducible and shared across the actions compared at a
node.  Exploration repeatedly descends the child with the largest
weighted bound gap, refines leaf bounds, and backs the bounds up; at the
root an epsilon-narrow gap certifies the default action of the
configured lower bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import inf
from typing import Optional, Sequence

from .core import GenerativeModel, NoParticles, ParticleBelief
from .macros import MacroAction

UPPER_KINDS = ("trivial", "mdp")
LOWER_KINDS = ("trivial", "pref", "local", "timed")

_SEED_STRIDE = 1_000_003


@dataclass(frozen=True)
class Scenario:
    particle: object
    seed: int
    terminal: bool = False

    def rng_at(self, depth: int) -> random.Random:
        # fresh identically seeded stream per depth: common random
        # numbers across every action compared at one node
        return random.Random(self.seed * _SEED_STRIDE + depth)


@dataclass(frozen=True)
class Bounds:
    l: float
    u: float

    def __post_init__(self) -> None:
        if self.l > self.u:
            object.__setattr__(self, "l", self.u)

    @property
    def gap(self) -> float:
        return self.u - self.l


@dataclass(frozen=True)
class DespotConfig:
    k: int
    epsilon: float
    max_depth: int
    upper_bound_kind: str = "trivial"
    lower_bound_kind: str = "trivial"
    max_trials: int = 32
    mdp_depth: int = 3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("scenario count must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_depth < 1 or self.max_trials < 1 or self.mdp_depth < 1:
            raise ValueError("depth and trial budgets must be positive")
        if self.upper_bound_kind not in UPPER_KINDS:
            raise ValueError(f"unknown upper bound {self.upper_bound_kind!r}")
        if self.lower_bound_kind not in LOWER_KINDS:
            raise ValueError(f"unknown lower bound {self.lower_bound_kind!r}")


def build_scenarios(
    belief: ParticleBelief, k: int, rng: random.Random
) -> tuple[Scenario, ...]:
    """K particles drawn with replacement, each with its own seed."""
    if not belief.particles:
        raise NoParticles("scenario construction needs a populated belief")
    return tuple(
        Scenario(belief.sample(rng), rng.getrandbits(63)) for _ in range(k)
    )


def _exact_trivial(model: GenerativeModel, gamma: float) -> float:
    # decimal-exact so R_max/(1-gamma) lands on the round figure
    return float(Fraction(str(model.max_reward)) / (1 - Fraction(str(gamma))))


def _hindsight_value(
    model: GenerativeModel,
    scenario: Scenario,
    state,
    depth: int,
    remaining: int,
    gamma: float,
    tail: float,
) -> float:
    if remaining == 0:
        return tail
    best = -inf
    for action in range(model.action_count):
        outcome = model.step(state, action, scenario.rng_at(depth))
        value = outcome.reward
        if not outcome.terminal:
            value += gamma * _hindsight_value(
                model, scenario, outcome.next_state, depth + 1, remaining - 1,
                gamma, tail,
            )
        if value > best:
            best = value
    return best


def upper_bound(
    scenarios: Sequence[Scenario],
    kind: str,
    model: GenerativeModel,
    gamma: float,
    depth: int = 0,
    mdp_depth: int = 3,
) -> float:
    if kind == "trivial":
        return _exact_trivial(model, gamma)
    if kind != "mdp":
        raise ValueError(f"unknown upper bound {kind!r}")
    tail = _exact_trivial(model, gamma)
    total = 0.0
    for scenario in scenarios:
        if scenario.terminal:
            continue
        total += _hindsight_value(
            model, scenario, scenario.particle, depth, mdp_depth, gamma, tail
        )
    return total / len(scenarios)


def _fixed_rollout(
    model: GenerativeModel,
    scenario: Scenario,
    action: int,
    gamma: float,
    depth: int,
    max_depth: int,
) -> float:
    state = scenario.particle
    total = 0.0
    factor = 1.0
    for d in range(depth, max_depth):
        outcome = model.step(state, action, scenario.rng_at(d))
        total += factor * outcome.reward
        if outcome.terminal:
            break
        factor *= gamma
        state = outcome.next_state
    return total


def _preferred_rollout(
    model: GenerativeModel,
    scenario: Scenario,
    gamma: float,
    depth: int,
    max_depth: int,
) -> float:
    state = scenario.particle
    prev: Optional[int] = None
    total = 0.0
    factor = 1.0
    for d in range(depth, max_depth):
        rng = scenario.rng_at(d)
        action = model.preferred_action(state, prev, rng)
        outcome = model.step(state, action, rng)
        total += factor * outcome.reward
        if outcome.terminal:
            break
        factor *= gamma
        state = outcome.next_state
        prev = action
    return total


def _macro_default(
    macros: Optional[dict[int, MacroAction]],
    model: GenerativeModel,
    cap: Optional[int],
) -> int:
    """Longest macro wins (ties to the lowest action id); no macros at
    all fall back to the domain default."""
    if not macros:
        return model.default_action
    best_action = model.default_action
    best_length = 0
    for action in sorted(macros):
        length = macros[action].length
        if cap is not None:
            length = min(length, cap)
        if length > best_length:
            best_length = length
            best_action = action
    return best_action


def lower_bound(
    scenarios: Sequence[Scenario],
    kind: str,
    macros: Optional[dict[int, MacroAction]],
    model: GenerativeModel,
    gamma: float,
    max_depth: int,
    depth: int = 0,
) -> tuple[float, int]:
    """Mean scenario value of a certified default policy, and its action."""
    live = [s for s in scenarios if not s.terminal]
    if kind == "pref":
        if live:
            votes: dict[int, int] = {}
            for s in live:
                choice = model.preferred_action(s.particle, None, s.rng_at(depth))
                votes[choice] = votes.get(choice, 0) + 1
            action = min(votes, key=lambda a: (-votes[a], a))
        else:
            action = model.default_action
        total = sum(
            _preferred_rollout(model, s, gamma, depth, max_depth) for s in live
        )
        return total / len(scenarios), action
    if kind == "trivial":
        action = model.default_action
    elif kind == "timed":
        action = _macro_default(macros, model, cap=None)
    elif kind == "local":
        action = _macro_default(macros, model, cap=1)
    else:
        raise ValueError(f"unknown lower bound {kind!r}")
    total = sum(
        _fixed_rollout(model, s, action, gamma, depth, max_depth) for s in live
    )
    return total / len(scenarios), action


class _Node:
    __slots__ = ("scenarios", "depth", "lower", "upper", "default", "acts")

    def __init__(self, scenarios, depth, bounds: Bounds, default: int) -> None:
        self.scenarios = scenarios
        self.depth = depth
        self.lower = bounds.l
        self.upper = bounds.u
        self.default = default
        # per action: (mean reward, ((obs, weight, child), ...)); None until expanded
        self.acts = None

    @property
    def gap(self) -> float:
        return self.upper - self.lower


class _Tree:
    def __init__(self, model, config, macros) -> None:
        self.model = model
        self.config = config
        self.macros = macros
        self.gamma = model.discount

    def make_node(self, scenarios, depth) -> _Node:
        cfg = self.config
        value, action = lower_bound(
            scenarios, cfg.lower_bound_kind, self.macros, self.model,
            self.gamma, cfg.max_depth, depth,
        )
        upper = upper_bound(
            scenarios, cfg.upper_bound_kind, self.model, self.gamma,
            depth, cfg.mdp_depth,
        )
        return _Node(scenarios, depth, Bounds(value, upper), action)

    def expand(self, node: _Node) -> None:
        acts = []
        count = len(node.scenarios)
        for action in range(self.model.action_count):
            groups: dict[int, list[Scenario]] = {}
            reward_sum = 0.0
            for s in node.scenarios:
                outcome = self.model.step(s.particle, action, s.rng_at(node.depth))
                reward_sum += outcome.reward
                if not outcome.terminal:
                    groups.setdefault(outcome.observation, []).append(
                        Scenario(outcome.next_state, s.seed)
                    )
            children = tuple(
                (obs, len(group) / count, self.make_node(tuple(group), node.depth + 1))
                for obs, group in sorted(groups.items())
            )
            acts.append((reward_sum / count, children))
        node.acts = tuple(acts)

    def q_bounds(self, node: _Node, action: int) -> tuple[float, float]:
        mean_reward, children = node.acts[action]
        q_lower = q_upper = mean_reward
        for _, weight, child in children:
            q_lower += self.gamma * weight * child.lower
            q_upper += self.gamma * weight * child.upper
        return q_lower, q_upper

    def backup(self, node: _Node) -> None:
        best_lower = best_upper = -inf
        for action in range(self.model.action_count):
            q_lower, q_upper = self.q_bounds(node, action)
            best_lower = max(best_lower, q_lower)
            best_upper = max(best_upper, q_upper)
        node.lower = max(node.lower, best_lower)
        node.upper = min(node.upper, best_upper)
        if node.lower > node.upper:
            node.lower = node.upper

    def explore(self, node: _Node) -> None:
        if node.depth >= self.config.max_depth:
            return
        if node.acts is None:
            self.expand(node)
            self.backup(node)
            return
        best_action = 0
        best_q = -inf
        for action in range(self.model.action_count):
            _, q_upper = self.q_bounds(node, action)
            if q_upper > best_q:
                best_q = q_upper
                best_action = action
        target = None
        target_score = 0.0
        for _, weight, child in node.acts[best_action][1]:
            score = weight * child.gap
            if score > target_score:
                target_score = score
                target = child
        if target is not None and target_score > 0.0:
            self.explore(target)
        self.backup(node)


def search_despot(
    belief: ParticleBelief,
    model: GenerativeModel,
    config: DespotConfig,
    rng: random.Random,
    macros: Optional[dict[int, MacroAction]] = None,
) -> int:
    """Root action: the certified default on an epsilon-narrow gap, the
    best root lower bound otherwise."""
    scenarios = build_scenarios(belief, config.k, rng)
    tree = _Tree(model, config, macros)
    root = tree.make_node(scenarios, 0)
    for _ in range(config.max_trials):
        if root.gap < config.epsilon:
            break
        tree.explore(root)
    if root.gap < config.epsilon or root.acts is None:
        return root.default
    best_action = 0
    best_q = -inf
    for action in range(model.action_count):
        q_lower, _ = tree.q_bounds(root, action)
        if q_lower > best_q:
            best_q = q_lower
            best_action = action
    return best_action
