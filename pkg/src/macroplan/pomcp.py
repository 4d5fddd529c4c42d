"""Monte Carlo tree search over histories with optional macro guidance.

Guidance enters in two places only: suggested actions of new nodes start
with a phantom visit count, and leaf rollouts draw actions from a
coverage-weighted distribution instead of uniformly.  Everything else is
the classic algorithm: UCT descent, one expansion per simulation,
discounted backups of the running mean.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import GenerativeModel, NoParticles, ParticleBelief

_UNVISITED = math.inf


def uct_value(value: float, n_h: int, n_ha: int, exploration: float) -> float:
    """Upper confidence score; unvisited actions dominate everything."""
    if n_ha == 0:
        return _UNVISITED
    return value + exploration * math.sqrt(math.log(n_h) / n_ha)


def rollout_weights(
    action_count: int, suggested: frozenset[int], coverage: dict[int, float]
) -> tuple[float, ...]:
    """Rollout distribution: coverage for suggested actions, the global
    minimum coverage for the rest, normalized.  Every action keeps
    positive probability, so rollouts never exclude anything."""
    for a in range(action_count):
        if not 0.0 < coverage.get(a, 1.0) <= 1.0:
            raise ValueError(f"coverage for action {a} outside (0,1]")
    if not suggested:
        return (1.0 / action_count,) * action_count
    floor = min(coverage.get(a, 1.0) for a in range(action_count))
    raw = [
        coverage.get(a, 1.0) if a in suggested else floor
        for a in range(action_count)
    ]
    total = sum(raw)
    return tuple(w / total for w in raw)


@dataclass(frozen=True)
class Heuristic:
    """Search guidance: seed suggested actions, bias or redirect rollouts."""

    suggested: frozenset[int] = frozenset()
    weights: Optional[tuple[float, ...]] = None
    preferred: bool = False


@dataclass(frozen=True)
class PomcpConfig:
    simulations: int
    exploration: float
    discount: float
    max_depth: int
    n_max: int = 10
    heuristic_enabled: bool = False

    def __post_init__(self) -> None:
        if self.simulations < 1:
            raise ValueError("simulations must be at least 1")
        if self.exploration < 0:
            raise ValueError("exploration constant must be nonnegative")
        if not 0 < self.discount < 1:
            raise ValueError("discount must lie in (0,1)")
        if self.max_depth < 1 or self.n_max < 0:
            raise ValueError("max_depth must be positive, n_max nonnegative")


class _Node:
    __slots__ = ("visits", "counts", "values", "pending", "children", "particles")

    def __init__(self, action_count: int, state=None) -> None:
        self.visits = 0
        self.counts = [0] * action_count
        self.values = [0.0] * action_count
        # actions seeded with phantom visits await their first real backup
        self.pending = [False] * action_count
        self.children: dict = {}
        self.particles = [] if state is None else [state]

    def seed(self, suggested: frozenset[int], n_max: int) -> None:
        for a in suggested:
            self.counts[a] = n_max
            self.pending[a] = True


@dataclass(frozen=True)
class SearchStats:
    action: int
    visits: int
    counts: tuple[int, ...]
    values: tuple[float, ...]


class _Search:
    def __init__(
        self,
        model: GenerativeModel,
        config: PomcpConfig,
        rng: random.Random,
        heuristic: Optional[Heuristic],
    ) -> None:
        self.model = model
        self.config = config
        self.rng = rng
        self.heuristic = heuristic if config.heuristic_enabled else None
        self.actions = range(model.action_count)

    def _new_node(self, state=None) -> _Node:
        node = _Node(self.model.action_count, state)
        if self.heuristic is not None and self.heuristic.suggested:
            node.seed(self.heuristic.suggested, self.config.n_max)
        return node

    def _select(self, node: _Node) -> int:
        best_action = 0
        best_score = -math.inf
        for a in self.actions:
            score = uct_value(
                node.values[a], node.visits, node.counts[a], self.config.exploration
            )
            if score > best_score:
                best_score = score
                best_action = a
        return best_action

    def _rollout_action(self, state, prev_action: Optional[int]) -> int:
        h = self.heuristic
        if h is not None:
            if h.preferred:
                return self.model.preferred_action(state, prev_action, self.rng)
            if h.weights is not None:
                return self.rng.choices(self.actions, weights=h.weights)[0]
        return self.rng.randrange(self.model.action_count)

    def _rollout(self, state, depth: int, prev_action: Optional[int]) -> float:
        total = 0.0
        factor = 1.0
        while depth < self.config.max_depth:
            action = self._rollout_action(state, prev_action)
            outcome = self.model.step(state, action, self.rng)
            total += factor * outcome.reward
            if outcome.terminal:
                break
            factor *= self.config.discount
            state = outcome.next_state
            prev_action = action
            depth += 1
        return total

    def simulate(self, state, node: _Node, depth: int) -> float:
        if depth >= self.config.max_depth:
            return 0.0
        node.visits += 1
        action = self._select(node)
        outcome = self.model.step(state, action, self.rng)
        key = (action, outcome.observation)
        child = node.children.get(key)
        if child is None:
            node.children[key] = self._new_node(outcome.next_state)
            future = (
                0.0
                if outcome.terminal
                else self._rollout(outcome.next_state, depth + 1, action)
            )
        elif outcome.terminal:
            future = 0.0
        else:
            future = self.simulate(outcome.next_state, child, depth + 1)
        value = outcome.reward + self.config.discount * future
        node.counts[action] += 1
        if node.pending[action]:
            node.values[action] = value
            node.pending[action] = False
        else:
            node.values[action] += (value - node.values[action]) / node.counts[action]
        return value


def search_stats(
    belief: ParticleBelief,
    model: GenerativeModel,
    config: PomcpConfig,
    rng: random.Random,
    heuristic: Optional[Heuristic] = None,
) -> SearchStats:
    if not belief.particles:
        raise NoParticles("search needs a populated belief")
    run = _Search(model, config, rng, heuristic)
    root = run._new_node()
    for _ in range(config.simulations):
        run.simulate(belief.sample(rng), root, 0)
    best_action = 0
    best_value = -math.inf
    for a in range(model.action_count):
        if root.counts[a] > 0 and root.values[a] > best_value:
            best_value = root.values[a]
            best_action = a
    return SearchStats(
        best_action, root.visits, tuple(root.counts), tuple(root.values)
    )


def search(
    belief: ParticleBelief,
    model: GenerativeModel,
    config: PomcpConfig,
    rng: random.Random,
    heuristic: Optional[Heuristic] = None,
) -> int:
    """Best root action after the configured number of simulations."""
    return search_stats(belief, model, config, rng, heuristic).action
