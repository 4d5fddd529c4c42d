"""Domain-agnostic POMDP primitives.

Generative-model protocol, particle-filter beliefs, histories, and the
discounted-return accumulator shared by every solver and benchmark.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Hashable, NamedTuple, Optional, Protocol, Sequence

State = Hashable


class StepOutcome(NamedTuple):
    next_state: State
    observation: int
    reward: float
    terminal: bool


class BeliefCollapse(RuntimeError):
    """Zero particles survived a belief update within the attempt budget."""


class NoParticles(RuntimeError):
    """A solver was handed an empty belief."""


class GenerativeModel(Protocol):
    """Black-box simulator interface.

    Implementations must be pure with respect to the rng stream: identical
    seeds replay identical outcomes.  All observations are small integers so
    tree nodes can key on them cheaply.
    """

    action_count: int
    discount: float
    max_reward: float
    default_action: int

    def step(self, state: State, action: int, rng: random.Random) -> StepOutcome: ...

    def sample_initial_state(self, rng: random.Random) -> State: ...

    def perturb(self, state: State, rng: random.Random) -> State:
        """Local reinvigoration move: a near-copy differing in one hidden detail."""
        ...

    def resample_hidden(self, state: State, rng: random.Random) -> State:
        """Redraw every hidden component from the prior, keeping observables."""
        ...

    def preferred_action(
        self, state: State, prev_action: Optional[int], rng: random.Random
    ) -> int:
        """Handcrafted rollout policy; must return a legal action id."""
        ...


class History:
    """Append-only (action, observation) sequence for one episode."""

    __slots__ = ("_steps",)

    def __init__(self) -> None:
        self._steps: list[tuple[int, int]] = []

    def append(self, action: int, observation: int) -> None:
        self._steps.append((action, observation))

    @property
    def steps(self) -> tuple[tuple[int, int], ...]:
        return tuple(self._steps)

    def __len__(self) -> int:
        return len(self._steps)


@dataclass(frozen=True)
class ParticleBelief:
    """Multiset of domain states; count equals target_size after every update."""

    particles: tuple[State, ...]
    target_size: int

    def __post_init__(self) -> None:
        if self.target_size < 1:
            raise ValueError("target_size must be positive")

    def __len__(self) -> int:
        return len(self.particles)

    def sample(self, rng: random.Random) -> State:
        if not self.particles:
            raise NoParticles("belief has no particles")
        return self.particles[rng.randrange(len(self.particles))]


def discounted_return(rewards: Sequence[float], discount: float) -> float:
    total = 0.0
    for r in reversed(rewards):
        total = r + discount * total
    return total


def sample_initial_belief(
    model: GenerativeModel, target_size: int, rng: random.Random
) -> ParticleBelief:
    if target_size < 1:
        raise ValueError("target_size must be positive")
    particles = tuple(model.sample_initial_state(rng) for _ in range(target_size))
    return ParticleBelief(particles, target_size)


# Attempt budget multiplier before declaring the filter diverged.
_COLLAPSE_BUDGET_FACTOR = 10


def belief_update(
    belief: ParticleBelief,
    action: int,
    observation: int,
    model: GenerativeModel,
    rng: random.Random,
) -> ParticleBelief:
    """Rejection update: keep stepped particles whose observation matches.

    Terminal next-states are rejected too: an update only happens when the
    real episode continued.  Shortfall is filled by perturbing survivors;
    zero survivors within 10x target_size step attempts raises BeliefCollapse.
    """
    if not belief.particles:
        raise NoParticles("cannot update an empty belief")
    target = belief.target_size
    budget = _COLLAPSE_BUDGET_FACTOR * target
    survivors: list[State] = []
    attempts = 0
    # First pass gives every stored particle one transition attempt.
    for state in belief.particles:
        if len(survivors) >= target or attempts >= budget:
            break
        attempts += 1
        out = model.step(state, action, rng)
        if out.observation == observation and not out.terminal:
            survivors.append(out.next_state)
    while len(survivors) < target and attempts < budget:
        attempts += 1
        state = belief.particles[rng.randrange(len(belief.particles))]
        out = model.step(state, action, rng)
        if out.observation == observation and not out.terminal:
            survivors.append(out.next_state)
    if not survivors:
        raise BeliefCollapse(
            f"no particle matched observation {observation} in {attempts} attempts"
        )
    filled = list(survivors)
    while len(filled) < target:
        base = survivors[rng.randrange(len(survivors))]
        filled.append(model.perturb(base, rng))
    return ParticleBelief(tuple(filled[:target]), target)


def fresh_posterior_belief(
    reference: State, model: GenerativeModel, target_size: int, rng: random.Random
) -> ParticleBelief:
    """Recovery belief after a collapse: prior over hidden parts, observables kept."""
    particles = tuple(model.resample_hidden(reference, rng) for _ in range(target_size))
    return ParticleBelief(particles, target_size)
