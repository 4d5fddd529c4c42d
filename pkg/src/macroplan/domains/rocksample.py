"""Rocksample generative model.

N x N grid, M rocks with hidden boolean values.  The agent moves in the four
cardinal directions, samples the rock under it, or runs the noisy long-range
sensor on a chosen rock.  Exiting east past the right edge ends the episode
with +10.  Coordinates are (x, y), 0-indexed, with north increasing y.
"""

from __future__ import annotations

import random
from typing import NamedTuple, Optional, Sequence

from ..core import ParticleBelief, StepOutcome
from ..logic.syntax import Atom, Compound
from . import InvalidAction, InvalidAtom, discretize_percent

NORTH, SOUTH, EAST, WEST, SAMPLE = 0, 1, 2, 3, 4
CHECK_BASE = 5

_MOVE_NAMES = {NORTH: "north", SOUTH: "south", EAST: "east", WEST: "west"}
_NAME_TO_MOVE = {v: k for k, v in _MOVE_NAMES.items()}
_DELTAS = {NORTH: (0, 1), SOUTH: (0, -1), EAST: (1, 0), WEST: (-1, 0)}

# Sensor efficiency halves every HALF_DIST cells of Manhattan distance.
HALF_DIST = 20.0

OBS_NONE, OBS_GOOD, OBS_BAD = 0, 1, 2


class RocksampleState(NamedTuple):
    x: int
    y: int
    values: tuple[bool, ...]
    sampled: tuple[bool, ...]


class RocksampleModel:
    discount = 0.95
    max_reward = 10.0
    default_action = EAST

    def __init__(self, n: int, rock_positions: Sequence[tuple[int, int]]):
        if n < 1:
            raise ValueError("grid size must be positive")
        for (rx, ry) in rock_positions:
            if not (0 <= rx < n and 0 <= ry < n):
                raise ValueError(f"rock at ({rx},{ry}) outside {n}x{n} grid")
        self.n = n
        self.rock_positions = tuple(rock_positions)
        self.m = len(self.rock_positions)
        self.action_count = CHECK_BASE + self.m
        self.start = (0, n // 2)
        self._rock_at = {pos: i for i, pos in enumerate(self.rock_positions)}

    @classmethod
    def generate(cls, n: int, m: int, rng: random.Random) -> "RocksampleModel":
        """Draw m distinct rock cells uniformly over the grid."""
        cells = [(x, y) for x in range(n) for y in range(n)]
        return cls(n, rng.sample(cells, m))

    def sample_initial_state(self, rng: random.Random) -> RocksampleState:
        values = tuple(rng.random() < 0.5 for _ in range(self.m))
        return RocksampleState(*self.start, values, (False,) * self.m)

    def step(self, state: RocksampleState, action: int, rng: random.Random) -> StepOutcome:
        if not 0 <= action < self.action_count:
            raise InvalidAction(f"action {action} out of range")
        if action in _DELTAS:
            dx, dy = _DELTAS[action]
            nx, ny = state.x + dx, state.y + dy
            if action == EAST and nx == self.n:
                exited = state._replace(x=nx)
                return StepOutcome(exited, OBS_NONE, 10.0, True)
            if 0 <= nx < self.n and 0 <= ny < self.n:
                return StepOutcome(state._replace(x=nx, y=ny), OBS_NONE, 0.0, False)
            return StepOutcome(state, OBS_NONE, 0.0, False)
        if action == SAMPLE:
            r = self._rock_at.get((state.x, state.y))
            if r is None or state.sampled[r]:
                return StepOutcome(state, OBS_NONE, -10.0, False)
            sampled = state.sampled[:r] + (True,) + state.sampled[r + 1 :]
            reward = 10.0 if state.values[r] else -10.0
            return StepOutcome(state._replace(sampled=sampled), OBS_NONE, reward, False)
        r = action - CHECK_BASE
        rx, ry = self.rock_positions[r]
        d = abs(rx - state.x) + abs(ry - state.y)
        eta = 2.0 ** (-d / HALF_DIST)
        accuracy = (1.0 + eta) / 2.0
        truth = OBS_GOOD if state.values[r] else OBS_BAD
        lie = OBS_BAD if state.values[r] else OBS_GOOD
        obs = truth if rng.random() < accuracy else lie
        return StepOutcome(state, obs, 0.0, False)

    def check_action(self, rock: int) -> int:
        if not 0 <= rock < self.m:
            raise InvalidAction(f"no rock {rock}")
        return CHECK_BASE + rock

    def perturb(self, state: RocksampleState, rng: random.Random) -> RocksampleState:
        # reinvigoration: flip one random rock value
        r = rng.randrange(self.m)
        values = state.values[:r] + (not state.values[r],) + state.values[r + 1 :]
        return state._replace(values=values)

    def resample_hidden(self, state: RocksampleState, rng: random.Random) -> RocksampleState:
        values = tuple(rng.random() < 0.5 for _ in range(self.m))
        return state._replace(values=values)

    def preferred_action(
        self, state: RocksampleState, prev_action: Optional[int], rng: random.Random
    ) -> int:
        r = self._rock_at.get((state.x, state.y))
        if r is not None and not state.sampled[r] and state.values[r]:
            return SAMPLE
        return EAST


def featurize(model: RocksampleModel, belief: ParticleBelief) -> frozenset[Atom]:
    """Symbolic feature atoms for unsampled rocks: dist, delta_x, delta_y, guess.

    Offsets are rock minus agent, signed; guess is the particle fraction that
    marks the rock valuable, in {0, 10, ..., 100}.  Time-free atoms.
    """
    particles = belief.particles
    first: RocksampleState = particles[0]
    atoms: list[Atom] = []
    count = len(particles)
    for r, (rx, ry) in enumerate(model.rock_positions):
        if first.sampled[r]:
            continue
        dx = rx - first.x
        dy = ry - first.y
        good = sum(1 for p in particles if p.values[r])
        atoms.append(Atom("dist", (r, abs(dx) + abs(dy))))
        atoms.append(Atom("delta_x", (r, dx)))
        atoms.append(Atom("delta_y", (r, dy)))
        atoms.append(Atom("guess", (r, discretize_percent(good / count))))
    return frozenset(atoms)


def action_term(model: RocksampleModel, action: int, state: Optional[RocksampleState] = None):
    """F_A: movement actions map to bare constants, sample/check to compounds.

    sample needs the agent cell to name its rock, so it requires a state.
    """
    if action in _MOVE_NAMES:
        return _MOVE_NAMES[action]
    if action == SAMPLE:
        if state is None:
            raise InvalidAction("sample atom needs the agent position")
        r = model._rock_at.get((state.x, state.y))
        if r is None:
            raise InvalidAction("sample away from any rock has no atom")
        return Compound("sample", (r,))
    if CHECK_BASE <= action < model.action_count:
        return Compound("check", (action - CHECK_BASE,))
    raise InvalidAction(f"action {action} out of range")


def term_action(model: RocksampleModel, term) -> int:
    """Inverse of action_term."""
    if isinstance(term, str) and term in _NAME_TO_MOVE:
        return _NAME_TO_MOVE[term]
    if isinstance(term, Compound):
        if term.functor == "sample" and len(term.args) == 1:
            return SAMPLE
        if term.functor == "check" and len(term.args) == 1:
            r = term.args[0]
            if isinstance(r, int) and 0 <= r < model.m:
                return CHECK_BASE + r
    raise InvalidAtom(f"not a rocksample action term: {term!r}")


MOVEMENT_ACTIONS = (NORTH, SOUTH, EAST, WEST)
