"""Pocman generative model.

Maze world with hidden food pellets and chasing ghosts.  Coordinates are
(x, y) with x the column and y the row index from the top, so north means
y - 1.  Observations pack food and ghost visibility within Manhattan
distance 2 into one 8-bit integer (food bits 0-3, ghost bits 4-7, direction
order north, south, east, west).
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

from ..core import ParticleBelief, StepOutcome
from ..logic.syntax import Atom, Compound
from . import InvalidAction, InvalidAtom, discretize_percent

NORTH, SOUTH, EAST, WEST = 0, 1, 2, 3
DIR_NAMES = ("north", "south", "east", "west")
_NAME_TO_DIR = {n: i for i, n in enumerate(DIR_NAMES)}
_DELTAS = ((0, -1), (0, 1), (1, 0), (-1, 0))

CHASE_RADIUS = 4
FEATURE_RANGE = 6
OBS_RADIUS = 2


def _classify(dx_east: int, dy_north: int) -> tuple[int, ...]:
    """Directions whose dominant axis matches the displacement; ties count both."""
    ax, ay = abs(dx_east), abs(dy_north)
    if ax == 0 and ay == 0:
        return ()
    if ax > ay:
        return (EAST,) if dx_east > 0 else (WEST,)
    if ay > ax:
        return (NORTH,) if dy_north > 0 else (SOUTH,)
    return (
        NORTH if dy_north > 0 else SOUTH,
        EAST if dx_east > 0 else WEST,
    )


_OBS_OFFSETS: tuple[tuple[tuple[int, int], tuple[int, ...]], ...] = tuple(
    ((ox, oy), _classify(ox, -oy))
    for ox in range(-OBS_RADIUS, OBS_RADIUS + 1)
    for oy in range(-OBS_RADIUS, OBS_RADIUS + 1)
    if 1 <= abs(ox) + abs(oy) <= OBS_RADIUS
)


class PocmanState(NamedTuple):
    x: int
    y: int
    food: frozenset[tuple[int, int]]
    ghosts: tuple[tuple[int, int], ...]


def load_maze(text: str) -> tuple[str, ...]:
    """Parse an ASCII maze: rows of '#' and '.', all the same length."""
    rows = [line for line in text.splitlines() if line]
    if not rows:
        raise ValueError("maze is empty")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"maze row {i} has length {len(row)}, expected {width}")
        bad = set(row) - {"#", "."}
        if bad:
            raise ValueError(f"maze row {i} has invalid characters {sorted(bad)}")
    return tuple(rows)


def load_maze_file(path) -> tuple[str, ...]:
    return load_maze(Path(path).read_text())


class PocmanModel:
    discount = 0.95
    max_reward = 1000.0
    default_action = NORTH
    action_count = 4

    def __init__(
        self,
        maze_rows: Sequence[str],
        ghost_count: int,
        rho_f: float,
        rho_g: float,
    ):
        self.maze = tuple(maze_rows)
        self.height = len(self.maze)
        self.width = len(self.maze[0])
        if not 0.0 <= rho_f <= 1.0 or not 0.0 <= rho_g <= 1.0:
            raise ValueError("rho_f and rho_g must lie in [0,1]")
        self.rho_f = rho_f
        self.rho_g = rho_g
        self.ghost_count = ghost_count
        self.walls = frozenset(
            (x, y)
            for y, row in enumerate(self.maze)
            for x, ch in enumerate(row)
            if ch == "#"
        )
        frees = sorted(
            (x, y)
            for y, row in enumerate(self.maze)
            for x, ch in enumerate(row)
            if ch == "."
        )
        if not frees:
            raise ValueError("maze has no free cells")
        self.free_cells = tuple(frees)
        self.neighbors: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
        for (x, y) in frees:
            self.neighbors[(x, y)] = tuple(
                (x + dx, y + dy)
                for dx, dy in _DELTAS
                if self._is_free(x + dx, y + dy)
            )
        # deterministic spawn: bottom-most free row, column nearest the center
        bottom = max(y for (_, y) in frees)
        row_xs = [x for (x, y) in frees if y == bottom]
        px = min(row_xs, key=lambda x: (abs(2 * x - (self.width - 1)), x))
        self.spawn = (px, bottom)
        # ghosts start as far from the agent as the maze allows, so early
        # play is not decided by spawn adjacency
        ranked = sorted(
            (c for c in frees if c != self.spawn),
            key=lambda c: (
                -(abs(c[0] - self.spawn[0]) + abs(c[1] - self.spawn[1])),
                c[1],
                c[0],
            ),
        )
        if ghost_count > len(ranked):
            raise ValueError("more ghosts than available cells")
        self.ghost_spawns = tuple(ranked[:ghost_count])
        self._food_cells = tuple(c for c in frees if c != self.spawn)

    def _is_free(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and (x, y) not in self.walls

    def sample_initial_state(self, rng: random.Random) -> PocmanState:
        food = {c for c in self._food_cells if rng.random() < self.rho_f}
        if not food:
            # a pellet-free start could never reach the completion reward
            food.add(self._food_cells[rng.randrange(len(self._food_cells))])
        return PocmanState(*self.spawn, frozenset(food), self.ghost_spawns)

    def step(self, state: PocmanState, action: int, rng: random.Random) -> StepOutcome:
        if not 0 <= action < 4:
            raise InvalidAction(f"action {action} out of range")
        reward = -1.0
        dx, dy = _DELTAS[action]
        nx, ny = state.x + dx, state.y + dy
        if not self._is_free(nx, ny):
            reward -= 100.0
            nx, ny = state.x, state.y
        pos = (nx, ny)
        food = state.food
        if pos in food:
            reward += 1.0
            food = food - {pos}
            if not food:
                reward += 1000.0
                done = PocmanState(nx, ny, food, state.ghosts)
                return StepOutcome(done, self._observe(pos, food, state.ghosts), reward, True)
        ghosts: list[tuple[int, int]] = []
        eaten = False
        for g in state.ghosts:
            g2 = self._move_ghost(g, pos, rng)
            ghosts.append(g2)
            if g2 == pos:
                eaten = True
        if eaten:
            reward -= 100.0
        nxt = PocmanState(nx, ny, food, tuple(ghosts))
        return StepOutcome(nxt, self._observe(pos, food, nxt.ghosts), reward, eaten)

    def _move_ghost(
        self, g: tuple[int, int], target: tuple[int, int], rng: random.Random
    ) -> tuple[int, int]:
        gx, gy = g
        dx, dy = target[0] - gx, target[1] - gy
        dist = abs(dx) + abs(dy)
        if dist < CHASE_RADIUS and rng.random() < self.rho_g:
            step_x = (gx + (1 if dx > 0 else -1), gy)
            step_y = (gx, gy + (1 if dy > 0 else -1))
            if abs(dx) > abs(dy):
                cand = step_x
            elif abs(dy) > abs(dx):
                cand = step_y
            else:
                cand = (step_x, step_y)[rng.randrange(2)]
            if self._is_free(*cand):
                return cand
        nbrs = self.neighbors.get(g, ())
        if not nbrs:
            return g
        return nbrs[rng.randrange(len(nbrs))]

    def _observe(
        self,
        pos: tuple[int, int],
        food: frozenset[tuple[int, int]],
        ghosts: Sequence[tuple[int, int]],
    ) -> int:
        x, y = pos
        obs = 0
        for (ox, oy), dirs in _OBS_OFFSETS:
            if (x + ox, y + oy) in food:
                for d in dirs:
                    obs |= 1 << d
        for gx, gy in ghosts:
            dx, dy = gx - x, gy - y
            if abs(dx) + abs(dy) <= OBS_RADIUS:
                for d in _classify(dx, -dy):
                    obs |= 1 << (4 + d)
        return obs

    def perturb(self, state: PocmanState, rng: random.Random) -> PocmanState:
        # reinvigoration: nudge one ghost by at most one cell, redraw one food cell
        ghosts = list(state.ghosts)
        if ghosts:
            i = rng.randrange(len(ghosts))
            cands = (ghosts[i],) + self.neighbors.get(ghosts[i], ())
            ghosts[i] = cands[rng.randrange(len(cands))]
        food = set(state.food)
        cell = self._food_cells[rng.randrange(len(self._food_cells))]
        if cell != (state.x, state.y):
            if rng.random() < self.rho_f:
                food.add(cell)
            else:
                food.discard(cell)
        return PocmanState(state.x, state.y, frozenset(food), tuple(ghosts))

    def resample_hidden(self, state: PocmanState, rng: random.Random) -> PocmanState:
        pos = (state.x, state.y)
        food = {c for c in self._food_cells if c != pos and rng.random() < self.rho_f}
        if not food:
            food.add(self._food_cells[rng.randrange(len(self._food_cells))])
        ghost_cells = [c for c in self.free_cells if c != pos]
        ghosts = tuple(
            ghost_cells[rng.randrange(len(ghost_cells))] for _ in state.ghosts
        )
        return PocmanState(state.x, state.y, frozenset(food), ghosts)

    def preferred_action(
        self, state: PocmanState, prev_action: Optional[int], rng: random.Random
    ) -> int:
        """Move where no ghost nor wall is seen; avoid changing direction."""
        x, y = state.x, state.y
        seen = [False] * 4
        for gx, gy in state.ghosts:
            dx, dy = gx - x, gy - y
            if abs(dx) + abs(dy) <= OBS_RADIUS:
                for d in _classify(dx, -dy):
                    seen[d] = True
        good = [
            d
            for d in range(4)
            if self._is_free(x + _DELTAS[d][0], y + _DELTAS[d][1]) and not seen[d]
        ]
        if prev_action in good:
            return prev_action
        if good:
            return good[0]
        open_dirs = [
            d for d in range(4) if self._is_free(x + _DELTAS[d][0], y + _DELTAS[d][1])
        ]
        if prev_action in open_dirs:
            return prev_action
        return open_dirs[0] if open_dirs else NORTH


def featurize(model: PocmanModel, belief: ParticleBelief) -> frozenset[Atom]:
    """food(C,D,V) and ghost(C,D,V) for D in 1..6, plus wall(C) atoms.

    V is the discretized percentage of particles with at least one pellet
    (or ghost) within Manhattan distance D in direction C, so V is
    nondecreasing in D.  Time-free atoms.
    """
    particles = belief.particles
    first: PocmanState = particles[0]
    x, y = first.x, first.y
    n = len(particles)
    food_counts = [[0] * (FEATURE_RANGE + 1) for _ in range(4)]
    ghost_counts = [[0] * (FEATURE_RANGE + 1) for _ in range(4)]
    big = FEATURE_RANGE + 1
    for p in particles:
        fmin = [big] * 4
        gmin = [big] * 4
        for (fx, fy) in p.food:
            dd = abs(fx - x) + abs(fy - y)
            if dd > FEATURE_RANGE:
                continue
            for c in _classify(fx - x, y - fy):
                if dd < fmin[c]:
                    fmin[c] = dd
        for (gx, gy) in p.ghosts:
            dd = abs(gx - x) + abs(gy - y)
            if dd > FEATURE_RANGE:
                continue
            for c in _classify(gx - x, y - gy):
                if dd < gmin[c]:
                    gmin[c] = dd
        for c in range(4):
            for d in range(1, FEATURE_RANGE + 1):
                if fmin[c] <= d:
                    food_counts[c][d] += 1
                if gmin[c] <= d:
                    ghost_counts[c][d] += 1
    atoms: list[Atom] = []
    for c in range(4):
        name = DIR_NAMES[c]
        for d in range(1, FEATURE_RANGE + 1):
            atoms.append(Atom("food", (name, d, discretize_percent(food_counts[c][d] / n))))
            atoms.append(Atom("ghost", (name, d, discretize_percent(ghost_counts[c][d] / n))))
        dx, dy = _DELTAS[c]
        if not model._is_free(x + dx, y + dy):
            atoms.append(Atom("wall", (name,)))
    return frozenset(atoms)


def position_atom(state: PocmanState) -> Atom:
    """Observable agent cell, consumed by the symbolic transition rules."""
    return Atom("pos", (state.x, state.y))


def background_atoms(model: PocmanModel) -> tuple[Atom, ...]:
    """Static maze facts: one wall_at(x,y) per blocked or out-of-range cell ring."""
    atoms = [Atom("wall_at", (x, y)) for (x, y) in sorted(model.walls)]
    for x in range(-1, model.width + 1):
        for y in (-1, model.height):
            atoms.append(Atom("wall_at", (x, y)))
    for y in range(model.height):
        atoms.append(Atom("wall_at", (-1, y)))
        atoms.append(Atom("wall_at", (model.width, y)))
    return tuple(dict.fromkeys(atoms))


def action_term(action: int) -> Compound:
    if not 0 <= action < 4:
        raise InvalidAction(f"action {action} out of range")
    return Compound("move", (DIR_NAMES[action],))


def term_action(term) -> int:
    if isinstance(term, Compound) and term.functor == "move" and len(term.args) == 1:
        name = term.args[0]
        if isinstance(name, str) and name in _NAME_TO_DIR:
            return _NAME_TO_DIR[name]
    raise InvalidAtom(f"not a pocman action term: {term!r}")


MOVEMENT_ACTIONS = (NORTH, SOUTH, EAST, WEST)
