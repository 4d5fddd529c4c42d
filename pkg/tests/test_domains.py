import random
from collections import deque
from pathlib import Path

import pytest

from macroplan.core import ParticleBelief
from macroplan.domains import InvalidAction, InvalidAtom, discretize_percent
from macroplan.domains import pocman, rocksample
from macroplan.logic.syntax import Atom, Compound

ASSETS = Path(__file__).resolve().parents[1] / "src" / "macroplan" / "assets"


# ---------------------------------------------------------------- rocksample


def small_rs():
    return rocksample.RocksampleModel(5, [(2, 2), (4, 0), (0, 2)])


def test_rs_east_exit_is_terminal_plus_ten():
    m = small_rs()
    s = rocksample.RocksampleState(4, 1, (True, False, True), (False,) * 3)
    out = m.step(s, rocksample.EAST, random.Random(0))
    assert out.reward == 10.0 and out.terminal


def test_rs_border_moves_are_noops_with_zero_reward():
    m = small_rs()
    s = rocksample.RocksampleState(0, 4, (True, False, True), (False,) * 3)
    for a in (rocksample.NORTH, rocksample.WEST):
        out = m.step(s, a, random.Random(0))
        assert out.next_state == s and out.reward == 0.0 and not out.terminal


def test_rs_sample_rewards_and_marks():
    m = small_rs()
    s = rocksample.RocksampleState(2, 2, (True, False, True), (False,) * 3)
    out = m.step(s, rocksample.SAMPLE, random.Random(0))
    assert out.reward == 10.0 and out.next_state.sampled == (True, False, False)
    bad = rocksample.RocksampleState(4, 0, (True, False, True), (False,) * 3)
    assert m.step(bad, rocksample.SAMPLE, random.Random(0)).reward == -10.0
    off = rocksample.RocksampleState(1, 1, (True, False, True), (False,) * 3)
    out = m.step(off, rocksample.SAMPLE, random.Random(0))
    assert out.reward == -10.0 and out.next_state == off
    # re-sampling an already sampled rock is penalized, state untouched
    again = out.next_state._replace(x=2, y=2, sampled=(True, True, True))
    assert m.step(again, rocksample.SAMPLE, random.Random(0)).reward == -10.0


def test_rs_check_exact_at_distance_zero():
    m = small_rs()
    s = rocksample.RocksampleState(2, 2, (True, False, True), (False,) * 3)
    rng = random.Random(9)
    for _ in range(50):
        assert m.step(s, m.check_action(0), rng).observation == rocksample.OBS_GOOD
    s2 = s._replace(values=(False, False, True))
    for _ in range(50):
        assert m.step(s2, m.check_action(0), rng).observation == rocksample.OBS_BAD


def test_rs_check_accuracy_tracks_manhattan_distance():
    # rock 1 at (4,0) seen from (0,4): d = 8, accuracy (1 + 2^(-8/20)) / 2
    m = small_rs()
    s = rocksample.RocksampleState(0, 4, (False, True, False), (False,) * 3)
    rng = random.Random(123)
    trials = 6000
    hits = sum(
        1
        for _ in range(trials)
        if m.step(s, m.check_action(1), rng).observation == rocksample.OBS_GOOD
    )
    expect = (1.0 + 2.0 ** (-8 / 20.0)) / 2.0
    assert abs(hits / trials - expect) < 0.02


def test_rs_check_invalid_rock_raises():
    m = small_rs()
    with pytest.raises(InvalidAction):
        m.check_action(3)
    with pytest.raises(InvalidAction):
        m.step(
            rocksample.RocksampleState(0, 0, (True,) * 3, (False,) * 3),
            99,
            random.Random(0),
        )


def test_rs_featurize_worked_scenario():
    # agent at (3,5); rock 2 two cells east, 80% of particles call it valuable
    m = rocksample.RocksampleModel(12, [(1, 1), (9, 9), (5, 5)])
    parts = []
    for i in range(10):
        values = (False, True, i < 8)
        parts.append(rocksample.RocksampleState(3, 5, values, (True, False, False)))
    feats = rocksample.featurize(m, ParticleBelief(tuple(parts), 10))
    assert Atom("dist", (2, 2)) in feats
    assert Atom("delta_x", (2, 2)) in feats
    assert Atom("delta_y", (2, 0)) in feats
    assert Atom("guess", (2, 80)) in feats
    # sampled rock 0 contributes nothing
    assert not any(a.args and a.args[0] == 0 for a in feats)
    assert Atom("guess", (1, 100)) in feats
    assert Atom("delta_x", (1, 6)) in feats and Atom("delta_y", (1, 4)) in feats


def test_rs_guess_values_are_clean_multiples_of_ten():
    assert discretize_percent(0.8) == 80
    assert discretize_percent(0.75) == 80
    assert discretize_percent(0.849) == 80
    assert discretize_percent(0.85) == 90
    assert discretize_percent(0.0) == 0
    assert discretize_percent(1.0) == 100


def test_rs_action_terms_round_trip():
    m = small_rs()
    for a in rocksample.MOVEMENT_ACTIONS:
        assert rocksample.term_action(m, rocksample.action_term(m, a)) == a
    on_rock = rocksample.RocksampleState(2, 2, (True,) * 3, (False,) * 3)
    term = rocksample.action_term(m, rocksample.SAMPLE, on_rock)
    assert term == Compound("sample", (0,))
    assert rocksample.term_action(m, term) == rocksample.SAMPLE
    assert rocksample.term_action(m, Compound("check", (2,))) == m.check_action(2)
    with pytest.raises(InvalidAtom):
        rocksample.term_action(m, "fly")
    with pytest.raises(InvalidAction):
        rocksample.action_term(m, rocksample.SAMPLE)


def test_rs_perturb_flips_one_value_and_resample_keeps_observables():
    m = small_rs()
    s = rocksample.RocksampleState(1, 3, (True, False, True), (False, True, False))
    p = m.perturb(s, random.Random(4))
    diffs = sum(a != b for a, b in zip(s.values, p.values))
    assert diffs == 1 and p.sampled == s.sampled and (p.x, p.y) == (1, 3)
    r = m.resample_hidden(s, random.Random(4))
    assert r.sampled == s.sampled and (r.x, r.y) == (1, 3)


# ------------------------------------------------------------------- pocman


def open_maze(n=7):
    rows = ["#" * n]
    rows += ["#" + "." * (n - 2) + "#" for _ in range(n - 2)]
    rows += ["#" * n]
    return rows


def test_maze_loader_validates():
    with pytest.raises(ValueError):
        pocman.load_maze("###\n#.##\n###")
    with pytest.raises(ValueError):
        pocman.load_maze("###\n#x#\n###")
    with pytest.raises(ValueError):
        pocman.load_maze("")
    assert pocman.load_maze("###\n#.#\n###") == ("###", "#.#", "###")


def _connected(rows):
    free = {
        (x, y) for y, r in enumerate(rows) for x, c in enumerate(r) if c == "."
    }
    start = next(iter(free))
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            c = (x + dx, y + dy)
            if c in free and c not in seen:
                seen.add(c)
                queue.append(c)
    return seen == free


def test_shipped_mazes_are_valid_and_connected():
    small = pocman.load_maze_file(ASSETS / "maze_10x10.txt")
    big = pocman.load_maze_file(ASSETS / "maze_17x19.txt")
    assert len(small) == 10 and len(small[0]) == 10
    assert len(big) == 19 and len(big[0]) == 17
    assert _connected(small) and _connected(big)


def test_spawn_points_are_deterministic():
    small = pocman.PocmanModel(
        pocman.load_maze_file(ASSETS / "maze_10x10.txt"), 2, 0.5, 0.75
    )
    assert small.spawn == (4, 8)
    # ghosts take the free cells farthest from the agent spawn
    assert small.ghost_spawns == ((8, 1), (1, 1))
    big = pocman.PocmanModel(
        pocman.load_maze_file(ASSETS / "maze_17x19.txt"), 4, 0.5, 0.75
    )
    assert big.spawn == (7, 17)
    assert big.ghost_spawns == ((15, 1), (14, 1), (15, 2), (1, 1))


def test_pm_wall_bump():
    m = pocman.PocmanModel(open_maze(), 0, 0.5, 0.75)
    s = pocman.PocmanState(1, 1, frozenset([(3, 3)]), ())
    out = m.step(s, pocman.NORTH, random.Random(0))
    assert out.reward == -101.0
    assert (out.next_state.x, out.next_state.y) == (1, 1)
    assert not out.terminal


def test_pm_pellet_rewards():
    m = pocman.PocmanModel(open_maze(), 0, 0.5, 0.75)
    two = pocman.PocmanState(1, 1, frozenset([(2, 1), (4, 4)]), ())
    out = m.step(two, pocman.EAST, random.Random(0))
    assert out.reward == 0.0 and not out.terminal  # -1 step + 1 pellet
    assert out.next_state.food == frozenset([(4, 4)])
    last = pocman.PocmanState(1, 1, frozenset([(2, 1)]), ())
    out = m.step(last, pocman.EAST, random.Random(0))
    assert out.reward == 1000.0 and out.terminal


def test_pm_ghost_collision_is_terminal():
    m = pocman.PocmanModel(open_maze(), 0, 0.5, 1.0)
    s = pocman.PocmanState(1, 1, frozenset([(5, 5)]), ((3, 1),))
    out = m.step(s, pocman.EAST, random.Random(0))
    # pocman moves to (2,1); the ghost, one cell east, chases onto it
    assert out.terminal and out.reward == -101.0
    assert out.next_state.ghosts == ((2, 1),)


def test_pm_ghost_chase_policy():
    m = pocman.PocmanModel(open_maze(9), 0, 0.5, 1.0)
    rng = random.Random(0)
    # distance 4: never chases, only wanders to an adjacent free cell
    for _ in range(30):
        g = m._move_ghost((5, 1), (1, 1), rng)
        assert g in m.neighbors[(5, 1)]
    # distance 3 with a dominant x axis: deterministic step toward the target
    for _ in range(10):
        assert m._move_ghost((4, 2), (1, 2), rng) == (3, 2)
    # axis tie within chase range: either axis, always reducing distance
    for _ in range(20):
        g = m._move_ghost((2, 2), (1, 1), rng)
        assert g in ((1, 2), (2, 1))


def test_pm_observation_bits():
    m = pocman.PocmanModel(open_maze(9), 0, 0.5, 0.75)
    food = frozenset([(4, 1), (6, 3)])
    ghosts = ((5, 4),)
    # from (4,3): food north at 2 (bit 0), food east at 2 (bit 2),
    # ghost at a southeast tie (bits 5 and 6)
    obs = m._observe((4, 3), food, ghosts)
    assert obs == (1 << 0) | (1 << 2) | (1 << 5) | (1 << 6) == 101


def test_pm_featurize_buckets_and_walls():
    maze = pocman.load_maze_file(ASSETS / "maze_10x10.txt")
    m = pocman.PocmanModel(maze, 2, 0.5, 0.75)
    a = pocman.PocmanState(4, 3, frozenset([(4, 1)]), ((4, 9),))
    b = pocman.PocmanState(4, 3, frozenset([(4, 1), (7, 3)]), ((4, 9),))
    feats = pocman.featurize(m, ParticleBelief((a, b), 2))
    assert Atom("food", ("north", 1, 0)) in feats
    assert Atom("food", ("north", 2, 100)) in feats
    assert Atom("food", ("north", 6, 100)) in feats
    assert Atom("food", ("east", 2, 0)) in feats
    assert Atom("food", ("east", 3, 50)) in feats
    assert Atom("ghost", ("south", 6, 100)) in feats
    assert Atom("ghost", ("south", 5, 0)) in feats
    # V is cumulative in D for every direction
    for pred in ("food", "ghost"):
        for c in pocman.DIR_NAMES:
            vals = sorted(
                (at.args[1], at.args[2])
                for at in feats
                if at.pred == pred and at.args[0] == c
            )
            assert len(vals) == 6
            assert all(x[1] <= y[1] for x, y in zip(vals, vals[1:]))
    corner = pocman.PocmanState(1, 1, frozenset([(4, 1)]), ())
    feats = pocman.featurize(m, ParticleBelief((corner,), 1))
    assert Atom("wall", ("north",)) in feats
    assert Atom("wall", ("west",)) in feats
    assert Atom("wall", ("south",)) not in feats


def test_pm_preferred_action_avoids_seen_ghosts_and_walls():
    m = pocman.PocmanModel(open_maze(9), 0, 0.5, 0.75)
    s = pocman.PocmanState(4, 3, frozenset([(1, 1)]), ((6, 3),))
    rng = random.Random(0)
    # ghost seen east; previous heading east must be abandoned
    assert m.preferred_action(s, pocman.EAST, rng) == pocman.NORTH
    assert m.preferred_action(s, pocman.SOUTH, rng) == pocman.SOUTH
    wedged = pocman.PocmanState(1, 1, frozenset([(5, 5)]), ((3, 1), (1, 3)))
    # ghosts seen east and south, walls north and west: fall back to open dirs
    got = m.preferred_action(wedged, None, rng)
    assert got in (pocman.SOUTH, pocman.EAST)


def test_pm_initial_state_and_determinism():
    maze = pocman.load_maze_file(ASSETS / "maze_10x10.txt")
    m = pocman.PocmanModel(maze, 2, 0.5, 0.75)
    s1 = m.sample_initial_state(random.Random(42))
    s2 = m.sample_initial_state(random.Random(42))
    assert s1 == s2
    assert (s1.x, s1.y) == m.spawn
    assert s1.ghosts == m.ghost_spawns
    assert s1.food and all(c in m._food_cells for c in s1.food)
    empty_risk = pocman.PocmanModel(maze, 2, 0.0, 0.75)
    s3 = empty_risk.sample_initial_state(random.Random(0))
    assert len(s3.food) == 1


def test_pm_action_terms_round_trip():
    for a in range(4):
        term = pocman.action_term(a)
        assert term == Compound("move", (pocman.DIR_NAMES[a],))
        assert pocman.term_action(term) == a
    with pytest.raises(InvalidAtom):
        pocman.term_action(Compound("move", ("up",)))
    with pytest.raises(InvalidAction):
        pocman.action_term(7)


def test_pm_background_atoms_ring_the_maze():
    m = pocman.PocmanModel(open_maze(5), 0, 0.5, 0.5)
    bg = pocman.background_atoms(m)
    assert Atom("wall_at", (0, 0)) in bg
    assert Atom("wall_at", (-1, 2)) in bg
    assert Atom("wall_at", (5, 5)) in bg
    assert Atom("wall_at", (2, 2)) not in bg
