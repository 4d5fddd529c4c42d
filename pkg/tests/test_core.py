import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from macroplan.core import (
    BeliefCollapse,
    History,
    NoParticles,
    ParticleBelief,
    StepOutcome,
    belief_update,
    discounted_return,
    fresh_posterior_belief,
    sample_initial_belief,
)


class CountingChain:
    """Integer-state stub: state increments, observation is parity of the result."""

    action_count = 2
    discount = 0.95
    max_reward = 1.0
    default_action = 0

    def __init__(self):
        self.step_calls = 0

    def step(self, state, action, rng):
        self.step_calls += 1
        nxt = state + 1
        return StepOutcome(nxt, nxt % 2, 1.0, False)

    def sample_initial_state(self, rng):
        return rng.randrange(10)

    def perturb(self, state, rng):
        # parity-preserving shift keeps the observation class intact
        return state + 2

    def resample_hidden(self, state, rng):
        return rng.randrange(10)

    def preferred_action(self, state, prev_action, rng):
        return 0


class TerminalAtSix(CountingChain):
    def step(self, state, action, rng):
        self.step_calls += 1
        nxt = state + 1
        return StepOutcome(nxt, 0, 1.0, nxt == 6)


def test_discounted_return_frozen_values():
    assert discounted_return([10], 0.95) == 10.0
    assert discounted_return([], 0.95) == 0.0
    assert discounted_return([1, 1, 1], 0.5) == 1.75


@given(
    st.lists(st.floats(min_value=-100, max_value=100), min_size=1, max_size=8),
    st.integers(min_value=0, max_value=7),
    st.floats(min_value=0.01, max_value=10.0),
)
def test_discounted_return_monotone_in_each_reward(rewards, idx, bump):
    idx = idx % len(rewards)
    gamma = 0.9
    bumped = list(rewards)
    bumped[idx] += bump
    assert discounted_return(bumped, gamma) >= discounted_return(rewards, gamma)


def test_initial_belief_size_and_determinism():
    model = CountingChain()
    b1 = sample_initial_belief(model, 50, random.Random(7))
    b2 = sample_initial_belief(model, 50, random.Random(7))
    assert len(b1) == 50 and b1.target_size == 50
    assert b1.particles == b2.particles


def test_belief_is_immutable():
    b = ParticleBelief((1, 2), 2)
    with pytest.raises(AttributeError):
        b.particles = (3,)


def test_update_filters_on_observation_and_restores_size():
    model = CountingChain()
    belief = ParticleBelief(tuple([0, 1] * 25), 50)
    # observation 1 means next state is odd, so only even sources survive
    updated = belief_update(belief, 0, 1, model, random.Random(3))
    assert len(updated) == 50
    assert all(s % 2 == 1 for s in updated.particles)


def test_update_determinism():
    belief = ParticleBelief(tuple(range(20)), 20)
    u1 = belief_update(belief, 0, 1, CountingChain(), random.Random(11))
    u2 = belief_update(belief, 0, 1, CountingChain(), random.Random(11))
    assert u1.particles == u2.particles


def test_update_rejects_terminal_next_states():
    model = TerminalAtSix()
    belief = ParticleBelief((5, 0, 5, 0), 4)
    updated = belief_update(belief, 0, 0, model, random.Random(0))
    # every survivor descends from state 0; state 5 steps into terminal 6
    assert all(s % 2 == 1 for s in updated.particles)
    assert 6 not in updated.particles


def test_collapse_raises_within_budget():
    model = CountingChain()
    belief = ParticleBelief(tuple(range(0, 40, 2)), 20)
    # asking for observation 0 while every successor is odd can never match
    with pytest.raises(BeliefCollapse):
        belief_update(belief, 0, 0, model, random.Random(1))
    assert model.step_calls == 10 * 20


def test_update_empty_belief_raises():
    empty = ParticleBelief((), 1)
    with pytest.raises(NoParticles):
        belief_update(empty, 0, 0, CountingChain(), random.Random(0))


def test_fresh_posterior_uses_hidden_resampler():
    model = CountingChain()
    belief = fresh_posterior_belief(123, model, 30, random.Random(5))
    assert len(belief) == 30
    assert all(0 <= s < 10 for s in belief.particles)


def test_history_append_only():
    h = History()
    h.append(2, 7)
    h.append(0, 1)
    assert h.steps == ((2, 7), (0, 1))
    assert len(h) == 2
    snapshot = h.steps
    h.append(1, 1)
    assert snapshot == ((2, 7), (0, 1))
