import random

from hypothesis import given, settings, strategies as st

from tmv import history as H
from tmv.history import Bounds, History, extensions
from tmv.linearizability import lin, linearized_by
from tmv.opacity import is_opaque
from tmv.stm import norec_cga, tml_cga

from helpers import load, random_history, random_linearization, random_walk_trace


def test_alternating_history_linearizes_itself():
    w = load("example1_witness")
    assert lin(w, w)


def test_example_reordering_that_keeps_op_order():
    h = load("example1")
    # B3 and B2 overlap; W3 overlaps R2; C3 comes last
    ha = h.with_events(H.concat(
        H.BEGIN_PAIR(3), H.BEGIN_PAIR(2), [H.write_inv(3, 0, 4), H.write_resp(3)],
        [H.read_inv(2, 0), H.read_resp(2, 0)], H.COMMIT_PAIR(3)))
    assert lin(h, ha)


def test_reordering_that_breaks_op_order():
    h = load("example1")
    # R2 moved before B3 although B3 responded before R2 was invoked
    ha = h.with_events(H.concat(
        H.BEGIN_PAIR(2), [H.read_inv(2, 0), H.read_resp(2, 0)], H.BEGIN_PAIR(3),
        [H.write_inv(3, 0, 4), H.write_resp(3)], H.COMMIT_PAIR(3)))
    assert H.equivalent(h, ha)
    assert not lin(h, ha)


def test_missing_pair():
    w = load("example1_witness")
    assert not lin(w, w[:-2])


def test_non_alternating_candidate():
    h = load("example1")
    assert not lin(h, h)


def test_pending_invocations_are_dropped():
    h = History(H.concat(H.BEGIN_PAIR(0), [H.read_inv(0, 0)]))
    assert lin(h, h[:2])


class TestLinearizedBy:
    def test_own_trace(self):
        rng = random.Random(7)
        b = Bounds(2, 2, 2)
        for _ in range(30):
            h = History(random_walk_trace(rng, tml_cga(b), 25), b)
            ha = linearized_by(h, tml_cga(b), 30)
            assert ha is not None
            assert any(lin(he, ha) for he in extensions(h))

    def test_h1_not_linearized_by_norec(self):
        h1 = load("h1")
        assert linearized_by(h1, norec_cga(h1.bounds), 12) is None

    def test_h1_linearized_by_tml(self):
        h1 = load("h1")
        assert linearized_by(h1, tml_cga(h1.bounds), 12) is not None

    def test_example_against_tml(self):
        h = load("example1")
        ha = linearized_by(h, tml_cga(h.bounds), 12)
        assert ha is not None
        assert H.is_alternating(ha)
        assert any(lin(he, ha) for he in extensions(h))

    def test_depth_bound(self):
        h = load("example1")
        assert linearized_by(h, tml_cga(h.bounds), 9) is None


@st.composite
def histories(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    b = Bounds(draw(st.integers(1, 3)), draw(st.integers(1, 2)), 2)
    return random_history(random.Random(seed), b, draw(st.integers(0, 14))), seed


@settings(max_examples=300, deadline=None)
@given(histories())
def test_random_linearizations_satisfy_lin(arg):
    h, seed = arg
    rng = random.Random(seed)
    he = rng.choice(extensions(h))
    ha = random_linearization(rng, he)
    assert lin(he, ha)


@settings(max_examples=300, deadline=None)
@given(histories())
def test_opaque_linearization_implies_opaque(arg):
    h, seed = arg
    rng = random.Random(seed)
    he = rng.choice(extensions(h))
    ha = random_linearization(rng, he)
    if is_opaque(ha):
        assert is_opaque(h)

