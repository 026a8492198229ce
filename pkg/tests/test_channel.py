import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from altcsit.channel import (ChannelRealization, CsitPattern, CsitState, CsitView,
                             ForbiddenAccess, LambdaDistribution, SlotCsit, draw_channels,
                             lambda_of, read_coefficient)

CASE1 = CsitPattern.parse("DD,ND,PN,NN")

slot_tokens = st.sampled_from(["".join(p) for p in itertools.product("PDN", repeat=2)])
patterns = st.lists(slot_tokens, min_size=1, max_size=8).map(lambda s: CsitPattern.parse(",".join(s)))


def test_draw_is_deterministic():
    a, b = draw_channels(7, 4), draw_channels(7, 4)
    assert np.array_equal(a.h, b.h)
    assert a.h.shape == (2, 2, 4)


def test_different_seeds_differ():
    assert not np.array_equal(draw_channels(7, 4).h, draw_channels(8, 4).h)


def test_no_tiny_coefficients():
    h = draw_channels(7, 4).h
    assert h.size == 16
    assert np.all(np.abs(h) >= 1e-12)


def test_floor_forces_resampling():
    # a floor near the median magnitude forces many redraws
    h = draw_channels(3, 4, trials=200, floor=0.8).h
    assert np.all(np.abs(h) >= 0.8)


def test_draw_statistics():
    h = draw_channels(11, 4, trials=50_000).h
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01
    assert abs(np.mean(h)) < 0.01
    assert abs(np.mean(h ** 2)) < 0.01  # circular symmetry


def test_draw_rejects_empty_horizon():
    with pytest.raises(ValueError):
        draw_channels(0, 0)


def test_realization_validation():
    with pytest.raises(ValueError):
        ChannelRealization(np.zeros((2, 2, 4)))
    with pytest.raises(ValueError):
        ChannelRealization(np.ones((3, 2, 4)))
    r = draw_channels(1, 4)
    with pytest.raises(ValueError):
        r.h[0, 0, 0] = 1.0


def test_coefficient_indexing():
    r = draw_channels(5, 4)
    assert r.coefficient(2, 1, 3) == r.h[1, 0, 2]
    with pytest.raises(IndexError):
        r.coefficient(3, 1, 1)


def test_perfect_current_slot_allowed():
    view = CsitView(draw_channels(1, 4), CASE1, slot=3, transmitter=1)
    assert read_coefficient(view, 1, 3) == view.channels.coefficient(1, 1, 3)


def test_delayed_past_slot_allowed():
    view = CsitView(draw_channels(1, 4), CASE1, slot=2, transmitter=1)
    assert read_coefficient(view, 2, 1) == view.channels.coefficient(2, 1, 1)


def test_delayed_current_slot_forbidden():
    view = CsitView(draw_channels(1, 4), CASE1, slot=1, transmitter=1)
    with pytest.raises(ForbiddenAccess):
        read_coefficient(view, 2, 1)
    assert view.log[-1].allowed is False


def test_view_grants_both_links_of_a_receiver():
    ch = draw_channels(1, 4)
    view = CsitView(ch, CASE1, slot=4, transmitter=1)
    assert view.read(2, 2, link=2) == ch.coefficient(2, 2, 2)


@pytest.mark.parametrize("state,tau,t,allowed", [
    ("P", 2, 2, True), ("P", 1, 2, True), ("P", 3, 2, False),
    ("D", 1, 2, True), ("D", 2, 2, False), ("D", 3, 2, False),
    ("N", 1, 2, False), ("N", 2, 2, False),
])
def test_permission_table(state, tau, t, allowed):
    pattern = CsitPattern((SlotCsit(state, "N"),) * 4)
    view = CsitView(draw_channels(2, 4), pattern, slot=t, transmitter=2)
    if allowed:
        view.read(1, tau)
    else:
        with pytest.raises(ForbiddenAccess):
            view.read(1, tau)
    assert len(view.log) == 1 and view.log[0].allowed is allowed


def test_pattern_parse_and_format():
    p = CsitPattern.parse("(dd, ND,PN,NN)")
    assert str(p) == "DD,ND,PN,NN"
    assert p.receiver_states(1) == (CsitState.D, CsitState.N, CsitState.P, CsitState.N)
    assert p.state(2, 2) is CsitState.D
    with pytest.raises(ValueError):
        CsitPattern.parse("DX,ND")


def test_lambda_case1():
    assert lambda_of(CASE1).as_tuple() == (Fraction(1, 8), Fraction(3, 8), Fraction(1, 2))


def test_lambda_all_n():
    assert lambda_of(CsitPattern.parse("NN,NN,NN,NN")).as_tuple() == (0, 0, 1)


def test_lambda_case3():
    p = CsitPattern.parse("ND,DN,PD,NN")
    assert lambda_of(p).as_tuple() == (Fraction(1, 8), Fraction(3, 8), Fraction(1, 2))


def test_lambda_distribution_validation():
    with pytest.raises(ValueError):
        LambdaDistribution(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        LambdaDistribution(Fraction(-1, 2), Fraction(1), Fraction(1, 2))


@given(patterns)
def test_lambda_sums_to_one(p):
    assert sum(lambda_of(p).as_tuple()) == 1


@given(patterns, st.randoms(use_true_random=False))
def test_lambda_permutation_invariant(p, rnd: random.Random):
    slots = list(p.slots)
    rnd.shuffle(slots)
    shuffled = CsitPattern(tuple(slots))
    swapped = CsitPattern(tuple(s.swapped() for s in p.slots))
    assert lambda_of(shuffled) == lambda_of(p) == lambda_of(swapped)
