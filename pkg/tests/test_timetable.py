from hypothesis import given
from hypothesis import strategies as st

from conftest import make
from ttef.domains import geq, leq
from ttef.profile import EMPTY, build_profile
from ttef.psplib import example1
from ttef.timetable import tt_check, tt_filter


def test_overload_detected_and_explained():
    inst, D = make([2, 2], [1, 1], 1, [(0, 4), (0, 4)])
    D.decide(leq(0, 0))
    D.decide(leq(1, 0))
    ex = tt_check(inst, D, build_profile(inst, D), D)
    assert ex.is_failure
    # [[-1 <= S_i]] is true over the initial window and drops out
    assert set(ex.antecedents) == {leq(0, 0), leq(1, 0)}
    assert ex.window == (0, 1)


def test_height_equal_to_capacity_is_fine():
    inst, D = make([2, 2], [1, 1], 2, [(0, 0), (0, 0)])
    assert tt_check(inst, D, build_profile(inst, D)) is None


def test_empty_profile():
    inst, D = make([2], [1], 1, [(0, 5)])
    assert tt_check(inst, D, EMPTY) is None


def test_contributors_prefer_large_usage():
    inst, D = make([2, 2, 2], [1, 3, 2], 4, [(0, 0)] * 3, horizon=6)
    ex = tt_check(inst, D, build_profile(inst, D), D)
    assert ex is not None


def test_push_past_saturated_segment():
    inst, D = make([3, 2], [2, 1], 2, [(0, 6), (0, 6)])
    D.decide(leq(0, 0))
    done, conflict = tt_filter(inst, D, build_profile(inst, D))
    assert conflict is None and D.lb[1] == 3
    (ex,) = done
    assert ex.consequent == geq(1, 3) and ex.antecedents == (leq(0, 0),)


def test_fits_beside_profile():
    inst, D = make([3, 2], [1, 1], 2, [(0, 0), (0, 6)])
    done, _ = tt_filter(inst, D, build_profile(inst, D))
    assert done == [] and D.lb[1] == 0


def test_example1_root_has_nothing_to_push():
    P = example1()
    inst = P.resources[0]
    from ttef.domains import DomainStore
    D = DomainStore([0, 0, 0, 3, 2], [7, 4, 8, 6, 9])
    done, _ = tt_filter(inst, D, build_profile(inst, D))
    assert done == []


def test_upper_bound_push():
    inst, D = make([3, 2], [2, 1], 2, [(4, 4), (0, 6)])
    done, _ = tt_filter(inst, D, build_profile(inst, D))
    assert D.ub[1] == 2 and done[0].consequent == leq(1, 2)


@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 2), st.integers(0, 4), st.integers(0, 4)),
                min_size=2, max_size=5))
def test_filter_is_idempotent(rows):
    inst, D = make([p for p, *_ in rows], [r for _, r, *_ in rows], 2,
                   [(min(a, b), max(a, b)) for *_, a, b in rows])
    profile = build_profile(inst, D)
    if tt_check(inst, D, profile) is not None:
        return
    _, conflict = tt_filter(inst, D, profile)
    if conflict is not None:
        return
    # each push already runs until a gap fits, so the same profile yields nothing new
    again, _ = tt_filter(inst, D, profile)
    assert again == []
