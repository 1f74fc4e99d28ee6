import pytest

from ttef.model import Activity, Bounds, Instance, Project, derived_bounds, free_fixed_split, window_length
from ttef.psplib import example1


def bounds(lb, ub):
    return Bounds(list(lb), list(ub))


def test_activity_energy():
    assert Activity(0, 3, 4).energy == 12
    assert Activity(1, 0, 7).energy == 0


def test_activity_rejects_negative():
    with pytest.raises(ValueError):
        Activity(0, -1, 2)


class TestDerivedBounds:
    def test_plain(self):
        inst = Instance.build([3], [1], 1, windows=[(0, 5)])
        assert derived_bounds(inst, 0, bounds([0], [2])) == (0, 2, 3, 5)

    def test_zero_duration(self):
        inst = Instance.build([0], [1], 1, windows=[(0, 6)])
        assert derived_bounds(inst, 0, bounds([4], [4])) == (4, 4, 4, 4)

    def test_example1_activity_d_after_precedence(self):
        P = example1()
        inst = P.resources[0]
        # B before D pushes est_D to p_B = 3; the deadline caps lst_D at 6
        D = bounds([0, 0, 0, 3, 0], list(P.lst0))
        assert derived_bounds(inst, 3, D) == (3, 6, 7, 10)


class TestFreeFixedSplit:
    def test_partial(self):
        inst = Instance.build([3], [2], 2, windows=[(0, 4)])
        s = free_fixed_split(inst, 0, bounds([0], [2]))
        assert (s.p_tt, s.e_tt, s.p_ef, s.e_ef, s.lst_ef) == (1, 2, 2, 4, 3)

    def test_no_compulsory_part(self):
        inst = Instance.build([2], [1], 1, windows=[(0, 4)])
        s = free_fixed_split(inst, 0, bounds([0], [2]))
        assert s.p_tt == 0 and s.p_ef == 2

    def test_fixed(self):
        inst = Instance.build([4], [1], 1, windows=[(5, 5)])
        s = free_fixed_split(inst, 0, bounds([5], [5]))
        assert (s.p_tt, s.p_ef, s.e_ef) == (4, 0, 0)


class TestWindowLength:
    def test_contained_free_activity(self):
        inst = Instance.build([2], [1], 1, windows=[(1, 3)])
        assert window_length(inst, 0, 0, 6, bounds([1], [3])) == 2

    def test_right_side_without_overlap(self):
        inst = Instance.build([2], [1], 1, windows=[(0, 8)])
        assert window_length(inst, 0, 0, 3, bounds([0], [8])) == 0

    def test_compulsory_overlap_when_starting_left(self):
        inst = Instance.build([3], [1], 1, windows=[(1, 1)], horizon=10)
        # est 1 < begin 2, lst 1, ect 4
        assert window_length(inst, 0, 2, 3, bounds([1], [1])) == 1

    def test_fixed_activity_inside_window_is_capped(self):
        inst = Instance.build([2], [1], 1, windows=[(1, 1)], horizon=10)
        assert window_length(inst, 0, 0, 8, bounds([1], [1])) == 2


def test_instance_validation():
    with pytest.raises(ValueError):
        Instance.build([2, 2], [1, 1], 1, precedences=[(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Instance.build([2], [1], 1, windows=[(3, 1)])
    with pytest.raises(ValueError):
        Instance.build([2], [1], 1, windows=[(0, 5)], horizon=4)


def test_overloaded_activities():
    inst = Instance.build([2, 0, 3], [5, 9, 1], 4)
    assert inst.overloaded_activities() == [0]


def test_shift_moves_windows_and_horizon():
    inst = Instance.build([2, 3], [1, 1], 1, windows=[(0, 4), (1, 3)])
    s = inst.shifted(13)
    assert s.est0 == (13, 14) and s.lst0 == (17, 16) and s.horizon == inst.horizon + 13


def test_project_with_deadline():
    P = example1().with_deadline(9)
    assert P.lst0 == (6, 6, 7, 5, 8)
    assert not example1().deadline_feasible(0)
    assert isinstance(P, Project) and P.horizon == 9
