import pytest
from hypothesis import given
from hypothesis import strategies as st

from ttef.domains import DomainStore, Explanation, Lit, Update, geq, leq


def store():
    return DomainStore([0, 0], [10, 10])


def reason(lit):
    return Explanation((), lit, kind="test")


def test_set_lb_changes():
    D = store()
    assert D.set_lb(0, 3, reason(geq(0, 3))) is Update.CHANGED
    assert D.lb[0] == 3


def test_set_lb_stale():
    D = store()
    D.set_lb(0, 5, reason(geq(0, 5)))
    assert D.set_lb(0, 3, reason(geq(0, 3))) is Update.UNCHANGED
    assert D.lb[0] == 5


def test_set_lb_past_ub_conflicts():
    D = DomainStore([0], [2])
    D.set_ub(0, 2, None)
    assert D.set_lb(0, 3, reason(geq(0, 3))) is Update.CONFLICT
    assert D.conflict.is_failure


def test_conflict_carries_opposing_bound():
    D = DomainStore([0], [10])
    D.decide(leq(0, 2))
    D.set_lb(0, 3, Explanation((geq(1, 1),), geq(0, 3)))
    assert leq(0, 2) in D.conflict.antecedents


def test_decide_then_backtrack():
    D = store()
    D.decide(leq(1, 4))
    assert D.literal_holds(leq(1, 4))
    D.backtrack_to(0)
    assert not D.literal_holds(leq(1, 4))
    assert (D.lb, D.ub) == ([0, 0], [10, 10])


def test_upper_initial_bound_always_holds():
    D = store()
    assert D.literal_holds(leq(0, 10))
    assert D.normalize(leq(0, 10)) is True
    assert D.normalize(geq(0, 0)) is True
    assert D.normalize(geq(0, 11)) is False


def test_backtrack_above_current_level_rejected():
    D = store()
    with pytest.raises(ValueError):
        D.backtrack_to(1)


def test_index_and_level_of():
    D = store()
    D.set_lb(0, 2, reason(geq(0, 2)))
    D.decide(geq(0, 5))
    assert D.index_of(geq(0, 1)) == 0
    assert D.index_of(geq(0, 4)) == 1
    assert D.index_of(geq(0, 6)) is None
    assert D.index_of(geq(0, 0)) == -1
    assert D.level_of(geq(0, 4)) == 1
    assert D.decision_literal(1) == geq(0, 5)


@given(st.integers(-20, 20), st.booleans())
def test_negation_roundtrip(v, ge):
    lit = Lit(0, ge, v)
    assert lit.negate().negate() == lit
    assert lit.negate().ge != ge
    D = DomainStore([-5], [5])
    a, b = D.normalize(lit), D.normalize(lit.negate())
    if isinstance(a, bool):
        assert b is (not a)
    else:
        assert b == lit.negate()


ops = st.lists(st.tuples(st.sampled_from(["lb", "ub", "decide", "back"]), st.integers(0, 2), st.integers(-3, 13)),
               max_size=40)


@given(ops)
def test_random_operations_keep_domains_and_trail_consistent(seq):
    D = DomainStore([0, 0, 0], [10, 10, 10])
    before = []  # state just before each open decision level
    for op, var, v in seq:
        if op == "back":
            lvl = v % (D.level + 1)
            if lvl < D.level:
                D.backtrack_to(lvl)
                assert (D.lb, D.ub) == before[lvl]
                del before[lvl:]
            continue
        if op == "decide":
            lit = geq(var, v) if v % 2 else leq(var, v)
            if D.literal_false(lit) or D.literal_holds(lit):
                continue
            before.append((list(D.lb), list(D.ub)))
            D.decide(lit)
        else:
            (D.set_lb if op == "lb" else D.set_ub)(var, v, None)
        assert all(lo <= hi for lo, hi in zip(D.lb, D.ub))
    for e in D.trail:
        assert e.new > e.old if e.is_lb else e.new < e.old
