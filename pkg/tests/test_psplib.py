from pathlib import Path

import pytest

from ttef.psplib import PsplibError, RawPsplibInstance, example1, parse_sm, read_sm, render, to_instance

J30 = Path(__file__).parent / "data" / "j30"

TINY = RawPsplibInstance(
    durations=(0, 3, 0),
    requests=((0,), (2,), (0,)),
    capacities=(4,),
    successors=((2,), (3,), ()),
    horizon=3,
    name="tiny",
)


def test_render_round_trip():
    assert parse_sm(render(TINY), name="tiny") == TINY


def test_j30_shape():
    raw = read_sm(J30 / "j30s_01.sm")
    assert (raw.jobs, raw.resources, raw.name) == (32, 4, "j30s_01")
    assert raw.durations[0] == raw.durations[-1] == 0
    assert parse_sm(render(raw), raw.name) == raw


def test_to_instance():
    P = to_instance(TINY)
    assert P.horizon == 3
    assert P.precedences == ((0, 1), (1, 2))
    assert P.est0 == (0, 0, 0) and P.lst0 == (3, 0, 3)
    assert to_instance(TINY, makespan_ub=7).lst0 == (7, 4, 7)


def test_example1():
    P = example1()
    assert P.n == 5 and P.capacities == (4,) and P.horizon == 10
    assert set(P.precedences) == {(1, 3), (2, 4)}


@pytest.mark.parametrize("section", ["PRECEDENCE RELATIONS:", "REQUESTS/DURATIONS:", "RESOURCEAVAILABILITIES:"])
def test_missing_section(section):
    text = render(TINY).replace(section, "SOMETHING ELSE:")
    with pytest.raises(PsplibError, match="missing section"):
        parse_sm(text)


def line_of(text, needle):
    return next(i for i, ln in enumerate(text.splitlines(), 1) if ln.startswith(needle))


def test_error_reports_line():
    text = render(TINY)
    bad = text.replace("  2      1     3     2", "  2      1     x     2")
    with pytest.raises(PsplibError) as err:
        parse_sm(bad)
    assert err.value.line == line_of(bad, "  2      1     x")


def test_successor_out_of_range():
    text = render(TINY).replace("   2        1          1     3", "   2        1          1     9")
    with pytest.raises(PsplibError, match="out of range"):
        parse_sm(text)


def test_multi_mode_rejected():
    text = render(TINY).replace("   2        1          1", "   2        2          1")
    with pytest.raises(PsplibError, match="modes"):
        parse_sm(text)


def test_two_resources():
    raw = RawPsplibInstance((0, 2, 1, 0), ((0, 0), (1, 3), (2, 0), (0, 0)), (2, 3),
                            ((2, 3), (4,), (4,), ()), horizon=3, name="two")
    assert parse_sm(render(raw), "two") == raw
    P = to_instance(raw)
    assert P.demands == ((0, 1, 2, 0), (0, 3, 0, 0))
