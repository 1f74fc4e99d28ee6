import json

import pytest

from ttef.cli import main
from ttef.psplib import RawPsplibInstance, render


def small(name, p):
    return RawPsplibInstance((0, p, 2, 0), ((0,), (2,), (2,), (0,)), (3,), ((2, 3), (4,), (4,), ()), name=name)


@pytest.fixture
def corpus(tmp_path):
    for name, p in (("a", 2), ("b", 3), ("c", 1)):
        (tmp_path / f"{name}.sm").write_text(render(small(name, p)))
    return tmp_path


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("mode", ["ub", "lb"])
def test_example1(capsys, mode):
    code, out, _ = cli(capsys, "@example1", "--mode", mode, "--no-timing")
    assert code == 0
    assert out.splitlines() == ["instance,mode,prop,status,value,failures,decisions,seconds,seed",
                                out.splitlines()[1]]
    row = out.splitlines()[1].split(",")
    assert row[:5] == ["example1", mode, "ttef", "optimal", "9"] and row[7] == ""


def test_run_subcommand_and_json(capsys):
    code, out, _ = cli(capsys, "run", "@example1", "--prop", "tt", "--output", "json")
    (rep,) = json.loads(out)
    assert code == 0 and rep["prop"] == "tt" and rep["value"] == 9 and rep["seconds"] >= 0


def test_bad_prop(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["@example1", "--prop", "bogus"])
    assert exc.value.code == 2


def test_bad_file_does_not_stop_batch(capsys, corpus, tmp_path):
    broken = tmp_path / "broken.sm"
    broken.write_text("not a psplib file\n")
    code, out, err = cli(capsys, str(broken), str(corpus / "a.sm"), "--no-timing")
    rows = out.splitlines()[1:]
    assert code == 2 and "broken.sm" in err
    assert rows[0].split(",")[3] == "error" and rows[1].split(",")[3] == "optimal"


def test_bench(capsys, corpus):
    code, out, _ = cli(capsys, "bench", str(corpus), "--no-timing")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "prop,instances,svd,cmpr,cmpr_seconds,cmpr_failures"
    assert [ln.split(",")[:4] for ln in lines[1:]] == [["tt", "3", "3", "3"], ["ttef", "3", "3", "3"]]


def test_bench_single_config(capsys, corpus):
    code, out, _ = cli(capsys, "bench", str(corpus), "--props", "ttefc")
    assert code == 0 and len(out.splitlines()) == 2


def test_bench_empty_directory(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["bench", str(tmp_path)])
    assert exc.value.code == 2


def test_deterministic_without_timing(capsys, corpus):
    args = ("bench", str(corpus), "--details", "--no-timing", "--props", "tt,ttefc,ttef")
    first = cli(capsys, *args)
    assert first == cli(capsys, *args)


def test_parallel_matches_serial(capsys, corpus):
    files = sorted(str(p) for p in corpus.glob("*.sm"))
    assert cli(capsys, *files, "--no-timing") == cli(capsys, *files, "--no-timing", "--jobs", "2")
