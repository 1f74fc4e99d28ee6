"""End-to-end acceptance checks; each prints one ``criterion N: PASS|FAIL`` line.

The lines are repeated in the terminal summary (see ``conftest.py``).
"""

import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from ttef.domains import DomainStore, geq, leq
from ttef.engine import Solver, SolverConfig, solve
from ttef.model import Project
from ttef.oracle import (EnumerationBudgetExceeded, check_explanation, clause_violations, consistent_rows,
                         enumerate_feasible, naive_overloaded_windows, random_instance)
from ttef.psplib import example1, read_sm, to_instance
from ttef.ttef import ttef_check

J30 = sorted((Path(__file__).parent / "data" / "j30").glob("*.sm"))
FUZZ_SEEDS = 1000
LINES: list[str] = []


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def fuzz_instance(seed):
    """Random instance with its feasible set, resampled until enumerable."""
    rng = random.Random(seed)
    while True:
        inst = random_instance(rng)
        P = Project.from_instance(inst)
        try:
            return rng, inst, P, enumerate_feasible(P)
        except EnumerationBudgetExceeded:
            continue


@pytest.fixture(scope="module")
def fuzz():
    stats = dict(instances=0, nodes=0, pruned=0, false_failures=0, explanations=0, invalid=0,
                 learned=0, bad_clauses=0, updates=0, bad_slack=0, wrong_optimum=0)
    t0 = time.perf_counter()
    for seed in range(FUZZ_SEEDS):
        rng, inst, P, F = fuzz_instance(seed)
        cfg = SolverConfig(restart_base=3, sgs_budget=rng.choice([0, 2, 500]), seed=seed)
        events = []
        s = Solver(P, cfg, trace=lambda e, p: events.append((e, p)))
        outcome = s.search()
        domains = {s.obj_var: (s.store.lb0[s.obj_var], s.store.ub0[s.obj_var])}
        domains.update({b: (0, 1) for b in s.bool_pairs})
        for event, payload in events:
            if event == "node":
                stats["nodes"] += 1
                before, after = payload
                alive = consistent_rows(P, F, before, s.obj_var, s.bool_pairs)
                if after is None:
                    stats["false_failures"] += bool(alive.any())
                else:
                    kept = consistent_rows(P, F, after, s.obj_var, s.bool_pairs)
                    stats["pruned"] += bool((alive & ~kept).any())
            elif event == "explanation":
                stats["explanations"] += 1
                stats["invalid"] += not check_explanation(P, payload, domains)
                if payload.kind == "ttef-filter":
                    stats["updates"] += 1
                    r_u = P.demands[payload.resource or 0][payload.subject]
                    stats["bad_slack"] += not (0 <= payload.slack < r_u)
            else:
                stats["learned"] += 1
                clause, bound = payload
                stats["bad_clauses"] += len(clause_violations(P, clause, F, s.obj_var, bound, s.bool_pairs)) > 0
        best = int((F + np.array(P.durations)).max(axis=1).min()) if len(F) else None
        stats["wrong_optimum"] += outcome != "exhausted" or s.incumbent != best
        stats["instances"] += 1
    stats["seconds"] = time.perf_counter() - t0
    return stats


def test_c1_soundness_fuzz(fuzz):
    bad = fuzz["pruned"] + fuzz["false_failures"] + fuzz["wrong_optimum"]
    ok = fuzz["instances"] >= 1000 and bad == 0 and fuzz["seconds"] < 120
    report(1, ok, f"{fuzz['instances']} instances, {fuzz['nodes']} nodes, {fuzz['pruned']} pruning / "
                  f"{fuzz['false_failures']} failure / {fuzz['wrong_optimum']} optimum violations, "
                  f"{fuzz['seconds']:.1f}s")


def test_c2_check_matches_naive_energy():
    disagree = overloaded = 0
    for seed in range(1000):
        rng = random.Random(seed)
        inst = random_instance(rng)
        D = DomainStore(inst.est0, inst.lst0)
        for v in range(inst.n):
            lo, hi = D.lb[v], D.ub[v]
            if hi > lo and rng.random() < 0.5:
                a = rng.randint(lo, hi)
                D.set_lb(v, a, None)
                D.set_ub(v, rng.randint(a, hi), None)
        naive = bool(naive_overloaded_windows(inst, D))
        overloaded += naive
        disagree += (ttef_check(inst, D) is not None) != naive
    report(2, disagree == 0, f"1000 instances ({overloaded} overloaded), {disagree} disagreements")


def test_c3_explanations_valid(fuzz):
    ok = fuzz["invalid"] == 0 and fuzz["bad_clauses"] == 0 and fuzz["explanations"] > 0
    report(3, ok, f"{fuzz['explanations']} explanations ({fuzz['invalid']} invalid), "
                  f"{fuzz['learned']} learned clauses ({fuzz['bad_clauses']} invalid)")


def test_c4_example1():
    out = []
    for mode in ("ub", "lb"):
        t0 = time.perf_counter()
        r = solve(example1(), SolverConfig(mode=mode))
        out.append((mode, r.status, r.value, time.perf_counter() - t0))
    ok = all(s == "optimal" and v == 9 and t < 1 for _, s, v, t in out)
    report(4, ok, ", ".join(f"{m}: {s} {v} in {t:.3f}s" for m, s, v, t in out))


def test_c5_ttef_stronger_than_timetable(three_tight):
    inst, _ = three_tight
    P = Project.from_instance(inst)
    tt = Solver(P, SolverConfig(prop="tt")).root_propagate()
    ttefc = Solver(P, SolverConfig(prop="ttefc")).root_propagate()
    ok = tt is None and ttefc is not None
    report(5, ok, f"tt: {'ok' if tt is None else 'conflict'}, ttefc: {'conflict' if ttefc else 'ok'}")


def test_c6_widening_budget(fuzz):
    ok = fuzz["updates"] > 0 and fuzz["bad_slack"] == 0
    report(6, ok, f"{fuzz['updates']} update explanations, {fuzz['bad_slack']} outside [0, r_u)")


def shifted_bounds(s: Solver, c: int):
    st, n = s.store, s.n
    starts = [(lo - c, hi - c) for lo, hi in zip(st.lb[:n], st.ub[:n])]
    obj = (st.lb[s.obj_var] - c, st.ub[s.obj_var] - c)
    return starts, obj, [(st.lb[b], st.ub[b]) for b in sorted(s.bool_pairs)]


def test_c7_translation_invariance():
    mismatches = compared = 0
    for seed in range(100):
        rng = random.Random(seed)
        P = Project.from_instance(random_instance(rng))
        for c in (-7, 13):
            a, b = Solver(P), Solver(P.shifted(c))
            ca, cb = a.root_propagate(), b.root_propagate()
            for _ in range(3):
                compared += 1
                if (ca is None) != (cb is None):
                    mismatches += 1
                    break
                if ca is not None:
                    break
                if shifted_bounds(a, 0) != shifted_bounds(b, c):
                    mismatches += 1
                    break
                free = [v for v in range(P.n) if a.store.lb[v] < a.store.ub[v]]
                if not free:
                    break
                v = rng.choice(free)
                val = rng.randint(a.store.lb[v], a.store.ub[v] - 1)
                lit = geq(v, val + 1) if rng.random() < 0.5 else leq(v, val)
                a.store.decide(lit)
                b.store.decide(lit._replace(value=lit.value + c))
                ca, cb = a.propagate(), b.propagate()
    report(7, mismatches == 0, f"100 instances x c in (-7, 13), {compared} states, {mismatches} mismatches")


@pytest.fixture(scope="module")
def j30_runs():
    runs = {}
    for prop in ("tt", "ttef"):
        for path in J30:
            runs[prop, path.stem] = solve(to_instance(read_sm(path)), SolverConfig(prop=prop, time_limit=60))
    return runs


@pytest.mark.slow
def test_c8_j30_sample(j30_runs):
    names = [p.stem for p in J30]
    unsolved = [n for n in names if j30_runs["ttef", n].status != "optimal"]
    differ = [n for n in names if j30_runs["tt", n].value != j30_runs["ttef", n].value]
    worst = max(j30_runs["ttef", n].seconds for n in names)
    ok = len(names) == 10 and not unsolved and not differ and worst < 60
    report(8, ok, f"{len(names) - len(unsolved)}/{len(names)} optimal under ttef, slowest {worst:.1f}s, "
                  f"tt/ttef makespans differ on {differ or 'none'}")


@pytest.mark.slow
def test_c9_search_effort(j30_runs):
    names = [p.stem for p in J30]
    tt = [j30_runs["tt", n].failures for n in names]
    ef = [j30_runs["ttef", n].failures for n in names]
    worse = [n for n, a, b in zip(names, tt, ef) if b > a]
    report(9, len(worse) <= 2, f"mean failures tt {np.mean(tt):.1f} / ttef {np.mean(ef):.1f}; "
                               f"ttef needs more on {len(worse)} of {len(names)} ({', '.join(worse) or 'none'})")


def test_c10_determinism():
    files = [str(p) for p in J30 if p.stem != "j30s_03"]
    cmd = [sys.executable, "-m", "ttef", *files, "@example1", "--no-timing", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    report(10, a == b and a.count(b"\n") == len(files) + 2, f"{len(files) + 1} instances, {len(a)} bytes, "
                                                             f"{'identical' if a == b else 'different'}")
