"""Generate j30-shaped single-mode RCPSP instances in PSPLib format.

Follows the ProGen parameterisation: 30 real jobs, 4 renewable resources,
durations in [1, 10], three start and three finish jobs, network complexity
(non-redundant arcs per node), resource factor (share of resources a job
uses) and resource strength (capacity between the largest single request
and the peak of the earliest-start schedule).

    python scripts/make_j30_sample.py tests/data/j30
"""

from __future__ import annotations

import argparse
import itertools
import random
from pathlib import Path

from ttef.psplib import RawPsplibInstance, render

JOBS = 30
RESOURCES = 4
NC = (1.5, 1.8, 2.1)
RF = (0.25, 0.5, 0.75, 1.0)
RS = (0.2, 0.5, 0.7, 1.0)


def _reachable(succ, a, b):
    stack, seen = [a], {a}
    while stack:
        v = stack.pop()
        if v == b:
            return True
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def _network(rng, nc):
    n = JOBS
    succ = [set() for _ in range(n)]
    pred = [set() for _ in range(n)]

    def arc(i, j):
        succ[i].add(j)
        pred[j].add(i)

    for j in range(3, n):
        arc(rng.randrange(0, min(j, n - 3)), j)
    for i in range(n - 3):
        if not succ[i]:
            arc(i, rng.randrange(max(i + 1, 3), n))
    # arcs per node counts the two dummies and their arcs
    target = round(nc * (n + 2)) - 6
    tries = 0
    while sum(map(len, succ)) < target and tries < 10000:
        tries += 1
        i = rng.randrange(0, n - 3)
        j = rng.randrange(max(i + 1, 3), n)
        if j in succ[i] or _reachable(succ, i, j):
            continue
        arc(i, j)
    return succ, pred


def _peak(durations, requests, succ, k):
    n = len(durations)
    est = [0] * n
    for i in range(n):
        for j in succ[i]:
            est[j] = max(est[j], est[i] + durations[i])
    horizon = max(e + p for e, p in zip(est, durations))
    usage = [0] * horizon
    for i in range(n):
        for t in range(est[i], est[i] + durations[i]):
            usage[t] += requests[i][k]
    return max(usage)


def generate(seed: int, nc: float, rf: float, rs: float, name: str) -> RawPsplibInstance:
    rng = random.Random(seed)
    succ, pred = _network(rng, nc)
    durations = [rng.randint(1, 10) for _ in range(JOBS)]
    requests = []
    for _ in range(JOBS):
        used = [k for k in range(RESOURCES) if rng.random() < rf] or [rng.randrange(RESOURCES)]
        requests.append([rng.randint(1, 10) if k in used else 0 for k in range(RESOURCES)])
    caps = []
    for k in range(RESOURCES):
        kmin = max(r[k] for r in requests)
        kmax = _peak(durations, requests, succ, k)
        caps.append(kmin + round(rs * (kmax - kmin)))
    # jobs 2..31 in the file, 1 and 32 are the dummies
    successors = [tuple(i + 2 for i in range(3))]
    for i in range(JOBS):
        successors.append(tuple(sorted(j + 2 for j in succ[i])) or (JOBS + 2,))
    successors.append(())
    return RawPsplibInstance(
        durations=(0, *durations, 0),
        requests=((0,) * RESOURCES, *map(tuple, requests), (0,) * RESOURCES),
        capacities=tuple(caps),
        successors=tuple(successors),
        horizon=sum(durations),
        name=name,
    )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    classes = list(itertools.product(NC, RF, RS))
    for idx in range(args.count):
        nc, rf, rs = rng.choice(classes)
        name = f"j30s_{idx + 1:02d}"
        raw = generate(rng.randrange(2**31), nc, rf, rs, name)
        (args.outdir / f"{name}.sm").write_text(render(raw))
        print(f"{name}: NC={nc} RF={rf} RS={rs}")


if __name__ == "__main__":
    main()
