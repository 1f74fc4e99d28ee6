"""What the energy check sees that the profile check cannot, and the
clauses it hands to conflict analysis."""

import random
from collections import Counter

from ttef import DomainStore, Instance, Project, Solver, SolverConfig, build_profile, ttef_check
from ttef.oracle import check_explanation, random_instance
from ttef.timetable import tt_check

# three unit-usage jobs of length 2 share [0, 4) on capacity 1: no compulsory
# parts, so the profile is flat, yet 6 units of work cannot fit in 4
inst = Instance.build([2, 2, 2], [1, 1, 1], 1, windows=[(0, 2)] * 3)
D = DomainStore(inst.est0, inst.lst0)
print("profile check:", tt_check(inst, D, build_profile(inst, D)))

# the overload is 2 units; one is spent widening the first job to [-1, 3],
# where it still overlaps [0, 4) by at least one unit
ex = ttef_check(inst, D)
print("energy check: ", ex.kind, "window", ex.window, "slack", ex.slack)
for lit in ex.antecedents:
    print("   ", f"S{lit.var} {'>=' if lit.ge else '<='} {lit.value}")

# solve small random projects and audit every explanation on the way
rng = random.Random(11)
kinds = Counter()
invalid = []
for _ in range(200):
    P = Project.from_instance(random_instance(rng))
    events = []
    Solver(P, SolverConfig(restart_base=3, sgs_budget=0), trace=lambda e, p: events.append((e, p))).search()
    for event, payload in events:
        if event == "explanation":
            kinds[payload.kind] += 1
            if not check_explanation(P, payload):
                invalid.append(payload)
        elif event == "learned":
            kinds["learned"] += 1
print(dict(kinds), "invalid:", len(invalid))
