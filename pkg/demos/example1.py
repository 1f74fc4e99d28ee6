"""The five-activity running example, propagated and then solved.

    python demos/example1.py
"""

from ttef import DomainStore, SolverConfig, build_profile, example1, free_fixed_split, solve
from ttef.psplib import EXAMPLE1_NAMES as NAMES

project = example1()
inst = project.resources[0]
D = DomainStore(inst.est0, inst.lst0)

# windows before any search, deadline 10
for i, name in enumerate(NAMES):
    s = free_fixed_split(inst, i, D)
    print(f"{name}: start in [{D.lb[i]}, {D.ub[i]}]  p={inst.durations[i]} r={inst.usages[i]}"
          f"  fixed={s.e_tt} free={s.e_ef}")

prof = build_profile(inst, D)
print("profile:", list(zip(prof.times.tolist(), prof.heights.tolist())))

for mode in ("ub", "lb"):
    res = solve(project, SolverConfig(mode=mode))
    print(f"{mode}: {res.status} makespan {res.value} ({res.failures} failures)")

# draw the optimal schedule, one row per activity
res = solve(project)
for i, name in enumerate(NAMES):
    s, p = res.schedule[i], project.durations[i]
    print(f"{name} {'.' * s}{name * p}{'.' * (res.value - s - p)}")
