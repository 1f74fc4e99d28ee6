"""Compare time-table against time-table-edge-finding on the j30 sample.

Takes around a minute and a half; pass another directory of .sm files to
use that instead.
"""

import sys
from pathlib import Path

from ttef import SolverConfig, read_sm, solve, to_instance

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests" / "data" / "j30"

print(f"{'instance':10s} {'opt':>4s} {'tt fails':>9s} {'ttef fails':>11s} {'tt s':>7s} {'ttef s':>7s}")
for path in sorted(root.glob("*.sm")):
    P = to_instance(read_sm(path))
    a = solve(P, SolverConfig(prop="tt", time_limit=60))
    b = solve(P, SolverConfig(prop="ttef", time_limit=60))
    assert a.value == b.value or "optimal" not in (a.status, b.status)
    print(f"{path.stem:10s} {b.value:4d} {a.failures:9d} {b.failures:11d} {a.seconds:7.2f} {b.seconds:7.2f}")
