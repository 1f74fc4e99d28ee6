"""Compulsory-part resource profile and its suffix-energy table."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numba
import numpy as np

from .model import Instance


@dataclass(frozen=True, eq=False)
class ResourceProfile:
    """Piecewise-constant height over ``[times[k], times[k+1])``.

    ``after[k]`` is the compulsory energy at or after ``times[k]``; the last
    entry is 0. An empty profile has no breakpoints.
    """

    times: np.ndarray
    heights: np.ndarray
    after: np.ndarray

    @property
    def segments(self):
        """Iterate ``(start, end, height)`` for every segment."""
        t = self.times.tolist()
        for k, h in enumerate(self.heights.tolist()):
            yield t[k], t[k + 1], h

    def height(self, t: int) -> int:
        times = self.times
        if len(times) == 0 or t < times[0] or t >= times[-1]:
            return 0
        k = bisect_right(times.tolist(), t) - 1
        return int(self.heights[k])

    def tt_after(self, tau: int) -> int:
        """Compulsory energy in ``[tau, +inf)``, interpolated inside segments."""
        times = self.times
        if len(times) == 0 or tau >= times[-1]:
            return 0
        if tau <= times[0]:
            return int(self.after[0])
        k = bisect_right(times.tolist(), tau) - 1
        return int(self.after[k] - self.heights[k] * (tau - times[k]))

    @property
    def total_energy(self) -> int:
        return int(self.after[0]) if len(self.after) else 0


EMPTY = ResourceProfile(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64))


@numba.njit(cache=True)
def _sweep(lst, ect, r):
    n = lst.shape[0]
    t = np.empty(2 * n, np.int64)
    d = np.empty(2 * n, np.int64)
    m = 0
    for i in range(n):
        if lst[i] < ect[i] and r[i] > 0:
            t[m], d[m] = lst[i], r[i]
            t[m + 1], d[m + 1] = ect[i], -r[i]
            m += 2
    if m == 0:
        z = np.zeros(0, np.int64)
        return z, z.copy(), z.copy()
    order = np.argsort(t[:m], kind="mergesort")
    times = np.empty(m, np.int64)
    level = np.zeros(m, np.int64)
    q = -1
    for k in order:
        # zero-delta times stay as breakpoints: the set of covering
        # activities changes there even though the height does not
        if q < 0 or t[k] != times[q]:
            q += 1
            times[q] = t[k]
            level[q] = level[q - 1] if q > 0 else 0
        level[q] += d[k]
    times = times[: q + 1]
    heights = level[:q].copy()
    after = np.zeros(q + 1, np.int64)
    for k in range(q - 1, -1, -1):
        after[k] = after[k + 1] + heights[k] * (times[k + 1] - times[k])
    return times, heights, after


def profile_from_parts(lst, ect, usage) -> ResourceProfile:
    """Sweep the compulsory parts ``[lst_i, ect_i)`` with heights ``usage[i]``."""
    times, heights, after = _sweep(np.asarray(lst, dtype=np.int64), np.asarray(ect, dtype=np.int64),
                                   np.asarray(usage, dtype=np.int64))
    if len(times) == 0:
        return EMPTY
    return ResourceProfile(times, heights, after)


def build_profile(inst: Instance, D) -> ResourceProfile:
    ids, p, r = inst.cumulative_arrays
    lb = np.asarray(D.lb[: inst.n], dtype=np.int64)[ids]
    ub = np.asarray(D.ub[: inst.n], dtype=np.int64)[ids]
    return profile_from_parts(ub, lb + p, r)


def tt_energy(profile: ResourceProfile, begin: int, end: int) -> int:
    """Compulsory energy inside ``[begin, end)``."""
    if end <= begin:
        return 0
    return profile.tt_after(begin) - profile.tt_after(end)
