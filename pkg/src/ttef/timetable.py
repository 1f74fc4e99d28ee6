"""Time-table consistency check and bounds filtering with explanations."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .domains import Explanation, Update, geq, leq
from .model import Instance
from .profile import ResourceProfile


@dataclass
class TTConfig:
    enabled: bool = True


def _contributors(inst: Instance, D, s: int, e: int, need: int, exclude: int = -1):
    """Greedy set of activities whose compulsory part covers ``[s, e)``.

    Picks larger usages first (ties by id) until their sum exceeds ``need``.
    """
    p = inst.durations
    cand = []
    for a in inst.activities:
        i = a.id
        if i == exclude or a.usage == 0 or a.duration == 0:
            continue
        if D.ub[i] <= s and D.lb[i] + p[i] >= e:
            cand.append((-a.usage, i))
    cand.sort()
    chosen, total = [], 0
    for neg_r, i in cand:
        chosen.append(i)
        total -= neg_r
        if total > need:
            return chosen
    raise AssertionError(f"segment [{s}, {e}) is not overloaded by compulsory parts")


def tt_check(inst: Instance, D, profile: ResourceProfile, store=None, resource=None):
    """Return ``None`` when the profile fits the capacity, else a failure.

    The failure is explained at the first time point ``t`` of the first
    overloaded segment: each chosen contributor ``i`` is pinned to cover ``t``
    through ``[[t - p_i + 1 <= S_i]] & [[S_i <= t]]``.
    """
    cap = inst.capacity
    over = np.flatnonzero(profile.heights > cap)
    if len(over) == 0:
        return None
    return explain_overload_at(inst, D, int(profile.times[over[0]]), store, resource)


def explain_overload_at(inst: Instance, D, s: int, store=None, resource=None) -> Explanation:
    """Failure explanation for compulsory parts overloading time ``s``."""
    lits = []
    for i in _contributors(inst, D, s, s + 1, inst.capacity):
        lits.append(geq(i, s - inst.activities[i].duration + 1))
        lits.append(leq(i, s))
    return _explain(store, lits, None, kind="tt-check", resource=resource, window=(s, s + 1))


def _explain(store, lits, consequent, **meta):
    if store is not None:
        return store.explain(lits, consequent, **meta)
    return Explanation(tuple(lits), consequent, **meta)


@numba.njit(cache=True)
def _filter_scan(times, heights, lb, ub, p, r, cap):
    """Bound pushes as rows ``(k, s, e, upper)`` in application order.

    Activity ``k`` is pushed past segment ``[s, e)`` (lower bound to ``e``,
    or upper bound to ``s - p_k`` when ``upper``). Each activity's own
    compulsory part is removed from the profile before its scan.
    """
    nseg = heights.shape[0]
    n = lb.shape[0]
    out = np.empty((2 * n * (nseg + 2) + 1, 4), np.int64)
    ps = np.empty(nseg + 2, np.int64)
    pe = np.empty(nseg + 2, np.int64)
    ph = np.empty(nseg + 2, np.int64)
    rows = 0
    for k in range(n):
        if lb[k] == ub[k]:
            continue
        cs, ce = ub[k], lb[k] + p[k]
        m = 0
        for g in range(nseg):
            s, e, h = times[g], times[g + 1], heights[g]
            if cs >= ce or e <= cs or s >= ce:
                ps[m], pe[m], ph[m] = s, e, h
                m += 1
                continue
            if s < cs:
                ps[m], pe[m], ph[m] = s, cs, h
                m += 1
            ps[m], pe[m], ph[m] = max(s, cs), min(e, ce), h - r[k]
            m += 1
            if e > ce:
                ps[m], pe[m], ph[m] = ce, e, h
                m += 1
        limit = cap - r[k]
        cur = lb[k]
        for q in range(m):
            if pe[q] <= cur:
                continue
            if ps[q] >= cur + p[k]:
                break
            if ph[q] > limit:
                out[rows, 0], out[rows, 1], out[rows, 2], out[rows, 3] = k, ps[q], pe[q], 0
                rows += 1
                cur = pe[q]
        cur = ub[k]
        for q in range(m - 1, -1, -1):
            if ps[q] >= cur + p[k]:
                continue
            if pe[q] <= cur:
                break
            if ph[q] > limit:
                out[rows, 0], out[rows, 1], out[rows, 2], out[rows, 3] = k, ps[q], pe[q], 1
                rows += 1
                cur = ps[q] - p[k]
    return out[:rows]


def tt_filter(inst: Instance, D, profile: ResourceProfile, resource=None):
    """Push start bounds out of segments where the activity cannot fit.

    ``D`` must be a :class:`~ttef.domains.DomainStore`; updates are committed
    immediately. Returns ``(explanations, conflict)`` where ``conflict`` is the
    store's failure explanation or ``None``.
    """
    if len(profile.heights) == 0:
        return [], None
    ids, p, r = inst.cumulative_arrays
    n = inst.n
    lb = np.asarray(D.lb[:n], dtype=np.int64)[ids]
    ub = np.asarray(D.ub[:n], dtype=np.int64)[ids]
    rows = _filter_scan(profile.times, profile.heights, lb, ub, p, r, inst.capacity)
    return apply_pushes(inst, D, rows, resource)


def apply_pushes(inst: Instance, D, rows, resource=None):
    """Explain and commit the pushes found by the filtering scan, in order."""
    ids, _, r = inst.cumulative_arrays
    cap = inst.capacity
    dur = inst.durations
    done = []
    for k, s, e, upper in rows.tolist():
        u = int(ids[k])
        pu = dur[u]
        lits = [leq(u, e - 1) if upper else geq(u, s - pu + 1)]
        for j in _contributors(inst, D, s, e, cap - int(r[k]), exclude=u):
            lits.append(geq(j, e - dur[j]))
            lits.append(leq(j, s))
        if upper:
            expl = D.explain(lits, leq(u, s - pu), kind="tt-filter", resource=resource, window=(s, e), subject=u)
            status = D.set_ub(u, s - pu, expl)
        else:
            expl = D.explain(lits, geq(u, e), kind="tt-filter", resource=resource, window=(s, e), subject=u)
            status = D.set_lb(u, e, expl)
        done.append(expl)
        if status is Update.CONFLICT:
            return done, D.conflict
    return done, None
