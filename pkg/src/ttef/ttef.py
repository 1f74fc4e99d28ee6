"""Time-table-edge-finding: consistency check, start-time filtering and the
widened energetic explanations behind both.

The two scans run as compiled kernels over arrays of the activities with a
non-empty free part; explanation construction is plain Python and only runs
for the windows that actually fail or filter. Upper-bound filtering reuses the
lower-bound scan on the time-reflected bounds ``S' = H - S - p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from operator import add
from typing import Optional

import numba
import numpy as np

from .domains import Explanation, Lit, Update, geq, leq
from .model import Bounds, Instance, free_fixed_split, window_length
from .profile import ResourceProfile, profile_from_parts

_INF = np.iinfo(np.int64).max


@numba.njit(cache=True)
def _tt_after(tau, times, heights, after):
    m = times.shape[0]
    if m == 0 or tau >= times[m - 1]:
        return 0
    if tau <= times[0]:
        return after[0]
    k = np.searchsorted(times, tau, side="right") - 1
    return after[k] - heights[k] * (tau - times[k])


@numba.njit(cache=True)
def _check_scan(est, lct, lstef, eef, r, X, Y, cap, times, heights, after):
    end = _INF
    for y in range(Y.shape[0] - 1, -1, -1):
        b = Y[y]
        if lct[b] == end:
            continue
        end = lct[b]
        tt_end = _tt_after(end, times, heights, after)
        E = 0
        for x in range(X.shape[0] - 1, -1, -1):
            a = X[x]
            if end <= est[a]:
                continue
            begin = est[a]
            if lct[a] <= end:
                E += eef[a]
            elif lstef[a] < end:
                E += r[a] * (end - lstef[a])
            avail = cap * (end - begin) - E - (_tt_after(begin, times, heights, after) - tt_end)
            if avail < 0:
                return True, begin, end, avail
    return False, 0, 0, 0


@numba.njit(cache=True)
def _lb_scan(est, lst, lct, lstef, eef, r, X, Y, cap, times, heights, after):
    n = X.shape[0]
    est_p = est.copy()
    cap_out = n * n + 1
    out_u = np.empty(cap_out, np.int64)
    out_lb = np.empty(cap_out, np.int64)
    out_begin = np.empty(cap_out, np.int64)
    out_end = np.empty(cap_out, np.int64)
    out_avail = np.empty(cap_out, np.int64)
    k = 0
    end = _INF
    for y in range(Y.shape[0] - 1, -1, -1):
        b = Y[y]
        if lct[b] == end:
            continue
        end = lct[b]
        tt_end = _tt_after(end, times, heights, after)
        E = 0
        u = -1
        en_req_u = 0
        for x in range(n - 1, -1, -1):
            a = X[x]
            if end <= est[a]:
                continue
            begin = est[a]
            if lct[a] <= end:
                E += eef[a]
            else:
                en_in = r[a] * max(0, end - lstef[a])
                E += en_in
                en_req_a = min(eef[a], r[a] * (end - est[a])) - en_in
                if en_req_a > en_req_u:
                    u = a
                    en_req_u = en_req_a
            avail = cap * (end - begin) - E - (_tt_after(begin, times, heights, after) - tt_end)
            if en_req_u > 0 and avail - en_req_u < 0:
                # energy u must leave for the others, counting its compulsory
                # part in the window as already placed
                rest = r[u] * (end - begin) - avail - r[u] * max(0, end - lst[u])
                lb_u = begin - ((-rest) // r[u])
                if est_p[u] < lb_u:
                    out_u[k] = u
                    out_lb[k] = lb_u
                    out_begin[k] = begin
                    out_end[k] = end
                    out_avail[k] = avail
                    k += 1
                    est_p[u] = lb_u
    return out_u[:k], out_lb[:k], out_begin[:k], out_end[:k], out_avail[:k]


@numba.njit(cache=True)
def _prepare(est, lst, p, r):
    """Completion times, free energies and the scan orders of the free parts."""
    ect = est + p
    lct = lst + p
    pef = p - np.maximum(0, ect - lst)
    eef = r * pef
    lstef = lct - pef
    free = np.flatnonzero(pef > 0)
    X = free[np.argsort(est[free], kind="mergesort")]
    Y = free[np.argsort(lct[free], kind="mergesort")]
    return ect, lct, eef, lstef, X, Y


@dataclass(frozen=True)
class PendingUpdate:
    activity: int
    bound: int
    is_lower: bool
    explanation: Explanation


class _View:
    """Arrays of the cumulative activities in scan coordinates.

    With ``reflect=H`` every start ``S`` is mapped to ``H - S - p``; literals
    and windows are mapped back by :meth:`lit_lo`, :meth:`lit_hi` and
    :meth:`window`.
    """

    def __init__(self, inst: Instance, D, profile: Optional[ResourceProfile], reflect: Optional[int] = None):
        self.inst = inst
        self.D = D
        self.reflect = reflect
        ids, p, r = inst.cumulative_arrays
        n = inst.n
        lb = np.asarray(D.lb[:n], dtype=np.int64)[ids]
        ub = np.asarray(D.ub[:n], dtype=np.int64)[ids]
        if reflect is None:
            est, lst = lb, ub
        else:
            est, lst = reflect - ub - p, reflect - lb - p
        self.ids = ids.tolist()
        self.p, self.r, self.est, self.lst = p, r, est, lst
        self.ect, self.lct, self.eef, self.lstef, self.X, self.Y = _prepare(est, lst, p, r)
        if profile is not None and reflect is None:
            self.profile = profile

    @cached_property
    def profile(self) -> ResourceProfile:
        return profile_from_parts(self.lst, self.ect, self.r)

    @cached_property
    def bounds(self) -> Bounds:
        """Bounds of the whole instance in scan coordinates."""
        n, D = self.inst.n, self.D
        if self.reflect is None:
            return Bounds(list(D.lb[:n]), list(D.ub[:n]))
        H, dur = self.reflect, self.inst.durations
        return Bounds([H - D.ub[i] - dur[i] for i in range(n)], [H - D.lb[i] - dur[i] for i in range(n)])

    def kernel_args(self):
        pr = self.profile
        return pr.times, pr.heights, pr.after

    def lit_lo(self, i: int, v: int) -> Lit:
        """``[[v <= S'_i]]`` in original coordinates."""
        if self.reflect is None:
            return geq(i, v)
        return leq(i, self.reflect - v - self.inst.activities[i].duration)

    def lit_hi(self, i: int, v: int) -> Lit:
        """``[[S'_i <= v]]`` in original coordinates."""
        if self.reflect is None:
            return leq(i, v)
        return geq(i, self.reflect - v - self.inst.activities[i].duration)

    def window(self, begin: int, end: int) -> tuple[int, int]:
        if self.reflect is None:
            return begin, end
        return self.reflect - end, self.reflect - begin


def _explain(store, lits, consequent, **meta) -> Explanation:
    if store is not None:
        return store.explain(lits, consequent, **meta)
    return Explanation(tuple(lits), consequent, **meta)


def _widened_boxes(view: _View, begin: int, end: int, budget: int, skip: int = -1):
    """Greedy widening of the per-activity window lengths.

    Returns ``(boxes, unused)`` where ``boxes`` holds ``(i, lo, hi)`` start
    intervals in scan coordinates, each forcing at least ``p_i(a,b) - d_i``
    units into ``[begin, end)``, and ``unused`` is the budget left over.
    Activities with a free part are widened first, then larger usages, then
    smaller ids.
    """
    inst, B = view.inst, view.bounds
    order = []
    for i in view.ids:
        if i == skip:
            continue
        q = window_length(inst, i, begin, end, B)
        if q <= 0:
            continue
        has_free = free_fixed_split(inst, i, B).p_ef > 0
        order.append((not has_free, -inst.activities[i].usage, i, q))
    order.sort()
    boxes = []
    for _, neg_r, i, q in order:
        r = -neg_r
        d = min(budget // r, q) if budget > 0 else 0
        budget -= d * r
        if q - d > 0:
            p = inst.activities[i].duration
            boxes.append((i, begin + q - p - d, end - q + d))
    return boxes, budget


def _box_lits(view: _View, boxes):
    lits = []
    for i, lo, hi in boxes:
        lits.append(view.lit_lo(i, lo))
        lits.append(view.lit_hi(i, hi))
    return lits


def _energy(view: _View, begin: int, end: int) -> int:
    inst, B = view.inst, view.bounds
    return sum(inst.activities[i].usage * window_length(inst, i, begin, end, B) for i in view.ids)


def explain_overload(inst: Instance, D, begin: int, end: int, avail: Optional[int] = None,
                     store=None, resource=None, _view: Optional[_View] = None) -> Explanation:
    """Failure explanation for an energy overload of ``[begin, end)``.

    ``avail`` is the (negative) available energy reported by the scan; when
    omitted it is recomputed from the window lengths. The surplus
    ``-avail - 1`` is spent on widening.
    """
    view = _view or _View(inst, D, None)
    if avail is None:
        avail = inst.capacity * (end - begin) - _energy(view, begin, end)
    if avail >= 0:
        raise ValueError(f"window [{begin}, {end}) is not overloaded")
    budget = -avail - 1
    boxes, _ = _widened_boxes(view, begin, end, budget)
    return _explain(store, _box_lits(view, boxes), None, kind="ttef-check", resource=resource,
                    window=view.window(begin, end), slack=budget)


def explain_update(inst: Instance, D, begin: int, end: int, u: int, new_lb: int,
                   avail: Optional[int] = None, store=None, resource=None,
                   _view: Optional[_View] = None) -> Explanation:
    """Explanation for ``[[new_lb <= S_u]]`` from an overload of ``[begin, end)``.

    ``u`` is an instance activity id; bounds and window are in scan
    coordinates of ``_view`` (identity unless reflected).
    """
    view = _view or _View(inst, D, None)
    act = inst.activities[u]
    pu, ru = act.duration, act.usage
    B = view.bounds
    e_u = ru * window_length(inst, u, begin, end, B)
    if avail is None:
        avail = inst.capacity * (end - begin) - _energy(view, begin, end)
    overlap = min(pu, end - new_lb + 1)
    budget = ru * overlap - (avail + e_u) - 1
    if budget < 0:
        raise ValueError(f"update {new_lb} of activity {u} is not justified by [{begin}, {end})")
    boxes, _ = _widened_boxes(view, begin, end, budget, skip=u)
    lits = [view.lit_lo(u, begin + end - new_lb + 1 - pu)] + _box_lits(view, boxes)
    return _explain(store, lits, view.lit_lo(u, new_lb), kind="ttef-filter", resource=resource,
                    window=view.window(begin, end), subject=u, slack=budget)


def ttef_check(inst: Instance, D, profile: Optional[ResourceProfile] = None, store=None, resource=None):
    """Return ``None`` if no task interval is overloaded, else a failure."""
    return _check(_View(inst, D, profile), store, resource)


def _check(view: _View, store, resource):
    if len(view.X) == 0:
        return None
    found, begin, end, avail = _check_scan(view.est, view.lct, view.lstef, view.eef, view.r,
                                           view.X, view.Y, view.inst.capacity, *view.kernel_args())
    if not found:
        return None
    return explain_overload(view.inst, view.D, int(begin), int(end), int(avail), store, resource, view)


def _filter(view: _View, store, resource):
    if len(view.X) == 0:
        return []
    inst = view.inst
    found = _lb_scan(view.est, view.lst, view.lct, view.lstef, view.eef, view.r,
                     view.X, view.Y, inst.capacity, *view.kernel_args())
    return pending_updates(view, zip(*(a.tolist() for a in found)), store, resource)


def pending_updates(view: _View, found, store, resource):
    """Explained updates for scan results ``(k, new_lb, begin, end, avail)``."""
    inst, reflect = view.inst, view.reflect
    pending = []
    for k, nb, b, e, av in found:
        u = view.ids[k]
        expl = explain_update(inst, view.D, b, e, u, nb, av, store, resource, view)
        bound = nb if reflect is None else reflect - nb - inst.activities[u].duration
        pending.append(PendingUpdate(u, bound, reflect is None, expl))
    return pending


def ttef_round(inst: Instance, D, profile: Optional[ResourceProfile] = None, store=None,
               resource=None, filtering: bool = True):
    """Check and, if ``filtering``, both filters on the same bounds.

    Returns ``(failure, pending)``; on failure ``pending`` is empty. Nothing is
    committed.
    """
    view = _View(inst, D, profile)
    failure = _check(view, store, resource)
    if failure is not None or not filtering:
        return failure, []
    pending = _filter(view, store, resource)
    pending += _filter(_View(inst, D, None, _horizon(inst, D)), store, resource)
    return None, pending


def _horizon(inst: Instance, D) -> int:
    return max(map(add, D.ub[:inst.n], inst.durations), default=0)


def ttef_filter_lb(inst: Instance, D, profile=None, store=None, resource=None, commit=True):
    """Lower-bound filtering; returns ``(pending, conflict)``.

    Updates are collected over the whole scan and committed to ``store``
    afterwards (when ``commit`` and a store are given).
    """
    pending = _filter(_View(inst, D, profile), store, resource)
    return pending, (commit_pending(store, pending) if commit and store is not None else None)


def ttef_filter_ub(inst: Instance, D, profile=None, store=None, resource=None, commit=True):
    """Upper-bound filtering via the reflected instance; returns ``(pending, conflict)``."""
    pending = _filter(_View(inst, D, None, _horizon(inst, D)), store, resource)
    return pending, (commit_pending(store, pending) if commit and store is not None else None)


def commit_pending(store, pending):
    """Apply pending updates in order; returns the store conflict or ``None``."""
    for upd in pending:
        if upd.is_lower:
            st = store.set_lb(upd.activity, upd.bound, upd.explanation)
        else:
            st = store.set_ub(upd.activity, upd.bound, upd.explanation)
        if st is Update.CONFLICT:
            return store.conflict
    return None


__all__ = [
    "PendingUpdate",
    "commit_pending",
    "explain_overload",
    "explain_update",
    "ttef_check",
    "ttef_filter_lb",
    "ttef_filter_ub",
    "ttef_round",
]
