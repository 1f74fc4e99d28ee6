"""One propagation round of a cumulative constraint.

All four phases are scanned in a single compiled call on the same bounds;
explanations are built afterwards, only for what the scans report. Phase
order and commit order are those of the individual propagators: a failure
of the time-table check (a) or the TTEF check (b) stops the round, then the
time-table pushes (c) are committed one by one, then the TTEF updates (d)
found on the bounds before (c).
"""

from __future__ import annotations

from typing import Callable, Optional

import numba
import numpy as np

from .domains import Explanation
from .model import Instance
from .profile import _sweep
from .timetable import _filter_scan, apply_pushes, explain_overload_at
from .ttef import _View, _check_scan, _horizon, _lb_scan, _prepare, commit_pending, explain_overload, pending_updates


@numba.njit(cache=True)
def _pack(found):
    u, lb, begin, end, avail = found
    out = np.empty((u.shape[0], 5), np.int64)
    out[:, 0], out[:, 1], out[:, 2], out[:, 3], out[:, 4] = u, lb, begin, end, avail
    return out


@numba.njit(cache=True)
def _round_scan(lb, ub, p, r, cap, H, check, filtering):
    """``(code, a, b, c, pushes, lower, upper)``.

    ``code`` 1: compulsory overload at time ``a``; 2: task interval
    ``[a, b)`` overloaded with available energy ``c``; 0: no failure, and
    ``pushes``/``lower``/``upper`` hold the filtering results (``upper`` in
    coordinates reflected about ``H``).
    """
    none_rows = np.zeros((0, 4), np.int64)
    none_upd = np.zeros((0, 5), np.int64)
    times, heights, after = _sweep(ub, lb + p, r)
    for g in range(heights.shape[0]):
        if heights[g] > cap:
            return 1, times[g], 0, 0, none_rows, none_upd, none_upd
    lower, upper = none_upd, none_upd
    if check:
        ect, lct, eef, lstef, X, Y = _prepare(lb, ub, p, r)
        if X.shape[0] > 0:
            found, begin, end, avail = _check_scan(lb, lct, lstef, eef, r, X, Y, cap, times, heights, after)
            if found:
                return 2, begin, end, avail, none_rows, none_upd, none_upd
            if filtering:
                lower = _pack(_lb_scan(lb, ub, lct, lstef, eef, r, X, Y, cap, times, heights, after))
                est2, lst2 = H - ub - p, H - lb - p
                ect2, lct2, eef2, lstef2, X2, Y2 = _prepare(est2, lst2, p, r)
                t2, h2, a2 = _sweep(lst2, ect2, r)
                upper = _pack(_lb_scan(est2, lst2, lct2, lstef2, eef2, r, X2, Y2, cap, t2, h2, a2))
    pushes = _filter_scan(times, heights, lb, ub, p, r, cap)
    return 0, 0, 0, 0, pushes, lower, upper


def propagate_resource(inst: Instance, store, prop: str = "ttef", resource=None,
                       emit: Optional[Callable[[Explanation], object]] = None) -> Optional[Explanation]:
    """Run phases (a)-(d) for ``prop`` in ``{"tt", "ttefc", "ttef"}``.

    Updates go to ``store``; returns the failure explanation or ``None``.
    ``emit`` receives every explanation produced.
    """
    ids, p, r = inst.cumulative_arrays
    if len(ids) == 0:
        return None
    n = inst.n
    lb = np.asarray(store.lb[:n], dtype=np.int64)[ids]
    ub = np.asarray(store.ub[:n], dtype=np.int64)[ids]
    H = _horizon(inst, store)
    code, a, b, c, pushes, lower, upper = _round_scan(lb, ub, p, r, inst.capacity, H, prop != "tt", prop == "ttef")
    if code == 1:
        ex = explain_overload_at(inst, store, int(a), store, resource)
    elif code == 2:
        ex = explain_overload(inst, store, int(a), int(b), int(c), store, resource)
    else:
        ex = None
    if ex is not None:
        if emit is not None:
            emit(ex)
        return ex
    pending = []
    if len(lower):
        pending += pending_updates(_View(inst, store, None), lower.tolist(), store, resource)
    if len(upper):
        pending += pending_updates(_View(inst, store, None, H), upper.tolist(), store, resource)
    conflict = None
    if len(pushes):
        done, conflict = apply_pushes(inst, store, pushes, resource)
        if emit is not None:
            for ex in done:
                emit(ex)
    if emit is not None:
        for upd in pending:
            emit(upd.explanation)
    if conflict is not None or not pending:
        return conflict
    return commit_pending(store, pending)
