"""Brute-force ground truth for small instances.

Nothing here shares code with the propagators: feasibility is enumerated
directly, energies are summed time point by time point, and explanations are
checked by evaluating minimal overlaps under the antecedent bounds only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .model import Instance, Project

Model = Union[Instance, Project]


@dataclass(frozen=True)
class EnumLimits:
    max_activities: int = 6
    max_horizon: int = 15
    max_capacity: int = 4
    node_budget: int = 2_000_000


class EnumerationBudgetExceeded(RuntimeError):
    pass


def _as_project(model: Model) -> Project:
    return Project.from_instance(model) if isinstance(model, Instance) else model


def _topo(n, precedences):
    preds = [[] for _ in range(n)]
    indeg = [0] * n
    succ = [[] for _ in range(n)]
    for i, j in precedences:
        preds[j].append(i)
        succ[i].append(j)
        indeg[j] += 1
    order, stack = [], [v for v in range(n) if indeg[v] == 0]
    while stack:
        v = stack.pop(0)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return order, preds


def enumerate_feasible(model: Model, D=None, limits: Optional[EnumLimits] = None) -> np.ndarray:
    """All start vectors inside the bounds that respect precedences and capacities.

    Returns an ``(m, n)`` integer array in lexicographic order. Bounds default
    to the initial windows. Raises :class:`EnumerationBudgetExceeded` instead
    of truncating.
    """
    limits = limits or EnumLimits()
    proj = _as_project(model)
    n = proj.n
    lb = list(proj.est0) if D is None else [D.lb[i] for i in range(n)]
    ub = list(proj.lst0) if D is None else [D.ub[i] for i in range(n)]
    if n > limits.max_activities:
        raise EnumerationBudgetExceeded(f"{n} activities > {limits.max_activities}")
    if any(lo > hi for lo, hi in zip(lb, ub)):
        return np.zeros((0, n), dtype=np.int64)
    t0 = min(lb, default=0)
    T = max((hi + p for hi, p in zip(ub, proj.durations)), default=t0) - t0
    if T > limits.max_horizon:
        raise EnumerationBudgetExceeded(f"horizon {T} > {limits.max_horizon}")
    order, preds = _topo(n, proj.precedences)
    K = len(proj.capacities)
    caps = np.array(proj.capacities, dtype=np.int64).reshape(1, K, 1)
    starts = np.zeros((1, n), dtype=np.int64)
    usage = np.zeros((1, K, max(T, 1)), dtype=np.int64)
    for i in order:
        p = proj.durations[i]
        req = np.array([proj.demands[k][i] for k in range(K)], dtype=np.int64).reshape(1, K)
        width = ub[i] - lb[i] + 1
        if len(starts) * width > limits.node_budget:
            raise EnumerationBudgetExceeded(f"{len(starts) * width} candidates > {limits.node_budget}")
        new_starts, new_usage = [], []
        for s in range(lb[i], ub[i] + 1):
            ok = np.ones(len(starts), dtype=bool)
            for j in preds[i]:
                ok &= starts[:, j] + proj.durations[j] <= s
            a, b = s - t0, s - t0 + p
            if p > 0:
                window = usage[:, :, a:b] + req[:, :, None]
                ok &= (window <= caps).all(axis=(1, 2))
            if not ok.any():
                continue
            st = starts[ok].copy()
            st[:, i] = s
            us = usage[ok].copy()
            if p > 0:
                us[:, :, a:b] += req[:, :, None]
            new_starts.append(st)
            new_usage.append(us)
        if not new_starts:
            return np.zeros((0, n), dtype=np.int64)
        starts = np.concatenate(new_starts)
        usage = np.concatenate(new_usage)
    idx = np.lexsort(starts.T[::-1])
    return starts[idx]


def projection(feasible: np.ndarray) -> list[Optional[tuple[int, int]]]:
    """Per-variable ``(min, max)`` over the feasible schedules, ``None`` if empty."""
    if len(feasible) == 0:
        return [None] * feasible.shape[1]
    return list(zip(feasible.min(axis=0).tolist(), feasible.max(axis=0).tolist()))


# -- energies ---------------------------------------------------------------


class EnergyTerms(NamedTuple):
    free: int
    fixed: int
    partial: int

    @property
    def total(self) -> int:
        return self.free + self.fixed + self.partial


def naive_energy(inst: Instance, D, begin: int, end: int) -> EnergyTerms:
    """Free energy of contained free parts, compulsory energy, and forced
    partial free energy of the window ``[begin, end)``, summed directly."""
    free = fixed = partial = 0
    for a in inst.activities:
        i, p, r = a.id, a.duration, a.usage
        if p == 0 or r == 0:
            continue
        est, lst = D.lb[i], D.ub[i]
        ect, lct = est + p, lst + p
        cp = max(0, ect - lst)
        pef = p - cp
        for t in range(begin, end):
            if lst <= t < ect:
                fixed += r
        if pef == 0 or est < begin:
            continue
        if lct <= end:
            free += r * pef
        else:
            partial += r * max(0, end - (lct - pef))
    return EnergyTerms(free, fixed, partial)


def naive_overloaded_windows(inst: Instance, D) -> list[tuple[int, int]]:
    """Every task-interval window whose energy exceeds the capacity."""
    free = []
    for a in inst.activities:
        i, p = a.id, a.duration
        if p == 0 or a.usage == 0:
            continue
        if p - max(0, D.lb[i] + p - D.ub[i]) > 0:
            free.append(i)
    dur = inst.durations
    begins = sorted({D.lb[a] for a in free})
    ends = sorted({D.ub[b] + dur[b] for b in free})
    out = []
    for b in begins:
        for e in ends:
            if b < e and naive_energy(inst, D, b, e).total > inst.capacity * (e - b):
                out.append((b, e))
    return out


# -- explanation checking ---------------------------------------------------


class Verdict(NamedTuple):
    valid: bool
    counterexample: Optional[dict] = None

    def __bool__(self):
        return self.valid


def _boxes(proj: Project, lits, domains=None):
    """Start intervals implied by the initial windows and the given literals.

    Variables beyond the activities (makespan, Booleans) start from
    ``domains[var]`` when given, otherwise unbounded.
    """
    lo = list(proj.est0)
    hi = list(proj.lst0)
    extra: dict[int, list[int]] = {v: list(b) for v, b in (domains or {}).items()}
    for lit in lits:
        if lit.var >= proj.n:
            box = extra.setdefault(lit.var, [-(10**9), 10**9])
            if lit.ge:
                box[0] = max(box[0], lit.value)
            else:
                box[1] = min(box[1], lit.value)
            continue
        if lit.ge:
            lo[lit.var] = max(lo[lit.var], lit.value)
        else:
            hi[lit.var] = min(hi[lit.var], lit.value)
    return lo, hi, extra


def _overlap(s: int, p: int, b: int, e: int) -> int:
    return max(0, min(s + p, e) - max(s, b))


def _min_overlap(lo: int, hi: int, p: int, b: int, e: int) -> int:
    return min(_overlap(lo, p, b, e), _overlap(hi, p, b, e))


def _energetic(proj: Project, k: int, expl) -> Verdict:
    lo, hi, _ = _boxes(proj, expl.antecedents)
    if any(a > b for a, b in zip(lo, hi)):
        return Verdict(True)
    dur, dem, cap = proj.durations, proj.demands[k], proj.capacities[k]
    b, e = expl.window

    def others(skip, wb, we):
        return sum(dem[i] * _min_overlap(lo[i], hi[i], dur[i], wb, we)
                   for i in range(proj.n) if i != skip)

    cons = expl.consequent
    if cons is None:
        energy = others(-1, b, e)
        if energy > cap * (e - b):
            return Verdict(True)
        return Verdict(False, {"window": (b, e), "energy": energy, "available": cap * (e - b)})
    u = cons.var
    if cons.ge:
        placements = range(lo[u], min(hi[u], cons.value - 1) + 1)
    else:
        placements = range(max(lo[u], cons.value + 1), hi[u] + 1)
    for s in placements:
        windows = [(b, e)]
        sb, se = max(b, s), min(e, s + dur[u])
        if sb < se and (sb, se) != (b, e):
            windows.append((sb, se))
        if not any(others(u, wb, we) + dem[u] * _overlap(s, dur[u], wb, we) > cap * (we - wb)
                   for wb, we in windows):
            return Verdict(False, {"activity": u, "start": s, "window": (b, e)})
    return Verdict(True)


def _precedence(proj: Project, expl, domains) -> Verdict:
    x, y, d = expl.edge
    lits = list(expl.antecedents)
    if expl.consequent is not None:
        lits.append(expl.consequent.negate())
    lo, hi, extra = _boxes(proj, lits, domains)

    def box(v):
        if v < proj.n:
            return lo[v], hi[v]
        return tuple(extra.get(v, (-(10**9), 10**9)))

    (xl, xh), (yl, yh) = box(x), box(y)
    if xl > xh or yl > yh or xl + d > yh:
        return Verdict(True)
    return Verdict(False, {"x": xl, "y": yh})


def _disjunction(proj: Project, expl, domains) -> Verdict:
    i, j, b, pi, pj = expl.edge
    lits = list(expl.antecedents)
    if expl.consequent is not None:
        lits.append(expl.consequent.negate())
    lo, hi, extra = _boxes(proj, lits, domains)
    bl, bh = extra.get(b, (0, 1))
    bl, bh = max(bl, 0), min(bh, 1)
    if lo[i] > hi[i] or lo[j] > hi[j]:
        return Verdict(True)
    if bl <= 1 <= bh and lo[i] + pi <= hi[j]:
        return Verdict(False, {"b": 1, "i": lo[i], "j": hi[j]})
    if bl <= 0 <= bh and lo[j] + pj <= hi[i]:
        return Verdict(False, {"b": 0, "j": lo[j], "i": hi[i]})
    return Verdict(True)


def check_explanation(model: Model, expl, domains=None) -> Verdict:
    """Check an explanation against the constraint it was derived from.

    Energetic explanations (time-table and TTEF) are checked by minimal
    overlaps under the antecedent bounds; binary ones by interval reasoning.
    ``domains`` gives the initial ``(lo, hi)`` of variables other than start
    times. Explanations without a local constraint (learned-clause reasons)
    are rejected with ``ValueError``; see :func:`clause_violations`.
    """
    proj = _as_project(model)
    kind = expl.kind
    if kind in ("tt-check", "tt-filter", "ttef-check", "ttef-filter"):
        return _energetic(proj, expl.resource or 0, expl)
    if kind == "precedence":
        return _precedence(proj, expl, domains)
    if kind == "disjunction":
        return _disjunction(proj, expl, domains)
    if kind == "bound-conflict":
        parent = expl.parent
        if parent is None:
            return Verdict(True)
        if parent.kind != "clause":
            v = check_explanation(proj, parent, domains)
            if not v:
                return v
        c = parent.consequent
        if c is None:
            return Verdict(True)
        lo, hi, extra = _boxes(proj, expl.antecedents, domains)
        a, b = (lo[c.var], hi[c.var]) if c.var < proj.n else extra.get(c.var, (-(10**9), 10**9))
        clash = a > b or (b < c.value if c.ge else a > c.value)
        return Verdict(clash, None if clash else {"consequent": c, "box": (a, b)})
    raise ValueError(f"no local check for explanation kind {kind!r}")


def clause_violations(proj: Project, clause, feasible: np.ndarray, obj_var: int,
                      obj_ub: int, bool_pairs: dict[int, tuple[int, int]]) -> np.ndarray:
    """Rows of ``feasible`` (with makespan <= ``obj_ub``) that falsify ``clause``.

    The makespan variable ranges over every value in ``[makespan, obj_ub]``;
    a Boolean ``b`` of pair ``(i, j)`` is 1 exactly when ``i`` finishes before
    ``j`` starts.
    """
    if len(feasible) == 0:
        return feasible
    dur = np.array(proj.durations, dtype=np.int64)
    ms = (feasible + dur).max(axis=1)
    keep = ms <= obj_ub
    F, ms = feasible[keep], ms[keep]
    if len(F) == 0:
        return F
    bad = np.zeros(len(F), dtype=bool)
    for o in range(int(ms.min()), obj_ub + 1):
        rows = ms <= o
        sat = np.zeros(len(F), dtype=bool)
        for lit in clause:
            if lit.var < proj.n:
                col = F[:, lit.var]
            elif lit.var == obj_var:
                col = np.full(len(F), o)
            else:
                i, j = bool_pairs[lit.var]
                col = (F[:, i] + dur[i] <= F[:, j]).astype(np.int64)
            sat |= (col >= lit.value) if lit.ge else (col <= lit.value)
        bad |= rows & ~sat
    return F[bad]


def consistent_rows(proj: Project, feasible: np.ndarray, bounds, obj_var: int,
                    bool_pairs: dict[int, tuple[int, int]]) -> np.ndarray:
    """Mask of the schedules compatible with solver bounds.

    Start times must lie in their bounds, the makespan must not exceed the
    bound of ``obj_var`` and every fixed Boolean must agree with the order of
    its pair.
    """
    lb, ub = bounds
    n = proj.n
    if len(feasible) == 0:
        return np.zeros(0, dtype=bool)
    dur = np.array(proj.durations, dtype=np.int64)
    mask = ((feasible >= np.array(lb[:n])) & (feasible <= np.array(ub[:n]))).all(axis=1)
    mask &= (feasible + dur).max(axis=1) <= ub[obj_var]
    for b, (i, j) in bool_pairs.items():
        if lb[b] == ub[b]:
            before = feasible[:, i] + dur[i] <= feasible[:, j]
            mask &= before if lb[b] == 1 else ~before
    return mask


# -- random instances ---------------------------------------------------------


def random_instance(rng: random.Random, limits: Optional[EnumLimits] = None,
                    n_range=(2, 6), max_duration=4, density=0.2) -> Instance:
    """Small random cumulative instance within ``limits``.

    ``n`` in ``n_range``, ``p`` in ``[0, max_duration]``, ``R`` in
    ``[1, max_capacity]``, ``r`` in ``[0, R]``; each pair ``i < j`` gets a
    precedence with probability ``density``. The horizon is drawn between
    the energy bound and the serial length so the resource is contended, and
    each window is either the full ``[0, H - p]`` or a random sub-interval.
    """
    limits = limits or EnumLimits()
    n = rng.randint(n_range[0], min(n_range[1], limits.max_activities))
    R = rng.randint(1, limits.max_capacity)
    durations = [rng.randint(0, max_duration) for _ in range(n)]
    usages = [rng.randint(0, R) for _ in range(n)]
    energy = -(-sum(p * r for p, r in zip(durations, usages)) // R)
    lo = max(durations + [energy, 1])
    hi = max(lo, min(limits.max_horizon, sum(durations)))
    H = min(rng.randint(lo, hi), limits.max_horizon)
    precs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    windows = []
    for p in durations:
        if rng.random() < 0.6:
            windows.append((0, H - p))
            continue
        a = rng.randint(0, H - p)
        windows.append((a, rng.randint(a, H - p)))
    return Instance.build(durations, usages, R, precs, windows, horizon=H, name=f"rand{rng.random():.6f}")
