"""Propagation fixpoint, conflict analysis and branch-and-bound search.

The model has one start variable per activity, a makespan variable ``obj``
with ``S_i + p_i <= obj``, the precedences as difference constraints, one
Boolean per disjunctive pair guarding the two orders, and one cumulative
constraint per resource.

Propagation is driven by the trail: every new bound wakes the precedence,
disjunction and learned-clause propagators of its variable and marks the
resources of the activity dirty. A dirty resource runs, in order, the
time-table check, the TTEF check (``ttefc`` and ``ttef``), time-table
filtering and TTEF filtering (``ttef`` only). The loop stops when the trail
is drained and no resource is dirty.
"""

from __future__ import annotations

import random
import time
from bisect import bisect_left, insort
from dataclasses import dataclass, replace
from operator import itemgetter
from typing import Callable, Optional

from .cumulative import propagate_resource
from .domains import DomainStore, Explanation, Lit, Update, bool_false, bool_true, geq, leq
from .model import Bounds, Project

PROP_LEVELS = ("tt", "ttefc", "ttef")
MODES = ("ub", "lb")


_key = itemgetter(0)

@dataclass(frozen=True)
class SolverConfig:
    prop: str = "ttef"
    mode: str = "ub"
    restart_base: int = 250
    restart_factor: float = 2.0
    sgs_budget: int = 500
    time_limit: float = 600.0
    start_makespan: int = 1
    seed: int = 0
    learning: bool = True
    restarts: bool = True
    clause_cap: int = 20000

    def __post_init__(self):
        if self.prop not in PROP_LEVELS:
            raise ValueError(f"unknown propagation level {self.prop!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.restart_base < 1:
            raise ValueError("restart base must be >= 1")
        if self.restart_factor < 1.0:
            raise ValueError("restart factor must be >= 1.0")
        if self.sgs_budget < 0:
            raise ValueError("sgs budget must be >= 0")
        if self.start_makespan < 1:
            raise ValueError("start makespan must be >= 1")


def restart_limit(config: SolverConfig, k: int) -> float:
    """Failures allowed in the ``k``-th restart run."""
    return config.restart_base * config.restart_factor ** k


@dataclass
class SolveResult:
    status: str  # optimal | feasible | lower_bound | infeasible | unknown
    value: Optional[int]
    failures: int = 0
    decisions: int = 0
    seconds: float = 0.0
    schedule: Optional[tuple[int, ...]] = None
    restarts: int = 0


class _Clause:
    __slots__ = ("lits", "deleted")

    def __init__(self, lits):
        self.lits = lits
        self.deleted = False


class _Timeout(Exception):
    pass


Trace = Callable[[str, object], None]


class Solver:
    """One search over a :class:`~ttef.model.Project`.

    ``trace``, if given, is called as ``trace(event, payload)`` with events
    ``"explanation"`` (every propagator explanation), ``"learned"``
    (``(clause, obj_bound)``) and ``"node"`` (``(before, after)`` bounds
    around each propagation, ``after`` is ``None`` on failure).
    """

    def __init__(self, project: Project, config: SolverConfig = SolverConfig(),
                 trace: Optional[Trace] = None, deadline: Optional[float] = None):
        self.project = project
        self.config = config
        self.trace = trace
        self.deadline = deadline
        n = self.n = project.n
        dur = project.durations
        st = self.store = DomainStore(project.est0, project.lst0)
        lo = min(project.est0, default=0)
        self.obj_var = st.new_var(lo, max(project.horizon, lo))
        self.obj_bound = st.ub0[self.obj_var]

        self.resources = project.resources
        self.infeasible_at_load = any(
            p > 0 and r > inst.capacity
            for inst in self.resources for p, r in zip(dur, inst.usages)
        )
        self.res_of = [
            [k for k, inst in enumerate(self.resources) if inst.usages[i] > 0 and dur[i] > 0]
            for i in range(n)
        ]

        edges = [(i, j, dur[i]) for i, j in project.precedences]
        edges += [(i, self.obj_var, dur[i]) for i in range(n)]
        direct = set(project.precedences)
        self.disj = []
        self.bool_pairs: dict[int, tuple[int, int]] = {}
        for i in range(n):
            for j in range(i + 1, n):
                if dur[i] == 0 or dur[j] == 0 or (i, j) in direct or (j, i) in direct:
                    continue
                if any(inst.usages[i] + inst.usages[j] > inst.capacity for inst in self.resources):
                    b = st.new_var(0, 1)
                    self.disj.append((i, j, b, dur[i], dur[j]))
                    self.bool_pairs[b] = (i, j)

        nv = st.num_vars
        self.edges = edges
        self.out_edges = [[] for _ in range(nv)]
        self.in_edges = [[] for _ in range(nv)]
        for e in edges:
            self.out_edges[e[0]].append(e)
            self.in_edges[e[1]].append(e)
        self.disj_of = [[] for _ in range(nv)]
        for d in self.disj:
            for v in d[:3]:
                self.disj_of[v].append(d)

        rng = random.Random(config.seed)
        self.activity = [rng.random() * 1e-6 for _ in range(nv)]
        self.var_inc = 1.0
        self.phase = [1] * nv
        self.decision_vars = list(range(n)) + sorted(self.bool_pairs)
        self.wl_lb = [[] for _ in range(nv)]  # clauses watching [[x <= v]] on x
        self.wl_ub = [[] for _ in range(nv)]  # clauses watching [[v <= x]] on x
        self.clauses: list[_Clause] = []
        self.qhead = 0
        self.dirty: set[int] = set()
        self._second: list[bool] = []  # per level: branch already flipped

        self.failures = 0
        self.decisions = 0
        self.restarts = 0
        self.incumbent: Optional[int] = None
        self.best: Optional[tuple[int, ...]] = None

    # -- propagation ------------------------------------------------------

    def _emit(self, expl):
        if self.trace is not None:
            self.trace("explanation", expl)
        return expl

    def _prec_lb(self, x, y, d):
        st = self.store
        v = st.lb[x] + d
        if v > st.lb[y]:
            ex = self._emit(st.explain((geq(x, st.lb[x]),), geq(y, v), kind="precedence", edge=(x, y, d)))
            if st.set_lb(y, v, ex) is Update.CONFLICT:
                return st.conflict
        return None

    def _prec_ub(self, x, y, d):
        st = self.store
        v = st.ub[y] - d
        if v < st.ub[x]:
            ex = self._emit(st.explain((leq(y, st.ub[y]),), leq(x, v), kind="precedence", edge=(x, y, d)))
            if st.set_ub(x, v, ex) is Update.CONFLICT:
                return st.conflict
        return None

    def _disjunction(self, d):
        i, j, b, pi, pj = d
        st = self.store
        lb, ub = st.lb, st.ub
        if lb[b] == 1:
            return self._ordered(i, j, b, pi, pj, bool_true(b))
        if ub[b] == 0:
            return self._ordered(j, i, b, pj, pi, bool_false(b))
        if lb[i] + pi > ub[j]:
            ex = self._emit(st.explain((geq(i, ub[j] - pi + 1), leq(j, ub[j])), bool_false(b),
                                       kind="disjunction", edge=(i, j, b, pi, pj)))
            if st.set_ub(b, 0, ex) is Update.CONFLICT:
                return st.conflict
        elif lb[j] + pj > ub[i]:
            ex = self._emit(st.explain((geq(j, ub[i] - pj + 1), leq(i, ub[i])), bool_true(b),
                                       kind="disjunction", edge=(i, j, b, pi, pj)))
            if st.set_lb(b, 1, ex) is Update.CONFLICT:
                return st.conflict
        return None

    def _ordered(self, x, y, b, px, py, guard):
        st = self.store
        edge = (x, y, b, px, py) if guard.ge else (y, x, b, py, px)
        v = st.lb[x] + px
        if v > st.lb[y]:
            ex = self._emit(st.explain((guard, geq(x, st.lb[x])), geq(y, v), kind="disjunction", edge=edge))
            if st.set_lb(y, v, ex) is Update.CONFLICT:
                return st.conflict
        v = st.ub[y] - px
        if v < st.ub[x]:
            ex = self._emit(st.explain((guard, leq(y, st.ub[y])), leq(x, v), kind="disjunction", edge=edge))
            if st.set_ub(x, v, ex) is Update.CONFLICT:
                return st.conflict
        return None

    def _cumulative(self, k):
        emit = self._emit if self.trace is not None else None
        return propagate_resource(self.resources[k], self.store, self.config.prop, k, emit)

    def _clauses_on(self, e):
        st = self.store
        v, is_lb = e.var, e.is_lb
        # entries are (key, clause) sorted by key: the watched value on lb
        # lists ([[x <= value]] is false once lb > value) and minus the value
        # on ub lists ([[value <= x]] is false once ub < value); this trail
        # entry falsifies exactly the watches with old <= key < new
        if is_lb:
            wl, old, new = self.wl_lb[v], e.old, e.new
        else:
            wl, old, new = self.wl_ub[v], -e.old, -e.new
        lo = bisect_left(wl, old, key=_key)
        hi = bisect_left(wl, new, lo, key=_key)
        if lo == hi:
            return None
        hit = wl[lo:hi]
        keep = []
        side = not is_lb
        lb, ub = st.lb, st.ub
        conflict = None
        for idx, entry in enumerate(hit):
            c = entry[1]
            if c.deleted:
                continue
            lits = c.lits
            l0 = lits[0]
            w = 0 if (l0.var == v and l0.ge == side) else 1
            other = lits[1 - w]
            if (lb[other.var] >= other.value) if other.ge else (ub[other.var] <= other.value):
                keep.append(entry)
                continue
            for m in range(2, len(lits)):
                l = lits[m]
                if (ub[l.var] >= l.value) if l.ge else (lb[l.var] <= l.value):
                    # a clause has one literal per (variable, side), so the
                    # new watch never lands on the list being scanned
                    lits[w], lits[m] = l, lits[w]
                    self._watch(c, l)
                    break
            else:
                keep.append(entry)
                if (ub[other.var] < other.value) if other.ge else (lb[other.var] > other.value):
                    conflict = Explanation(tuple(l.negate() for l in lits), None, kind="clause")
                else:
                    ants = tuple(l.negate() for k, l in enumerate(lits) if k != 1 - w)
                    if st.apply(other, Explanation(ants, other, kind="clause")) is Update.CONFLICT:
                        conflict = st.conflict
                if conflict is not None:
                    keep.extend(hit[idx + 1:])
                    break
        wl[lo:hi] = keep
        return conflict

    def _watch(self, c, lit):
        if lit.ge:
            insort(self.wl_ub[lit.var], (-lit.value, c), key=_key)
        else:
            insort(self.wl_lb[lit.var], (lit.value, c), key=_key)

    def _entry(self, e):
        v = e.var
        st = self.store
        if e.is_lb:
            for x, y, d in self.out_edges[v]:
                c = self._prec_lb(x, y, d)
                if c is not None:
                    return c
        else:
            for x, y, d in self.in_edges[v]:
                c = self._prec_ub(x, y, d)
                if c is not None:
                    return c
        for d in self.disj_of[v]:
            c = self._disjunction(d)
            if c is not None:
                return c
        if self.wl_lb[v] or self.wl_ub[v]:
            c = self._clauses_on(e)
            if c is not None:
                return c
        if v < self.n:
            self.dirty.update(self.res_of[v])
        elif v in self.bool_pairs and st.lb[v] == st.ub[v]:
            self.phase[v] = st.lb[v]
        return None

    def propagate(self) -> Optional[Explanation]:
        """Run all propagators to a fixpoint; returns a failure or ``None``."""
        st = self.store
        trail = st.trail
        while True:
            while self.qhead < len(trail):
                e = trail[self.qhead]
                self.qhead += 1
                c = self._entry(e)
                if c is not None:
                    return c
            if not self.dirty:
                return None
            k = min(self.dirty)
            self.dirty.discard(k)
            c = self._cumulative(k)
            if c is not None:
                return c

    def root_propagate(self) -> Optional[Explanation]:
        """Initial propagation of every constraint at level 0."""
        if self.infeasible_at_load:
            return Explanation((), None, kind="load")
        for x, y, d in self.edges:
            c = self._prec_lb(x, y, d) or self._prec_ub(x, y, d)
            if c is not None:
                return c
        for d in self.disj:
            c = self._disjunction(d)
            if c is not None:
                return c
        self.dirty.update(range(len(self.resources)))
        return self.propagate()

    # -- learning ---------------------------------------------------------

    def _backtrack(self, level):
        self.store.backtrack_to(level)
        del self._second[level:]
        self.qhead = min(self.qhead, len(self.store.trail))
        self.dirty.clear()

    def _bump(self, v):
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for k in range(len(act)):
                act[k] *= 1e-100
            self.var_inc *= 1e-100

    def analyze(self, conflict: Explanation):
        """1UIP analysis. Returns ``(clause, backjump_level)`` or ``None`` when
        the failure holds at the root.

        The first literal of the clause is the asserting one. If the failure
        does not involve the current level, search first backtracks to the
        deepest level it does involve.
        """
        st = self.store
        trail = st.trail

        def level_of(lit):
            t = st.index_of(lit)
            return 0 if t < 0 else trail[t].level

        level = max((level_of(a) for a in conflict.antecedents), default=0)
        if level == 0:
            return None
        if level < st.level:
            self._backtrack(level)

        pending: dict[int, Lit] = {}
        lower: dict[tuple[int, bool], Lit] = {}

        def add(lit):
            t = st.index_of(lit)
            if t < 0:
                return
            lev = trail[t].level
            if lev == 0:
                return
            if lev == level:
                pending[t] = lit
                return
            key = (lit.var, lit.ge)
            old = lower.get(key)
            if old is None or (lit.value > old.value if lit.ge else lit.value < old.value):
                lower[key] = lit

        for a in conflict.antecedents:
            add(a)
        while len(pending) > 1:
            t = max(pending)
            del pending[t]
            e = trail[t]
            self._bump(e.var)
            for a in e.reason.antecedents:
                add(a)
        (uip,) = pending.values()
        lower.pop((uip.var, uip.ge), None)
        rest = sorted(self._minimize(uip, lower), key=level_of, reverse=True)
        self._bump(uip.var)
        for a in rest:
            self._bump(a.var)
        self.var_inc /= 0.95
        clause = [uip.negate()] + [a.negate() for a in rest]
        return clause, (level_of(rest[0]) if rest else 0)

    def _minimize(self, uip: Lit, lower: dict) -> list[Lit]:
        """Drop literals of ``lower`` implied by the rest of the clause.

        A literal is implied when every antecedent of its reason is a root
        fact, is entailed by a clause literal set at the same trail entry, or
        is implied in turn. Dependencies only point to earlier entries, so
        all implied literals can go at once.
        """
        st = self.store
        trail = st.trail
        at: dict[int, list[Lit]] = {}
        for lit in (uip, *lower.values()):
            at.setdefault(st.index_of(lit), []).append(lit)
        memo: dict[int, bool] = {}

        def implied(t, depth):
            if t in memo:
                return memo[t]
            e = trail[t]
            if e.reason is None or depth > 32:
                return False
            ok = all(holds(a, depth + 1) for a in e.reason.antecedents)
            memo[t] = ok
            return ok

        def holds(a, depth):
            t = st.index_of(a)
            if t < 0 or trail[t].level == 0:
                return True
            for m in at.get(t, ()):
                if m.var == a.var and m.ge == a.ge and (m.value >= a.value if a.ge else m.value <= a.value):
                    return True
            return implied(t, depth)

        return [lit for lit in lower.values() if not implied(st.index_of(lit), 0)]

    def _learn(self, clause, level):
        self._backtrack(level)
        st = self.store
        if self.trace is not None:
            self.trace("learned", (tuple(clause), self.obj_bound))
        if len(clause) > 1:
            c = _Clause(list(clause))
            self._watch(c, clause[0])
            self._watch(c, clause[1])
            self.clauses.append(c)
            if len(self.clauses) > self.config.clause_cap:
                half = len(self.clauses) // 2
                for old in self.clauses[:half]:
                    old.deleted = True
                del self.clauses[:half]
                for wl in (*self.wl_lb, *self.wl_ub):
                    wl[:] = [e for e in wl if not e[1].deleted]
        reason = Explanation(tuple(l.negate() for l in clause[1:]), clause[0], kind="clause")
        if st.apply(clause[0], reason) is Update.CONFLICT:
            return st.conflict
        return None

    # -- search -----------------------------------------------------------

    def _check_time(self):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Timeout

    def _all_fixed(self):
        lb, ub = self.store.lb, self.store.ub
        return all(lb[i] == ub[i] for i in range(self.n))

    def _pick(self, since_restart):
        st = self.store
        lb, ub = st.lb, st.ub
        if since_restart < self.config.sgs_budget:
            best = None
            for i in range(self.n):
                if lb[i] != ub[i]:
                    key = (lb[i], ub[i], i)
                    if best is None or key < best:
                        best = key
            if best is not None:
                return leq(best[2], best[0])
        act = self.activity
        best_v, best_a = -1, -1.0
        for v in self.decision_vars:
            if lb[v] != ub[v] and act[v] > best_a:
                best_v, best_a = v, act[v]
        if best_v < 0:
            return None
        if best_v >= self.n:
            return bool_true(best_v) if self.phase[best_v] else bool_false(best_v)
        return leq(best_v, (lb[best_v] + ub[best_v]) // 2)

    def _resolve(self, conflict) -> bool:
        """Handle a failure; returns ``False`` when the search space is exhausted."""
        self.failures += 1
        st = self.store
        if st.level == 0:
            return False
        if not self.config.learning:
            while self._second and self._second[-1]:
                self._backtrack(st.level - 1)
            if st.level == 0:
                return False
            d = st.decision_literal(st.level)
            self._backtrack(st.level - 1)
            st.decide(d.negate())
            self._second.append(True)
            return True
        while True:
            res = self.analyze(conflict)
            if res is None:
                return False
            conflict = self._learn(*res)
            if conflict is None:
                return True

    def _node_propagate(self):
        if self.trace is None:
            return self.propagate()
        st = self.store
        before = Bounds(list(st.lb), list(st.ub))
        c = self.propagate()
        self.trace("node", (before, None if c is not None else Bounds(list(st.lb), list(st.ub))))
        return c

    def search(self, satisfy: bool = False) -> str:
        """Run until exhausted, a solution (``satisfy``) or the deadline.

        Returns ``"exhausted"``, ``"solution"`` or ``"timeout"``; solutions
        found along the way are kept in :attr:`incumbent` and :attr:`best`.
        """
        st = self.store
        cfg = self.config
        use_restarts = cfg.restarts and cfg.learning and not satisfy
        conflict = self.root_propagate()
        if conflict is not None:
            self.failures += 1
            return "exhausted"
        since_restart = 0
        fails_at_restart = self.failures
        limit = restart_limit(cfg, 0)
        try:
            while True:
                self._check_time()
                conflict = self._node_propagate()
                if conflict is not None:
                    if not self._resolve(conflict):
                        return "exhausted"
                    continue
                if self._all_fixed():
                    m = st.lb[self.obj_var]
                    self.incumbent = m
                    self.best = tuple(st.lb[: self.n])
                    if satisfy:
                        return "solution"
                    self._backtrack(0)
                    since_restart = 0
                    self.obj_bound = m - 1
                    ex = Explanation((), leq(self.obj_var, m - 1), kind="objective")
                    if st.set_ub(self.obj_var, m - 1, ex) is Update.CONFLICT:
                        return "exhausted"
                    continue
                if use_restarts and self.failures - fails_at_restart >= limit:
                    self._backtrack(0)
                    self.restarts += 1
                    limit = restart_limit(cfg, self.restarts)
                    fails_at_restart = self.failures
                    since_restart = 0
                    continue
                lit = self._pick(since_restart)
                self.decisions += 1
                since_restart += 1
                st.decide(lit)
                self._second.append(False)
        except _Timeout:
            return "timeout"


def _deadline(config: SolverConfig, t0: float) -> float:
    return t0 + config.time_limit


def solve_ub(project: Project, config: SolverConfig = SolverConfig(), trace: Optional[Trace] = None) -> SolveResult:
    """Branch-and-bound on the makespan."""
    t0 = time.perf_counter()
    s = Solver(project, config, trace, _deadline(config, t0))
    outcome = s.search()
    if outcome == "exhausted":
        status = "optimal" if s.incumbent is not None else "infeasible"
    else:
        status = "feasible" if s.incumbent is not None else "unknown"
    return SolveResult(status, s.incumbent, s.failures, s.decisions,
                       time.perf_counter() - t0, s.best, s.restarts)


def solve_lb(project: Project, config: SolverConfig = SolverConfig(), trace: Optional[Trace] = None) -> SolveResult:
    """Destructive lower bounds: refute ``m = start, start + 1, ...``.

    Each ``m`` gets a fresh solver on the deadline-restricted model, searched
    without restarts. The first satisfiable ``m`` is optimal; on timeout the
    smallest unrefuted ``m`` is a valid lower bound.
    """
    t0 = time.perf_counter()
    deadline = _deadline(config, t0)
    cfg = replace(config, restarts=False)
    failures = decisions = 0
    refuted_any = False
    m = config.start_makespan
    limit = max(project.horizon, max((lo + p for lo, p in zip(project.est0, project.durations)), default=0))
    while True:
        if m > limit:
            return SolveResult("infeasible", None, failures, decisions, time.perf_counter() - t0)
        if project.deadline_feasible(m):
            s = Solver(project.with_deadline(m), cfg, trace, deadline)
            outcome = s.search(satisfy=True)
            failures += s.failures
            decisions += s.decisions
            if outcome == "solution":
                return SolveResult("optimal", m, failures, decisions, time.perf_counter() - t0, s.best)
            if outcome == "timeout":
                status = "lower_bound" if refuted_any else "unknown"
                return SolveResult(status, m if refuted_any else None, failures, decisions,
                                   time.perf_counter() - t0)
        refuted_any = True
        m += 1


def solve(project: Project, config: SolverConfig = SolverConfig(), trace: Optional[Trace] = None) -> SolveResult:
    if config.mode == "lb":
        return solve_lb(project, config, trace)
    return solve_ub(project, config, trace)
