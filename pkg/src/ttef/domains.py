"""Trailed bounds store and the bounds-literal vocabulary.

Integer variables (start times, the makespan) and Boolean variables share one
representation: a Boolean is an integer variable over ``[0, 1]``. A literal is
either ``[[v <= x]]`` (``ge=True``) or ``[[x <= v]]`` (``ge=False``). Literals
are never allocated up front; they exist only as values inside explanations,
decisions and learned clauses, and their truth is read off the current bounds.
"""

from __future__ import annotations

import enum
from bisect import bisect_left
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .model import Bounds


class Lit(NamedTuple):
    var: int
    ge: bool
    value: int

    def negate(self) -> "Lit":
        if self.ge:
            return Lit(self.var, False, self.value - 1)
        return Lit(self.var, True, self.value + 1)

    def __str__(self):
        if self.ge:
            return f"[[{self.value} <= x{self.var}]]"
        return f"[[x{self.var} <= {self.value}]]"


def geq(var: int, v: int) -> Lit:
    return Lit(var, True, v)


def leq(var: int, v: int) -> Lit:
    return Lit(var, False, v)


def bool_true(var: int) -> Lit:
    return Lit(var, True, 1)


def bool_false(var: int) -> Lit:
    return Lit(var, False, 0)


@dataclass(frozen=True, eq=False)
class Explanation:
    """Clause ``antecedents -> consequent``; ``consequent=None`` means failure.

    The remaining fields are metadata for auditing: the propagator ``kind``,
    the resource index and time ``window`` of energetic explanations, the
    filtered activity ``subject``, the widening budget ``slack`` and, for
    binary constraints, the ``edge`` they were derived from.
    """

    antecedents: tuple[Lit, ...]
    consequent: Optional[Lit] = None
    kind: str = ""
    resource: Optional[int] = None
    window: Optional[tuple[int, int]] = None
    subject: Optional[int] = None
    slack: Optional[int] = None
    edge: Optional[tuple] = None
    parent: Optional["Explanation"] = None

    @property
    def is_failure(self) -> bool:
        return self.consequent is None

    def clause(self) -> tuple[Lit, ...]:
        lits = tuple(a.negate() for a in self.antecedents)
        return lits if self.consequent is None else lits + (self.consequent,)

    def __str__(self):
        lhs = " & ".join(map(str, self.antecedents)) or "true"
        return f"{lhs} -> {self.consequent if self.consequent is not None else 'FAIL'}"


ROOT = Explanation((), None, kind="root")


class Update(enum.Enum):
    CHANGED = 1
    UNCHANGED = 0
    CONFLICT = -1


class TrailEntry(NamedTuple):
    var: int
    is_lb: bool
    new: int
    old: int
    reason: Optional[Explanation]  # None for decisions
    level: int

    @property
    def literal(self) -> Lit:
        return Lit(self.var, self.is_lb, self.new)


class DomainStore:
    """Bounds of integer variables with a chronological trail.

    ``lb`` and ``ub`` are plain lists and may be read directly; all writes go
    through :meth:`set_lb`, :meth:`set_ub` and :meth:`decide` so they can be
    undone by :meth:`backtrack_to`.
    """

    def __init__(self, lb0=(), ub0=()):
        self.lb0: list[int] = []
        self.ub0: list[int] = []
        self.lb: list[int] = []
        self.ub: list[int] = []
        self.trail: list[TrailEntry] = []
        # per variable: trail indices of bound changes and the bound values
        self._lb_idx: list[list[int]] = []
        self._lb_val: list[list[int]] = []
        self._ub_idx: list[list[int]] = []
        self._ub_neg: list[list[int]] = []
        self._level_start: list[int] = []
        self.conflict: Optional[Explanation] = None
        for lo, hi in zip(lb0, ub0):
            self.new_var(lo, hi)

    @property
    def level(self) -> int:
        return len(self._level_start)

    @property
    def num_vars(self) -> int:
        return len(self.lb)

    def new_var(self, lo: int, hi: int) -> int:
        if lo > hi:
            raise ValueError(f"empty initial domain [{lo}, {hi}]")
        self.lb0.append(lo)
        self.ub0.append(hi)
        self.lb.append(lo)
        self.ub.append(hi)
        self._lb_idx.append([])
        self._lb_val.append([])
        self._ub_idx.append([])
        self._ub_neg.append([])
        return len(self.lb) - 1

    def is_fixed(self, var: int) -> bool:
        return self.lb[var] == self.ub[var]

    # -- literals ---------------------------------------------------------

    def normalize(self, lit: Lit):
        """Canonical form of ``lit`` over the initial domain.

        Returns ``True``/``False`` for literals that are constant over the
        initial domain, otherwise the literal itself.
        """
        v = lit.value
        if lit.ge:
            if v <= self.lb0[lit.var]:
                return True
            if v > self.ub0[lit.var]:
                return False
        else:
            if v >= self.ub0[lit.var]:
                return True
            if v < self.lb0[lit.var]:
                return False
        return lit

    def literal_holds(self, lit: Lit) -> bool:
        if lit.ge:
            return self.lb[lit.var] >= lit.value
        return self.ub[lit.var] <= lit.value

    def literal_false(self, lit: Lit) -> bool:
        if lit.ge:
            return self.ub[lit.var] < lit.value
        return self.lb[lit.var] > lit.value

    def index_of(self, lit: Lit) -> Optional[int]:
        """Trail index of the entry that first made ``lit`` true.

        ``-1`` if it holds in the initial domain, ``None`` if it does not hold.
        """
        var, v = lit.var, lit.value
        if lit.ge:
            if v <= self.lb0[var]:
                return -1
            vals = self._lb_val[var]
            k = bisect_left(vals, v)
            return self._lb_idx[var][k] if k < len(vals) else None
        if v >= self.ub0[var]:
            return -1
        negs = self._ub_neg[var]
        k = bisect_left(negs, -v)
        return self._ub_idx[var][k] if k < len(negs) else None

    def level_of(self, lit: Lit) -> int:
        """Decision level at which ``lit`` became true (0 for root facts)."""
        t = self.index_of(lit)
        if t is None:
            raise ValueError(f"{lit} does not hold")
        return 0 if t < 0 else self.trail[t].level

    def explain(self, lits, consequent=None, **meta) -> Explanation:
        """Build an explanation, dropping antecedents that are constant true."""
        ants = []
        for lit in lits:
            nl = self.normalize(lit)
            if nl is True:
                continue
            if nl is False:
                raise ValueError(f"antecedent {lit} is false over the initial domain")
            ants.append(nl)
        return Explanation(tuple(ants), consequent, **meta)

    # -- updates ----------------------------------------------------------

    def set_lb(self, var: int, v: int, reason: Optional[Explanation]) -> Update:
        if v <= self.lb[var]:
            return Update.UNCHANGED
        if v > self.ub[var]:
            self._conflict(reason, leq(var, self.ub[var]))
            return Update.CONFLICT
        t = len(self.trail)
        self.trail.append(TrailEntry(var, True, v, self.lb[var], reason, self.level))
        self._lb_idx[var].append(t)
        self._lb_val[var].append(v)
        self.lb[var] = v
        return Update.CHANGED

    def set_ub(self, var: int, v: int, reason: Optional[Explanation]) -> Update:
        if v >= self.ub[var]:
            return Update.UNCHANGED
        if v < self.lb[var]:
            self._conflict(reason, geq(var, self.lb[var]))
            return Update.CONFLICT
        t = len(self.trail)
        self.trail.append(TrailEntry(var, False, v, self.ub[var], reason, self.level))
        self._ub_idx[var].append(t)
        self._ub_neg[var].append(-v)
        self.ub[var] = v
        return Update.CHANGED

    def apply(self, lit: Lit, reason: Optional[Explanation]) -> Update:
        if lit.ge:
            return self.set_lb(lit.var, lit.value, reason)
        return self.set_ub(lit.var, lit.value, reason)

    def _conflict(self, reason, opposing: Lit):
        extra = self.normalize(opposing)
        ants = reason.antecedents if reason is not None else ()
        if extra is not True:
            ants = ants + (extra,)
        self.conflict = Explanation(ants, None, kind="bound-conflict", parent=reason)

    def decide(self, lit: Lit) -> Update:
        """Open a new decision level and make ``lit`` true."""
        self._level_start.append(len(self.trail))
        return self.apply(lit, None)

    def backtrack_to(self, level: int) -> list[int]:
        """Undo every change made above ``level``; returns the touched variables."""
        if level > self.level or level < 0:
            raise ValueError(f"cannot backtrack to level {level} from level {self.level}")
        if level == self.level:
            return []
        stop = self._level_start[level]
        del self._level_start[level:]
        touched = []
        trail = self.trail
        while len(trail) > stop:
            e = trail.pop()
            touched.append(e.var)
            if e.is_lb:
                self.lb[e.var] = e.old
                self._lb_idx[e.var].pop()
                self._lb_val[e.var].pop()
            else:
                self.ub[e.var] = e.old
                self._ub_idx[e.var].pop()
                self._ub_neg[e.var].pop()
        self.conflict = None
        return touched

    def decision_literal(self, level: int) -> Lit:
        """The literal decided at ``level`` (1-based)."""
        return self.trail[self._level_start[level - 1]].literal

    def snapshot(self) -> Bounds:
        return Bounds(list(self.lb), list(self.ub))
