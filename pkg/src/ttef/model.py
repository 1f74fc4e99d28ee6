"""Instance data and the per-activity quantities derived from current bounds.

Everything here is a pure function of an :class:`Instance` and a bounds
holder, i.e. any object exposing indexable ``lb`` and ``ub`` sequences of
start-time bounds (a :class:`~ttef.domains.DomainStore` or a :class:`Bounds`
snapshot).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from typing import NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class Activity:
    id: int
    duration: int
    usage: int

    def __post_init__(self):
        if self.duration < 0 or self.usage < 0:
            raise ValueError(f"activity {self.id}: negative duration or usage")

    @property
    def energy(self) -> int:
        return self.duration * self.usage


class Bounds(NamedTuple):
    """Read-only snapshot of start-time bounds."""

    lb: Sequence[int]
    ub: Sequence[int]


@dataclass(frozen=True)
class Instance:
    """A single cumulative resource over a set of activities.

    ``precedences`` holds pairs ``(i, j)`` meaning ``S_i + p_i <= S_j``.
    ``est0``/``lst0`` are the initial start windows and ``horizon`` bounds
    every latest completion time.
    """

    activities: tuple[Activity, ...]
    capacity: int
    precedences: tuple[tuple[int, int], ...] = ()
    est0: tuple[int, ...] = ()
    lst0: tuple[int, ...] = ()
    horizon: int = 0
    name: str = ""

    def __post_init__(self):
        n = len(self.activities)
        for k, a in enumerate(self.activities):
            if a.id != k:
                raise ValueError(f"activity ids must be dense, got {a.id} at position {k}")
        if self.capacity < 0:
            raise ValueError("negative capacity")
        if len(self.est0) != n or len(self.lst0) != n:
            raise ValueError("windows must have one entry per activity")
        for a, lo, hi in zip(self.activities, self.est0, self.lst0):
            if lo > hi:
                raise ValueError(f"activity {a.id}: empty window [{lo}, {hi}]")
            if hi + a.duration > self.horizon:
                raise ValueError(f"activity {a.id}: lct {hi + a.duration} exceeds horizon {self.horizon}")
        check_precedences(n, self.precedences)

    @classmethod
    def build(cls, durations, usages, capacity, precedences=(), windows=None, horizon=None, name=""):
        """Convenience constructor from plain lists.

        Without explicit ``windows`` every activity gets ``[0, horizon - p_i]``
        and the horizon defaults to the sum of durations.
        """
        durations = [int(p) for p in durations]
        if horizon is None:
            horizon = sum(durations) if windows is None else max(hi + p for (_, hi), p in zip(windows, durations))
        if windows is None:
            windows = [(0, horizon - p) for p in durations]
        acts = tuple(Activity(i, p, int(r)) for i, (p, r) in enumerate(zip(durations, usages)))
        return cls(
            activities=acts,
            capacity=int(capacity),
            precedences=tuple((int(i), int(j)) for i, j in precedences),
            est0=tuple(int(lo) for lo, _ in windows),
            lst0=tuple(int(hi) for _, hi in windows),
            horizon=int(horizon),
            name=name,
        )

    @property
    def n(self) -> int:
        return len(self.activities)

    @cached_property
    def durations(self) -> tuple[int, ...]:
        return tuple(a.duration for a in self.activities)

    @cached_property
    def usages(self) -> tuple[int, ...]:
        return tuple(a.usage for a in self.activities)

    def overloaded_activities(self) -> list[int]:
        """Activities that cannot run at all because ``r_i > R``."""
        return [a.id for a in self.activities if a.duration > 0 and a.usage > self.capacity]

    def shifted(self, c: int) -> "Instance":
        """The same instance with every window and the horizon moved by ``c``."""
        return Instance(
            activities=self.activities,
            capacity=self.capacity,
            precedences=self.precedences,
            est0=tuple(v + c for v in self.est0),
            lst0=tuple(v + c for v in self.lst0),
            horizon=self.horizon + c,
            name=self.name,
        )

    @cached_property
    def cumulative_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(ids, p, r)`` of the activities with positive duration and usage."""
        ids = [a.id for a in self.activities if a.duration > 0 and a.usage > 0]
        return (np.array(ids, dtype=np.int64),
                np.array([self.activities[i].duration for i in ids], dtype=np.int64),
                np.array([self.activities[i].usage for i in ids], dtype=np.int64))

    def initial_bounds(self) -> Bounds:
        return Bounds(list(self.est0), list(self.lst0))


@dataclass(frozen=True)
class Project:
    """A multi-resource RCPSP model over shared start-time variables.

    ``demands[k][i]`` is the usage of activity ``i`` on resource ``k``.
    """

    durations: tuple[int, ...]
    demands: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    precedences: tuple[tuple[int, int], ...]
    est0: tuple[int, ...]
    lst0: tuple[int, ...]
    horizon: int
    name: str = ""
    resources: tuple[Instance, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.demands) != len(self.capacities):
            raise ValueError("one demand row per resource required")
        res = []
        for k, (row, cap) in enumerate(zip(self.demands, self.capacities)):
            if len(row) != len(self.durations):
                raise ValueError(f"resource {k}: demand row has wrong length")
            acts = tuple(Activity(i, p, r) for i, (p, r) in enumerate(zip(self.durations, row)))
            res.append(Instance(acts, cap, self.precedences, self.est0, self.lst0, self.horizon, f"{self.name}#R{k + 1}"))
        if not res:
            check_precedences(len(self.durations), self.precedences)
        object.__setattr__(self, "resources", tuple(res))

    @classmethod
    def from_instance(cls, inst: Instance) -> "Project":
        return cls(
            durations=tuple(inst.durations),
            demands=(tuple(inst.usages),),
            capacities=(inst.capacity,),
            precedences=inst.precedences,
            est0=inst.est0,
            lst0=inst.lst0,
            horizon=inst.horizon,
            name=inst.name,
        )

    @property
    def n(self) -> int:
        return len(self.durations)

    def shifted(self, c: int) -> "Project":
        return Project(
            self.durations, self.demands, self.capacities, self.precedences,
            tuple(v + c for v in self.est0), tuple(v + c for v in self.lst0),
            self.horizon + c, self.name,
        )

    def with_deadline(self, deadline: int) -> "Project":
        """Restrict every completion time to ``deadline``.

        Raises ``ValueError`` when a window becomes empty; check
        :meth:`deadline_feasible` first.
        """
        lst = tuple(min(hi, deadline - p) for hi, p in zip(self.lst0, self.durations))
        return Project(self.durations, self.demands, self.capacities, self.precedences,
                       self.est0, lst, min(self.horizon, deadline), self.name)

    def deadline_feasible(self, deadline: int) -> bool:
        return all(lo + p <= deadline for lo, p in zip(self.est0, self.durations))


def check_precedences(n: int, precedences) -> None:
    ts = TopologicalSorter({j: set() for j in range(n)})
    for i, j in precedences:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"precedence ({i}, {j}) references an unknown activity")
        ts.add(j, i)
    try:
        tuple(ts.static_order())
    except CycleError as exc:
        raise ValueError(f"precedence graph has a cycle: {exc.args[1]}") from None


@dataclass(frozen=True)
class FreeFixedSplit:
    p_tt: int
    e_tt: int
    p_ef: int
    e_ef: int
    lst_ef: int


def derived_bounds(inst: Instance, i: int, D) -> tuple[int, int, int, int]:
    """Return ``(est, lst, ect, lct)`` of activity ``i`` under bounds ``D``."""
    p = inst.activities[i].duration
    est, lst = D.lb[i], D.ub[i]
    return est, lst, est + p, lst + p


def free_fixed_split(inst: Instance, i: int, D) -> FreeFixedSplit:
    act = inst.activities[i]
    est, lst, ect, lct = derived_bounds(inst, i, D)
    p_tt = max(0, ect - lst)
    p_ef = act.duration - p_tt
    e_tt = act.usage * p_tt
    return FreeFixedSplit(p_tt, e_tt, p_ef, act.energy - e_tt, lct - p_ef)


def window_length(inst: Instance, i: int, begin: int, end: int, D) -> int:
    """Length of activity ``i`` that must execute inside ``[begin, end)``.

    Three cases: the whole duration for free-part activities contained in the
    window; the part after ``lst_i`` for activities starting no earlier than
    ``begin``; the compulsory overlap otherwise. The middle case is capped at
    ``p_i`` so that fully fixed activities inside the window are not
    over-counted.
    """
    p = inst.activities[i].duration
    est, lst, ect, lct = derived_bounds(inst, i, D)
    if begin <= est:
        if ect - lst < p and lct <= end:  # p_ef > 0 and contained
            return p
        return min(p, max(0, end - lst))
    return max(0, min(end, ect) - max(begin, lst))


def window_energy(inst: Instance, i: int, begin: int, end: int, D) -> int:
    return inst.activities[i].usage * window_length(inst, i, begin, end, D)
