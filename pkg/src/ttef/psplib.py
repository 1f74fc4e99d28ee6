"""Reader and writer for single-mode PSPLib ``.sm`` files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import Project, check_precedences


class PsplibError(ValueError):
    """Malformed ``.sm`` input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RawPsplibInstance:
    """File contents with job ids kept 1-based as in the file.

    ``requests[j][k]`` is the demand of job ``j + 1`` on resource ``k``;
    ``successors[j]`` lists the 1-based successor ids of job ``j + 1``.
    """

    durations: tuple[int, ...]
    requests: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    successors: tuple[tuple[int, ...], ...]
    horizon: Optional[int] = None
    name: str = ""

    @property
    def jobs(self) -> int:
        return len(self.durations)

    @property
    def resources(self) -> int:
        return len(self.capacities)


_SECTIONS = ("PRECEDENCE RELATIONS:", "REQUESTS/DURATIONS:", "RESOURCEAVAILABILITIES:")
_HEADER_INT = re.compile(r"^\s*(jobs \(incl\. supersource/sink \)|horizon)\s*:\s*(\S+)")
_RESOURCE_KIND = re.compile(r"^\s*-\s*(renewable|nonrenewable|doubly constrained)\s*:\s*(\S+)")


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        bad = next(t for t in tokens if not t.lstrip("-").isdigit())
        raise PsplibError(f"non-integer field {bad!r}", lineno) from None


def _is_rule(line: str) -> bool:
    s = line.strip()
    return bool(s) and set(s) <= {"*"} or bool(s) and set(s) <= {"-"}


def parse_sm(text: str, name: str = "") -> RawPsplibInstance:
    """Parse the text of a single-mode ``.sm`` file."""
    header: dict[str, tuple[int, int]] = {}
    kinds: dict[str, tuple[int, int]] = {}
    rows: dict[str, list[tuple[int, list[int]]]] = {s: [] for s in _SECTIONS}
    section = None
    skip_header = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped in _SECTIONS:
            section, skip_header = stripped, True
            continue
        if stripped.startswith("*"):
            section = None
            continue
        if section is None:
            m = _HEADER_INT.match(line)
            if m:
                header[m.group(1).split()[0]] = (_ints([m.group(2)], lineno)[0], lineno)
                continue
            m = _RESOURCE_KIND.match(line)
            if m:
                kinds[m.group(1)] = (_ints([m.group(2)], lineno)[0], lineno)
            continue
        if _is_rule(line):
            continue
        if skip_header and not stripped[0].isdigit() and not stripped[0] == "-":
            skip_header = False
            continue
        skip_header = False
        rows[section].append((lineno, _ints(stripped.split(), lineno)))

    for s in _SECTIONS:
        if not rows[s]:
            raise PsplibError(f"missing section {s[:-1]}")
    for kind in ("nonrenewable", "doubly constrained"):
        count, lineno = kinds.get(kind, (0, None))
        if count:
            raise PsplibError(f"{kind} resources are not supported", lineno)

    (cap_line, caps), *extra = rows["RESOURCEAVAILABILITIES:"]
    if extra:
        raise PsplibError("unexpected row after resource availabilities", extra[0][0])
    K = len(caps)
    if "renewable" in kinds and kinds["renewable"][0] != K:
        raise PsplibError(f"header declares {kinds['renewable'][0]} resources, found {K}", cap_line)

    prec = rows["PRECEDENCE RELATIONS:"]
    N = len(prec)
    if "jobs" in header and header["jobs"][0] != N:
        raise PsplibError(f"header declares {header['jobs'][0]} jobs, found {N}", header["jobs"][1])
    successors = []
    for expect, (lineno, vals) in enumerate(prec, start=1):
        if len(vals) < 3:
            raise PsplibError("precedence row needs job, modes and successor count", lineno)
        job, modes, count, succ = vals[0], vals[1], vals[2], vals[3:]
        if job != expect:
            raise PsplibError(f"expected job {expect}, found {job}", lineno)
        if modes != 1:
            raise PsplibError(f"job {job} has {modes} modes; only single-mode files are supported", lineno)
        if len(succ) != count:
            raise PsplibError(f"job {job} declares {count} successors, lists {len(succ)}", lineno)
        for s in succ:
            if not 1 <= s <= N:
                raise PsplibError(f"successor {s} out of range 1..{N}", lineno)
        successors.append(tuple(succ))

    req_rows = rows["REQUESTS/DURATIONS:"]
    if len(req_rows) != N:
        line = req_rows[min(len(req_rows), N) - 1][0] if req_rows else None
        raise PsplibError(f"expected {N} request rows, found {len(req_rows)}", line)
    durations, requests = [], []
    for expect, (lineno, vals) in enumerate(req_rows, start=1):
        if len(vals) != 3 + K:
            raise PsplibError(f"request row needs {3 + K} fields, found {len(vals)}", lineno)
        job, mode, dur, req = vals[0], vals[1], vals[2], vals[3:]
        if job != expect:
            raise PsplibError(f"expected job {expect}, found {job}", lineno)
        if mode != 1:
            raise PsplibError(f"job {job} uses mode {mode}; only single-mode files are supported", lineno)
        if dur < 0 or any(r < 0 for r in req):
            raise PsplibError(f"job {job} has a negative duration or request", lineno)
        durations.append(dur)
        requests.append(tuple(req))
    for j in (0, N - 1):
        if durations[j] != 0 or any(requests[j]):
            raise PsplibError(f"job {j + 1} must be a dummy with zero duration and requests", req_rows[j][0])
    try:
        check_precedences(N, [(j, s - 1) for j, succ in enumerate(successors) for s in succ])
    except ValueError as exc:
        raise PsplibError(str(exc)) from None
    horizon = header.get("horizon", (None, None))[0]
    return RawPsplibInstance(tuple(durations), tuple(requests), tuple(caps), tuple(successors), horizon, name)


def read_sm(path) -> RawPsplibInstance:
    path = Path(path)
    return parse_sm(path.read_text(), name=path.stem)


def render(raw: RawPsplibInstance) -> str:
    """Serialize in the PSPLib layout (the inverse of :func:`parse_sm`)."""
    rule = "*" * 72
    N, K = raw.jobs, raw.resources
    horizon = raw.horizon if raw.horizon is not None else sum(raw.durations)
    res = "".join(f"  R{k + 1:2d}" for k in range(K))
    out = [
        rule,
        f"file with basedata            : {raw.name or 'unnamed'}.bas",
        "initial value random generator: 0",
        rule,
        "projects                      :  1",
        f"jobs (incl. supersource/sink ):  {N}",
        f"horizon                       :  {horizon}",
        "RESOURCES",
        f"  - renewable                 :  {K}   R",
        "  - nonrenewable              :  0   N",
        "  - doubly constrained        :  0   D",
        rule,
        "PRECEDENCE RELATIONS:",
        "jobnr.    #modes  #successors   successors",
    ]
    for j, succ in enumerate(raw.successors, start=1):
        out.append(f"{j:4d}{1:9d}{len(succ):11d}" + "".join(f"{s:6d}" for s in succ))
    out += [rule, "REQUESTS/DURATIONS:", f"jobnr. mode duration{res}", "-" * 72]
    for j, (d, req) in enumerate(zip(raw.durations, raw.requests), start=1):
        out.append(f"{j:3d}{1:7d}{d:6d}" + "".join(f"{r:6d}" for r in req))
    out += [rule, "RESOURCEAVAILABILITIES:", res, "".join(f"{c:6d}" for c in raw.capacities), rule]
    return "\n".join(out) + "\n"


def to_instance(raw: RawPsplibInstance, makespan_ub: Optional[int] = None) -> Project:
    """Scheduling model with windows ``[0, H - p]``, ``H = makespan_ub`` or the
    sum of durations. Job ``j`` of the file becomes activity ``j - 1``."""
    H = makespan_ub if makespan_ub is not None else sum(raw.durations)
    precs = tuple((j, s - 1) for j, succ in enumerate(raw.successors) for s in succ)
    demands = tuple(tuple(raw.requests[j][k] for j in range(raw.jobs)) for k in range(raw.resources))
    return Project(
        durations=raw.durations,
        demands=demands,
        capacities=raw.capacities,
        precedences=precs,
        est0=(0,) * raw.jobs,
        lst0=tuple(H - p for p in raw.durations),
        horizon=H,
        name=raw.name,
    )


EXAMPLE1_NAMES = ("A", "B", "C", "D", "E")


def example1() -> Project:
    """Five activities A..E on one resource of capacity 4 with B before D,
    C before E and deadline 10; the optimal makespan is 9."""
    durations = (3, 3, 2, 4, 1)
    usages = (2, 2, 3, 2, 1)
    deadline = 10
    return Project(
        durations=durations,
        demands=(usages,),
        capacities=(4,),
        precedences=((1, 3), (2, 4)),
        est0=(0,) * 5,
        lst0=tuple(deadline - p for p in durations),
        horizon=deadline,
        name="example1",
    )
