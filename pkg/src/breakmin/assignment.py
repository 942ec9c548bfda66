"""Home-away assignments: break counting, consistency and CC(u) checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from .tournament import MeetingSet

__all__ = [
    "HAAssignment",
    "CCViolation",
    "FeasibilityReport",
    "count_breaks",
    "check_consistency",
    "check_cc",
    "feasibility_report",
    "assignment_to_json",
    "assignment_from_json",
    "read_assignment",
    "write_assignment",
]


@dataclass(frozen=True)
class HAAssignment:
    """0/1 matrix over teams x slots, 1 meaning the team is at home."""

    y: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        y = np.array(self.y, copy=True)
        if y.ndim != 2:
            raise ValueError(f"assignment must be a matrix, got ndim={y.ndim}")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("assignment entries must be 0 or 1")
        y = y.astype(np.uint8)
        y.flags.writeable = False
        object.__setattr__(self, "y", y)

    @property
    def num_teams(self) -> int:
        return self.y.shape[0]

    @property
    def num_slots(self) -> int:
        return self.y.shape[1]

    def home(self, team: int, slot: int) -> int:
        return int(self.y[team - 1, slot - 1])

    def complement(self) -> "HAAssignment":
        return HAAssignment(1 - self.y)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HAAssignment):
            return NotImplemented
        return np.array_equal(self.y, other.y)

    def __hash__(self) -> int:
        return hash((self.y.shape, self.y.tobytes()))


AssignmentLike = Union[HAAssignment, np.ndarray]


def _matrix(Y: AssignmentLike) -> np.ndarray:
    return Y.y if isinstance(Y, HAAssignment) else HAAssignment(Y).y


class CCViolation(NamedTuple):
    """A maximal home stand or road trip longer than the allowed length."""

    team: int
    start: int
    length: int
    home: bool


@dataclass(frozen=True)
class FeasibilityReport:
    consistent: bool
    breaks: int
    cc_violations: dict[int, list[CCViolation]]

    @property
    def feasible(self) -> bool:
        return self.consistent and not any(self.cc_violations.values())


def count_breaks(Y: AssignmentLike) -> int:
    """Number of (team, slot) pairs with the same venue as the previous slot."""
    y = _matrix(Y)
    return int(np.count_nonzero(y[:, 1:] == y[:, :-1]))


def check_consistency(Y: AssignmentLike, meetings: MeetingSet) -> bool:
    """True iff every meeting has one home and one away leg with opposite roles."""
    y = _matrix(Y).astype(np.int64)
    if y.shape != (meetings.num_teams, meetings.num_slots):
        raise ValueError(f"assignment shape {y.shape} does not match the meeting set")
    q = np.asarray(meetings.quads, dtype=np.int64) - 1
    t1, t2, s1, s2 = q.T
    a, b, c, d = y[t1, s1], y[t1, s2], y[t2, s1], y[t2, s2]
    return bool(np.all((a + c == 1) & (a + b == 1) & (a == d)))


def _runs(row: np.ndarray):
    """(start, length, value) of every maximal constant run, 1-indexed starts."""
    edges = np.flatnonzero(np.diff(row) != 0) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [row.size]))
    return zip(starts + 1, ends - starts, row[starts])


def check_cc(Y: AssignmentLike, u: int) -> list[CCViolation]:
    """Maximal runs longer than ``u`` over the full slot range.

    Only ``u`` in {2, 3} is accepted.
    """
    if u not in (2, 3):
        raise ValueError(f"u must be 2 or 3, got {u!r}")
    y = _matrix(Y)
    out = []
    for t, row in enumerate(y, start=1):
        for start, length, value in _runs(row):
            if length > u:
                out.append(CCViolation(t, int(start), int(length), bool(value)))
    return out


def feasibility_report(
    Y: AssignmentLike, meetings: MeetingSet, cc: tuple[int, ...] = ()
) -> FeasibilityReport:
    return FeasibilityReport(
        consistent=check_consistency(Y, meetings),
        breaks=count_breaks(Y),
        cc_violations={u: check_cc(Y, u) for u in cc},
    )


def assignment_to_json(Y: AssignmentLike) -> str:
    rows = ",\n".join("    [" + ", ".join(str(int(v)) for v in row) + "]" for row in _matrix(Y))
    return f'{{\n  "y": [\n{rows}\n  ]\n}}\n'


def assignment_from_json(text: str) -> HAAssignment:
    data = json.loads(text)
    if not isinstance(data, dict) or "y" not in data:
        raise ValueError("assignment JSON needs a 'y' matrix")
    return HAAssignment(np.array(data["y"]))


def write_assignment(Y: AssignmentLike, path: str | Path) -> None:
    Path(path).write_text(assignment_to_json(Y), newline="\n")


def read_assignment(path: str | Path) -> HAAssignment:
    return assignment_from_json(Path(path).read_text())
