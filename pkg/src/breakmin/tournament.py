"""Mirrored double round-robin timetables and their meeting sets.

Teams and slots are 1-indexed in every public signature, matching the usual
tabular presentation.  Arrays keep the natural 0-based layout internally, so
``tau[t - 1, s - 1]`` is the opponent of team ``t`` in slot ``s``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Timetable",
    "Quad",
    "Polarity",
    "MeetingSet",
    "TimetableError",
    "TimetableViolation",
    "generate_srrt",
    "validate_srrt",
    "build_mdrrt",
    "validate_timetable",
    "extract_meetings",
    "read_timetable",
    "write_timetable",
    "timetable_to_json",
    "timetable_from_json",
    "table_one",
]


class TimetableError(ValueError):
    """Raised when a timetable (or half timetable) violates an invariant."""


class TimetableViolation(NamedTuple):
    kind: str
    team: int
    slot: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at team {self.team}, slot {self.slot}: {self.detail}"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Timetable:
    """Opponent matrix of a double round-robin over ``2n`` teams.

    No validity is enforced on construction beyond the shape; use
    :func:`validate_timetable` to list violated invariants.
    """

    n: int
    tau: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        tau = _frozen(self.tau)
        if tau.ndim != 2:
            raise TimetableError(f"tau must be a matrix, got ndim={tau.ndim}")
        object.__setattr__(self, "tau", tau)

    @property
    def num_teams(self) -> int:
        return 2 * self.n

    @property
    def num_slots(self) -> int:
        return 2 * (2 * self.n - 1)

    @property
    def half_length(self) -> int:
        return 2 * self.n - 1

    def opponent(self, team: int, slot: int) -> int:
        return int(self.tau[team - 1, slot - 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Timetable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.tau, other.tau)

    def __hash__(self) -> int:
        return hash((self.n, self.tau.tobytes()))


def generate_srrt(n: int) -> np.ndarray:
    """Single round-robin over ``2n`` teams by the circle method.

    Team ``2n`` is fixed; in round ``r`` it meets team ``r``, and teams
    ``i, j < 2n`` meet in round ``r`` iff ``i + j = 2r (mod 2n - 1)``.

    Returns the ``(2n, 2n - 1)`` opponent matrix with 1-indexed team labels.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    m = 2 * n - 1
    half = np.zeros((2 * n, m), dtype=np.int64)
    for r in range(1, m + 1):
        half[2 * n - 1, r - 1] = r
        half[r - 1, r - 1] = 2 * n
        for i in range(1, m + 1):
            if i == r:
                continue
            j = (2 * r - i) % m or m
            half[i - 1, r - 1] = j
    return half


def _round_violations(tau: np.ndarray, n: int, slot_offset: int = 0) -> list[TimetableViolation]:
    """Range, self-play and involution checks, column by column."""
    out = []
    teams = 2 * n
    for s in range(tau.shape[1]):
        slot = s + 1 + slot_offset
        for t in range(teams):
            opp = int(tau[t, s])
            if not 1 <= opp <= teams:
                out.append(TimetableViolation("range", t + 1, slot, f"opponent {opp} outside 1..{teams}"))
            elif opp == t + 1:
                out.append(TimetableViolation("self", t + 1, slot, "team plays itself"))
            elif tau[opp - 1, s] != t + 1:
                out.append(
                    TimetableViolation(
                        "involution", t + 1, slot,
                        f"tau({t + 1},{slot})={opp} but tau({opp},{slot})={int(tau[opp - 1, s])}",
                    )
                )
    return out


def _permutation_violations(tau: np.ndarray, n: int, first_slot: int) -> list[TimetableViolation]:
    out = []
    teams = 2 * n
    for t in range(teams):
        row = [int(v) for v in tau[t]]
        expected = set(range(1, teams + 1)) - {t + 1}
        if sorted(row) != sorted(expected):
            missing = sorted(expected - set(row))
            out.append(
                TimetableViolation(
                    "permutation", t + 1, first_slot,
                    f"slots {first_slot}..{first_slot + len(row) - 1} do not cover every "
                    f"opponent once (missing {missing})",
                )
            )
    return out


def validate_srrt(half: np.ndarray, n: int) -> list[TimetableViolation]:
    """Violations of a single round-robin half over ``2n`` teams."""
    half = np.asarray(half)
    shape = (2 * n, 2 * n - 1)
    if half.shape != shape:
        return [TimetableViolation("shape", 0, 0, f"expected shape {shape}, got {half.shape}")]
    return _round_violations(half, n) + _permutation_violations(half, n, 1)


def validate_timetable(tt: Timetable) -> list[TimetableViolation]:
    """Every violated MDRRT invariant, with coordinates.  Empty iff valid."""
    n = tt.n
    tau = tt.tau
    if n < 2:
        return [TimetableViolation("shape", 0, 0, f"n must be >= 2, got {n}")]
    shape = (2 * n, 2 * (2 * n - 1))
    if tau.shape != shape:
        return [TimetableViolation("shape", 0, 0, f"expected shape {shape}, got {tau.shape}")]
    m = 2 * n - 1
    out = _round_violations(tau, n)
    out += _permutation_violations(tau[:, :m], n, 1)
    out += _permutation_violations(tau[:, m:], n, m + 1)
    for t in range(2 * n):
        for s in range(m):
            if tau[t, s] != tau[t, s + m]:
                out.append(
                    TimetableViolation(
                        "mirror", t + 1, s + 1,
                        f"tau({t + 1},{s + 1})={int(tau[t, s])} but "
                        f"tau({t + 1},{s + 1 + m})={int(tau[t, s + m])}",
                    )
                )
    return out


def build_mdrrt(half: np.ndarray, shuffle_seed: int | None = None) -> Timetable:
    """Shuffle the slots of a single round-robin half and mirror it.

    The slot permutation is drawn from ``numpy.random.Generator(PCG64(seed))``;
    without a seed the slot order is kept.
    """
    half = np.asarray(half, dtype=np.int64)
    if half.ndim != 2 or half.shape[0] % 2:
        raise TimetableError(f"half timetable must have an even number of rows, got shape {half.shape}")
    n = half.shape[0] // 2
    problems = validate_srrt(half, n)
    if problems:
        raise TimetableError(f"invalid half timetable: {problems[0]}")
    if shuffle_seed is not None:
        rng = np.random.Generator(np.random.PCG64(shuffle_seed))
        half = half[:, rng.permutation(half.shape[1])]
    return Timetable(n, np.hstack([half, half]))


class Quad(NamedTuple):
    t1: int
    t2: int
    s1: int
    s2: int


class Polarity(enum.IntEnum):
    POSITIVE = 1  # y = z
    NEGATIVE = -1  # y = 1 - z


@dataclass(frozen=True)
class MeetingSet:
    """Meeting quadruples plus the map from cells to (variable, polarity).

    ``var_of[t - 1, s - 1]`` is the 0-based index of the quad containing cell
    ``(t, s)``; ``sign[t - 1, s - 1]`` is +1 where home = z and -1 where
    home = 1 - z.
    """

    n: int
    quads: tuple[Quad, ...]
    var_of: np.ndarray = field(repr=False)
    sign: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.quads)

    @property
    def num_teams(self) -> int:
        return 2 * self.n

    @property
    def num_slots(self) -> int:
        return 2 * (2 * self.n - 1)

    def cell(self, team: int, slot: int) -> tuple[int, Polarity]:
        return int(self.var_of[team - 1, slot - 1]), Polarity(int(self.sign[team - 1, slot - 1]))

    def affine(self, team: int, slot: int) -> tuple[int, int, int]:
        """``(var, a, b)`` such that home indicator ``y(team, slot) = a + b * z[var]``."""
        var, pol = self.cell(team, slot)
        return (var, 0, 1) if pol is Polarity.POSITIVE else (var, 1, -1)


def extract_meetings(tt: Timetable) -> MeetingSet:
    """Meeting set of a double round-robin, quads in lexicographic order."""
    n = tt.n
    teams, slots = tt.tau.shape
    quads = []
    for t1 in range(1, teams + 1):
        row = tt.tau[t1 - 1]
        for t2 in range(t1 + 1, teams + 1):
            hits = np.flatnonzero(row == t2)
            if hits.size != 2:
                raise TimetableError(f"teams {t1} and {t2} meet {hits.size} times, expected 2")
            quads.append(Quad(t1, t2, int(hits[0]) + 1, int(hits[1]) + 1))
    quads.sort()
    var_of = np.full((teams, slots), -1, dtype=np.int64)
    sign = np.zeros((teams, slots), dtype=np.int8)
    for k, (t1, t2, s1, s2) in enumerate(quads):
        for t, s, pol in ((t1, s1, 1), (t2, s2, 1), (t2, s1, -1), (t1, s2, -1)):
            if var_of[t - 1, s - 1] != -1:
                raise TimetableError(f"cell ({t},{s}) belongs to two meetings")
            var_of[t - 1, s - 1] = k
            sign[t - 1, s - 1] = pol
    if (var_of < 0).any():
        t, s = np.argwhere(var_of < 0)[0] + 1
        raise TimetableError(f"cell ({t},{s}) belongs to no meeting")
    var_of.flags.writeable = False
    sign.flags.writeable = False
    return MeetingSet(n, tuple(quads), var_of, sign)


def timetable_to_json(tt: Timetable) -> str:
    rows = ",\n".join("    [" + ", ".join(str(int(v)) for v in row) + "]" for row in tt.tau)
    return f'{{\n  "n": {tt.n},\n  "tau": [\n{rows}\n  ]\n}}\n'


def timetable_from_json(text: str) -> Timetable:
    data = json.loads(text)
    try:
        n = data["n"]
        tau = data["tau"]
    except (KeyError, TypeError) as exc:
        raise TimetableError(f"timetable JSON needs 'n' and 'tau': {exc}") from None
    if not isinstance(n, int) or not all(isinstance(v, int) for row in tau for v in row):
        raise TimetableError("timetable JSON must contain integers only")
    return Timetable(n, np.array(tau, dtype=np.int64))


def write_timetable(tt: Timetable, path: str | Path) -> None:
    Path(path).write_text(timetable_to_json(tt), newline="\n")


def read_timetable(path: str | Path) -> Timetable:
    return timetable_from_json(Path(path).read_text())


def table_one() -> Timetable:
    """The 4-team mirrored timetable used throughout the docs and tests."""
    half: Sequence[Sequence[int]] = [[2, 3, 4], [1, 4, 3], [4, 1, 2], [3, 2, 1]]
    return build_mdrrt(np.array(half))
