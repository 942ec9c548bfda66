"""Integer QUBO models for break minimization.

Each meeting ``(t1, t2, s1, s2)`` gets one binary variable ``z``: team ``t1``
is at home in ``s1`` and away in ``s2`` when ``z = 1``, and the opposite when
``z = 0``.  Every home indicator is then an affine form ``a + b*z`` with
``a in {0, 1}`` and ``b = +-1``, and the break count, as well as the CC(2) and
CC(3) penalty polynomials, expand to integer quadratic forms.

Variable order: meeting variables first, in lexicographic quad order, then
CC(3) slack variables in (team, slot) order.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Union

import numpy as np

from . import kernels
from .assignment import CCViolation, HAAssignment, check_cc, count_breaks
from .tournament import MeetingSet, Quad

__all__ = [
    "CCMode",
    "MatchVar",
    "SlackVar",
    "QuboModel",
    "Decoded",
    "QuboFormatError",
    "DEFAULT_PENALTY",
    "build_break_qubo",
    "add_cc2_penalty",
    "add_cc3_penalty",
    "build_model",
    "decode",
    "assignment_from_bits",
    "qubo_to_text",
    "qubo_from_text",
    "meta_to_json",
    "meta_from_json",
    "model_to_json",
    "model_from_json",
    "write_qubo",
    "read_qubo",
]

DEFAULT_PENALTY = 10


class QuboFormatError(ValueError):
    pass


class CCMode(str, enum.Enum):
    NONE = "none"
    CC2 = "2"
    CC3 = "3"
    CC23 = "2+3"

    @property
    def has_cc2(self) -> bool:
        return self in (CCMode.CC2, CCMode.CC23)

    @property
    def has_cc3(self) -> bool:
        return self in (CCMode.CC3, CCMode.CC23)

    @property
    def bounds(self) -> tuple[int, ...]:
        return tuple(u for u, on in ((2, self.has_cc2), (3, self.has_cc3)) if on)

    @classmethod
    def from_flags(cls, cc2: bool, cc3: bool) -> "CCMode":
        return {(False, False): cls.NONE, (True, False): cls.CC2,
                (False, True): cls.CC3, (True, True): cls.CC23}[(cc2, cc3)]


class MatchVar(NamedTuple):
    quad: Quad


class SlackVar(NamedTuple):
    team: int
    slot: int


VarMeta = Union[MatchVar, SlackVar]


@dataclass(frozen=True)
class QuboModel:
    """``offset + sum_i terms[i, i] z_i + sum_{i<j} terms[i, j] z_i z_j``.

    ``terms`` is keyed by ``(i, j)`` with ``i <= j``, 0-based, and holds only
    nonzero integer coefficients.  ``var_meta`` is either empty (an unlabeled
    model, e.g. read without a sidecar) or has one entry per variable.
    """

    num_vars: int
    terms: Mapping[tuple[int, int], int] = field(repr=False)
    offset: int = 0
    var_meta: tuple[VarMeta, ...] = field(default=(), repr=False)
    penalty: int = 0
    cc_mode: CCMode = CCMode.NONE

    def __post_init__(self) -> None:
        clean = {}
        for (i, j), c in self.terms.items():
            i, j, c = int(i), int(j), int(c)
            if i > j:
                i, j = j, i
            if not 0 <= i <= j < self.num_vars:
                raise ValueError(f"term ({i}, {j}) outside 0..{self.num_vars - 1}")
            if c:
                clean[i, j] = clean.get((i, j), 0) + c
        object.__setattr__(self, "terms", {k: clean[k] for k in sorted(clean) if clean[k]})
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "cc_mode", CCMode(self.cc_mode))
        if self.var_meta and len(self.var_meta) != self.num_vars:
            raise ValueError(f"var_meta has {len(self.var_meta)} entries for {self.num_vars} variables")

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @property
    def num_match_vars(self) -> int:
        return sum(isinstance(m, MatchVar) for m in self.var_meta)

    @cached_property
    def linear(self) -> np.ndarray:
        lin = np.zeros(self.num_vars, dtype=np.int64)
        for (i, j), c in self.terms.items():
            if i == j:
                lin[i] = c
        return lin

    @cached_property
    def pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Off-diagonal terms as arrays ``(i, j, coefficient)`` with ``i < j``."""
        items = [(i, j, c) for (i, j), c in self.terms.items() if i != j]
        arr = np.array(items, dtype=np.int64).reshape(-1, 3)
        return arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy()

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR ``(indptr, indices, weights)`` of the quadratic terms."""
        pi, pj, pw = self.pairs
        rows = np.concatenate([pi, pj])
        cols = np.concatenate([pj, pi])
        vals = np.concatenate([pw, pw])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(self.num_vars + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols.astype(np.int64), vals.astype(np.int64)

    def objective(self, z: Iterable[int]) -> int:
        z = _bits(z, self.num_vars)
        total = self.offset
        for (i, j), c in self.terms.items():
            if z[i] and z[j]:
                total += c
        return int(total)

    def objective_many(self, Z: np.ndarray) -> np.ndarray:
        """Objective of every row of a 0/1 matrix, as int64."""
        Z = np.ascontiguousarray(Z, dtype=np.uint8)
        if Z.ndim != 2 or Z.shape[1] != self.num_vars:
            raise ValueError(f"expected shape (k, {self.num_vars}), got {Z.shape}")
        pi, pj, pw = self.pairs
        return kernels.batch_objective(Z, self.offset, self.linear, pi, pj, pw)

    def with_terms(self, poly: "_Poly", **changes) -> "QuboModel":
        args = dict(num_vars=self.num_vars, terms=self.terms, offset=self.offset,
                    var_meta=self.var_meta, penalty=self.penalty, cc_mode=self.cc_mode)
        args.update(changes)
        terms = dict(args["terms"])
        for k, c in poly.terms.items():
            terms[k] = terms.get(k, 0) + c
        args["terms"] = terms
        args["offset"] = args["offset"] + poly.const
        return QuboModel(**args)


def _bits(z: Iterable[int], size: int) -> np.ndarray:
    z = np.asarray(list(z) if not isinstance(z, np.ndarray) else z)
    if z.shape != (size,):
        raise ValueError(f"bit vector must have length {size}, got shape {z.shape}")
    if not np.isin(z, (0, 1)).all():
        raise ValueError("bit vector entries must be 0 or 1")
    return z.astype(np.uint8)


class _Poly:
    """Accumulator for an integer quadratic pseudo-boolean polynomial."""

    def __init__(self) -> None:
        self.const = 0
        self.terms: dict[tuple[int, int], int] = {}

    def add(self, i: int, j: int, c: int) -> None:
        if i > j:
            i, j = j, i
        self.terms[i, j] = self.terms.get((i, j), 0) + c

    def add_affine_square_form(self, const: int, coefs: dict[int, int], a: int, b: int, scale: int) -> None:
        """Add ``scale * (S - a) * (S - b)`` where ``S = const + sum coefs[v] z_v``.

        Uses ``z_v^2 = z_v``.
        """
        c0 = const - a
        c1 = const - b
        # (c0 + L)(c1 + L) = c0*c1 + (c0 + c1) L + L^2
        self.const += scale * c0 * c1
        items = sorted(coefs.items())
        for v, cv in items:
            self.add(v, v, scale * ((c0 + c1) * cv + cv * cv))
        for x in range(len(items)):
            v, cv = items[x]
            for w, cw in items[x + 1:]:
                self.add(v, w, scale * 2 * cv * cw)

    def add_product(self, f: tuple[int, int, int], g: tuple[int, int, int], scale: int) -> None:
        """Add ``scale * (a + b z_i)(a' + b' z_j)`` for ``f = (i, a, b)``, ``g = (j, a', b')``."""
        i, a, b = f
        j, a2, b2 = g
        self.const += scale * a * a2
        self.add(j, j, scale * a * b2)
        self.add(i, i, scale * a2 * b)
        self.add(i, j, scale * b * b2)


def build_break_qubo(meetings: MeetingSet) -> QuboModel:
    """Unconstrained model whose objective is the number of breaks of ``decode(z)``."""
    poly = _Poly()
    teams, slots = meetings.num_teams, meetings.num_slots
    for t in range(1, teams + 1):
        for s in range(1, slots):
            f = meetings.affine(t, s)
            g = meetings.affine(t, s + 1)
            if f[0] == g[0]:
                raise ValueError(f"cells ({t},{s}) and ({t},{s + 1}) share a variable")
            # break = y y' + (1 - y)(1 - y') = 1 - y - y' + 2 y y'
            poly.const += 1 - f[1] - g[1]
            poly.add(f[0], f[0], -f[2])
            poly.add(g[0], g[0], -g[2])
            poly.add_product(f, g, 2)
    meta = tuple(MatchVar(q) for q in meetings.quads)
    return QuboModel(len(meetings), poly.terms, poly.const, meta)


def _window_form(meetings: MeetingSet, team: int, first: int, length: int) -> tuple[int, dict[int, int]]:
    if first + length - 1 > meetings.num_slots:
        raise ValueError(f"window {first}..{first + length - 1} exceeds the slot range")
    const = 0
    coefs: dict[int, int] = {}
    for s in range(first, first + length):
        var, a, b = meetings.affine(team, s)
        const += a
        coefs[var] = coefs.get(var, 0) + b
    return const, {v: c for v, c in coefs.items() if c}


def _check_penalty(model: QuboModel, penalty: int, tag: str) -> None:
    if int(penalty) != penalty or penalty < 1:
        raise ValueError(f"penalty must be a positive integer, got {penalty!r}")
    if model.penalty and model.penalty != penalty:
        raise ValueError(f"model already uses penalty {model.penalty}, cannot add {tag} with {penalty}")


def add_cc2_penalty(model: QuboModel, meetings: MeetingSet, penalty: int = DEFAULT_PENALTY) -> QuboModel:
    """Add ``P * (S - 1)(S - 2)`` for every 3-slot window starting in the first half."""
    _check_penalty(model, penalty, "CC(2)")
    if model.cc_mode.has_cc2:
        raise ValueError("model already carries the CC(2) penalty")
    poly = _Poly()
    for t in range(1, meetings.num_teams + 1):
        for s in range(1, 2 * meetings.n):
            const, coefs = _window_form(meetings, t, s, 3)
            poly.add_affine_square_form(const, coefs, 1, 2, penalty)
    mode = CCMode.from_flags(True, model.cc_mode.has_cc3)
    return model.with_terms(poly, penalty=int(penalty), cc_mode=mode)


def add_cc3_penalty(model: QuboModel, meetings: MeetingSet, penalty: int = DEFAULT_PENALTY) -> QuboModel:
    """Add a slack ``w`` and ``P * (S + w - 2)(S + w - 3)`` per 4-slot first-half window."""
    _check_penalty(model, penalty, "CC(3)")
    if model.cc_mode.has_cc3:
        raise ValueError("model already carries the CC(3) penalty")
    poly = _Poly()
    slacks = []
    nxt = model.num_vars
    for t in range(1, meetings.num_teams + 1):
        for s in range(1, 2 * meetings.n):
            const, coefs = _window_form(meetings, t, s, 4)
            coefs[nxt] = 1
            poly.add_affine_square_form(const, coefs, 2, 3, penalty)
            slacks.append(SlackVar(t, s))
            nxt += 1
    meta = model.var_meta + tuple(slacks) if model.var_meta else ()
    mode = CCMode.from_flags(model.cc_mode.has_cc2, True)
    return model.with_terms(poly, num_vars=nxt, var_meta=meta, penalty=int(penalty), cc_mode=mode)


def build_model(meetings: MeetingSet, cc_mode: CCMode | str = CCMode.NONE,
                penalty: int = DEFAULT_PENALTY) -> QuboModel:
    cc_mode = CCMode(cc_mode)
    model = build_break_qubo(meetings)
    if cc_mode.has_cc2:
        model = add_cc2_penalty(model, meetings, penalty)
    if cc_mode.has_cc3:
        model = add_cc3_penalty(model, meetings, penalty)
    return model


@dataclass(frozen=True)
class Decoded:
    assignment: HAAssignment
    breaks: int
    penalty_value: int
    cc_report: dict[int, list[CCViolation]]

    @property
    def cc_violations(self) -> list[CCViolation]:
        seen = []
        for u in sorted(self.cc_report):
            seen.extend(v for v in self.cc_report[u] if v not in seen)
        return seen


def assignment_from_bits(model: QuboModel, z: Iterable[int]) -> HAAssignment:
    """Home-away matrix of the meeting bits; slack bits are ignored."""
    z = _bits(z, model.num_vars)
    quads = [(k, m.quad) for k, m in enumerate(model.var_meta) if isinstance(m, MatchVar)]
    if not quads:
        raise ValueError("model has no meeting variables to decode")
    teams = max(q.t2 for _, q in quads)
    n = teams // 2
    y = np.full((teams, 2 * (2 * n - 1)), 255, dtype=np.uint8)
    for k, (t1, t2, s1, s2) in quads:
        bit = z[k]
        y[t1 - 1, s1 - 1] = bit
        y[t2 - 1, s2 - 1] = bit
        y[t2 - 1, s1 - 1] = 1 - bit
        y[t1 - 1, s2 - 1] = 1 - bit
    if (y == 255).any():
        raise ValueError("meeting variables do not cover every cell")
    return HAAssignment(y)


def decode(model: QuboModel, z: Iterable[int]) -> Decoded:
    z = _bits(z, model.num_vars)
    Y = assignment_from_bits(model, z)
    breaks = count_breaks(Y)
    return Decoded(
        assignment=Y,
        breaks=breaks,
        penalty_value=model.objective(z) - breaks,
        cc_report={u: check_cc(Y, u) for u in model.cc_mode.bounds},
    )


# -- serialization ---------------------------------------------------------------

def qubo_to_text(model: QuboModel) -> str:
    lines = [f"p qubo {model.num_vars} {model.num_terms} {model.offset}"]
    lines += [f"{i + 1} {j + 1} {c}" for (i, j), c in model.terms.items()]
    return "\n".join(lines) + "\n"


def _meta_entry(m: VarMeta) -> dict:
    if isinstance(m, MatchVar):
        return {"kind": "match", "quad": list(m.quad)}
    return {"kind": "slack", "team": m.team, "slot": m.slot}


def meta_to_json(model: QuboModel) -> str:
    data = {
        "num_vars": model.num_vars,
        "penalty": model.penalty,
        "cc_mode": model.cc_mode.value,
        "vars": [_meta_entry(m) for m in model.var_meta],
    }
    return json.dumps(data, indent=1) + "\n"


def _parse_meta(entries: list) -> tuple[VarMeta, ...]:
    out = []
    for e in entries:
        if e.get("kind") == "match":
            out.append(MatchVar(Quad(*map(int, e["quad"]))))
        elif e.get("kind") == "slack":
            out.append(SlackVar(int(e["team"]), int(e["slot"])))
        else:
            raise QuboFormatError(f"unknown variable kind in {e!r}")
    return tuple(out)


def meta_from_json(text: str) -> dict:
    data = json.loads(text)
    return {
        "num_vars": int(data["num_vars"]),
        "penalty": int(data.get("penalty", 0)),
        "cc_mode": CCMode(data.get("cc_mode", "none")),
        "var_meta": _parse_meta(data.get("vars", [])),
    }


def qubo_from_text(text: str, meta: str | None = None) -> QuboModel:
    header = None
    terms: dict[tuple[int, int], int] = {}
    count = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "c ")):
            continue
        parts = line.split()
        if header is None:
            if parts[:2] != ["p", "qubo"] or len(parts) != 5:
                raise QuboFormatError(f"line {lineno}: expected 'p qubo <vars> <terms> <offset>'")
            try:
                header = tuple(int(p) for p in parts[2:])
            except ValueError:
                raise QuboFormatError(f"line {lineno}: non-integer header field") from None
            continue
        try:
            i, j, c = (int(p) for p in parts)
        except ValueError:
            raise QuboFormatError(f"line {lineno}: expected 'i j c' integers, got {line!r}") from None
        if i > j:
            raise QuboFormatError(f"line {lineno}: term must satisfy i <= j")
        if (i - 1, j - 1) in terms:
            raise QuboFormatError(f"line {lineno}: duplicate term ({i}, {j})")
        terms[i - 1, j - 1] = c
        count += 1
    if header is None:
        raise QuboFormatError("missing 'p qubo' header")
    num_vars, num_terms, offset = header
    if count != num_terms:
        raise QuboFormatError(f"header announces {num_terms} terms, found {count}")
    extra = {}
    if meta is not None:
        info = meta_from_json(meta)
        if info["num_vars"] != num_vars:
            raise QuboFormatError("sidecar variable count does not match the model")
        extra = {k: info[k] for k in ("penalty", "cc_mode", "var_meta")}
    try:
        return QuboModel(num_vars, terms, offset, **extra)
    except ValueError as exc:
        raise QuboFormatError(str(exc)) from None


def model_to_json(model: QuboModel) -> str:
    """Single-document model: 1-indexed ``[i, j, c]`` terms plus variable metadata."""
    data = json.loads(meta_to_json(model))
    data["offset"] = model.offset
    data["terms"] = [[i + 1, j + 1, c] for (i, j), c in model.terms.items()]
    return json.dumps(data, indent=1) + "\n"


def model_from_json(text: str) -> QuboModel:
    data = json.loads(text)
    info = meta_from_json(text)
    terms = {(int(i) - 1, int(j) - 1): int(c) for i, j, c in data["terms"]}
    return QuboModel(info["num_vars"], terms, int(data["offset"]), info["var_meta"],
                     info["penalty"], info["cc_mode"])


def meta_path_for(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_qubo(model: QuboModel, path: str | Path) -> Path:
    """Write ``path`` in the text format and ``<path>.meta.json`` beside it."""
    path = Path(path)
    path.write_text(qubo_to_text(model), newline="\n")
    meta = meta_path_for(path)
    meta.write_text(meta_to_json(model), newline="\n")
    return meta


def read_qubo(path: str | Path) -> QuboModel:
    path = Path(path)
    meta = meta_path_for(path)
    return qubo_from_text(path.read_text(), meta.read_text() if meta.exists() else None)
