"""QUBO to weighted MaxCut via an anchor node.

With the anchor on the 0-side, ``cut(i, anchor) = z_i`` and
``z_i z_j = (z_i + z_j - cut(i, j)) / 2``, which gives

    scale * objective(z) = constant - cut_weight(partition(z))

with edge weights ``w(i, j) = scale * q_ij / 2`` and
``w(i, anchor) = -scale * (l_i + sum_j q_ij / 2)``.  ``scale`` is 1 when every
quadratic coefficient is even (true for the break and CC penalty models) and
2 otherwise, so the identity stays in integers.  Maximizing the cut minimizes
the objective.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qubo import QuboModel

__all__ = [
    "MaxCutInstance",
    "MaxCutFormatError",
    "qubo_to_maxcut",
    "partition_of",
    "cut_weight",
    "cut_to_bits",
    "maxcut_to_text",
    "maxcut_from_text",
    "write_maxcut",
    "read_maxcut",
]


class MaxCutFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MaxCutInstance:
    """Weighted graph with 0-based nodes; ``anchor`` is the last node."""

    num_nodes: int
    edges: tuple[tuple[int, int, int], ...]
    constant: int
    scale: int = 1

    @property
    def anchor(self) -> int:
        return self.num_nodes - 1

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 3)
        rows = np.concatenate([arr[:, 0], arr[:, 1]])
        cols = np.concatenate([arr[:, 1], arr[:, 0]])
        vals = np.concatenate([arr[:, 2], arr[:, 2]])
        order = np.lexsort((cols, rows))
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols[order].copy(), vals[order].copy()


def qubo_to_maxcut(model: QuboModel) -> MaxCutInstance:
    n = model.num_vars
    quad = {k: c for k, c in model.terms.items() if k[0] != k[1]}
    scale = 1 if all(c % 2 == 0 for c in quad.values()) else 2
    half_q = np.zeros(n, dtype=np.int64)  # scale * sum_j q_ij / 2
    edges = []
    for (i, j), c in quad.items():
        w = scale * c // 2
        half_q[i] += w
        half_q[j] += w
        edges.append((i, j, w))
    lin = model.linear
    for i in range(n):
        w = -(scale * int(lin[i]) + int(half_q[i]))
        if w:
            edges.append((i, n, w))
    edges.sort()
    return MaxCutInstance(n + 1, tuple(edges), scale * model.offset, scale)


def partition_of(z: Iterable[int]) -> np.ndarray:
    """Side labels for ``(z_0, ..., z_{n-1}, anchor)``; the anchor sits on side 0."""
    z = np.asarray(list(z) if not isinstance(z, np.ndarray) else z, dtype=np.uint8)
    return np.append(z, np.uint8(0))


def cut_weight(inst: MaxCutInstance, partition: Sequence[int]) -> int:
    side = np.asarray(partition)
    if side.shape != (inst.num_nodes,):
        raise ValueError(f"partition must label {inst.num_nodes} nodes")
    return int(sum(w for u, v, w in inst.edges if side[u] != side[v]))


def cut_to_bits(inst: MaxCutInstance, partition: Sequence[int]) -> np.ndarray:
    """Bit vector of a partition, read relative to the anchor's side."""
    side = np.asarray(partition)
    if side.shape != (inst.num_nodes,):
        raise ValueError(f"partition must label all {inst.num_nodes} nodes, including the anchor")
    return (side[:-1] != side[inst.anchor]).astype(np.uint8)


def maxcut_to_text(inst: MaxCutInstance) -> str:
    lines = [
        "# maxcut from qubo",
        f"# constant {inst.constant}",
        f"# scale {inst.scale}",
        f"# anchor {inst.anchor + 1}",
        "# sense: scale * qubo_objective = constant - cut_weight; maximize cut",
        f"{inst.num_nodes} {inst.num_edges}",
    ]
    lines += [f"{u + 1} {v + 1} {w}" for u, v, w in inst.edges]
    return "\n".join(lines) + "\n"


def maxcut_from_text(text: str) -> MaxCutInstance:
    constant, scale = 0, 1
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] in ("constant", "scale"):
                value = int(parts[1])
                if parts[0] == "constant":
                    constant = value
                else:
                    scale = value
            continue
        try:
            fields = [int(p) for p in line.split()]
        except ValueError:
            raise MaxCutFormatError(f"line {lineno}: non-integer field in {line!r}") from None
        if header is None:
            if len(fields) != 2:
                raise MaxCutFormatError(f"line {lineno}: expected '<num_nodes> <num_edges>'")
            header = fields
            continue
        if len(fields) != 3:
            raise MaxCutFormatError(f"line {lineno}: expected 'u v w'")
        u, v, w = fields
        if not (1 <= u <= header[0] and 1 <= v <= header[0]) or u == v:
            raise MaxCutFormatError(f"line {lineno}: bad edge ({u}, {v})")
        edges.append((u - 1, v - 1, w))
    if header is None:
        raise MaxCutFormatError("missing '<num_nodes> <num_edges>' line")
    if len(edges) != header[1]:
        raise MaxCutFormatError(f"header announces {header[1]} edges, found {len(edges)}")
    return MaxCutInstance(header[0], tuple(edges), constant, scale)


def write_maxcut(inst: MaxCutInstance, path: str | Path) -> None:
    Path(path).write_text(maxcut_to_text(inst), newline="\n")


def read_maxcut(path: str | Path) -> MaxCutInstance:
    return maxcut_from_text(Path(path).read_text())
