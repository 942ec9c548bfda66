"""Exhaustive minimization, the reference oracle for the other solvers."""
from __future__ import annotations

import time

import numpy as np

from .. import kernels
from ..qubo import QuboModel
from .result import SolveResult, make_result

MAX_ENUMERATED = 28


def eliminable_suffix(model: QuboModel) -> int:
    """Index ``k`` such that variables ``k..N-1`` share no quadratic term.

    Those variables are minimized in closed form (slack variables of the
    CC(3) penalty are the typical case), so only ``k`` bits are enumerated.
    """
    indptr, indices, _ = model.adjacency
    chosen: set[int] = set()
    k = model.num_vars
    for v in range(model.num_vars - 1, -1, -1):
        if any(int(u) in chosen for u in indices[indptr[v]:indptr[v + 1]]):
            break
        chosen.add(v)
        k = v
    return k


def solve_brute_force(model: QuboModel, max_vars: int = MAX_ENUMERATED) -> SolveResult:
    """Global minimum by enumeration; the lexicographically smallest minimizer wins ties."""
    start = time.perf_counter()
    n = model.num_vars
    if n == 0:
        return make_result(model, "bf", np.zeros(0, np.uint8), model.offset, True, model.offset,
                           {"enumerated": 0, "wall_time": 0.0})
    k = eliminable_suffix(model)
    if k > max_vars:
        raise ValueError(f"brute force would enumerate {k} variables (limit {max_vars})")
    indptr, indices, weights = model.adjacency
    lin = model.linear
    best, code = kernels.brute_force(k, lin, indptr, indices, weights, model.offset)
    z = np.zeros(n, dtype=np.uint8)
    for i in range(k):
        z[i] = (code >> (k - 1 - i)) & 1
    for e in range(k, n):
        nbrs = indices[indptr[e]:indptr[e + 1]]
        field = lin[e] + int(weights[indptr[e]:indptr[e + 1]] @ z[nbrs].astype(np.int64))
        z[e] = 1 if field < 0 else 0
    stats = {"enumerated": k, "states": 1 << k, "wall_time": time.perf_counter() - start}
    return make_result(model, "bf", z, int(best), True, int(best), stats)
