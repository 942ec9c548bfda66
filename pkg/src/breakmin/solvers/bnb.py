"""Exact depth-first branch-and-bound.

The model is moved to its signed-graph (MaxCut) form, where every term is a
nonnegative agree/disagree edge cost plus a constant.  Variables are branched
in a static order, cheaper value first.  Models built from a meeting set are
ordered slot-major (match variables by first-leg slot, slack variables
last), which keeps the frontier between fixed and free variables narrow.
Other models use a greedy order: start from the heaviest variable, then
always take the one most strongly tied to those already ordered.

The node bound is the pairwise-min relaxation: exact cost among fixed
variables plus, per free variable, the cheaper of its two values against the
fixed ones, with free-free edges relaxed to zero.  With ``russian_doll`` on
(the default), the free-free part is instead bounded by the exact optimum of
the suffix subproblem, and those optima are computed first, innermost suffix
up, by the same search.
"""
from __future__ import annotations

import time
from typing import Mapping

import numpy as np

from .. import kernels as K
from ..maxcut import qubo_to_maxcut
from ..qubo import MatchVar, QuboModel
from .anneal import Schedule, solve_annealing
from .result import SolveResult, make_result

_INF = np.iinfo(np.int64).max // 4
WARM_START = Schedule(sweeps=200, restarts=4)


def _graph(model: QuboModel):
    inst = qubo_to_maxcut(model)
    indptr, indices, weights = inst.csr()
    const = inst.constant - sum(w for _, _, w in inst.edges if w > 0)
    return inst, indptr, indices, weights, int(const)


def _edge_cost(w: int, same: bool) -> int:
    if w > 0:
        return w if same else 0
    return 0 if same else -w


def partial_bound(model: QuboModel, fixed: Mapping[int, int]) -> int:
    """Pairwise-min lower bound on the objective over completions of ``fixed``.

    Computed from scratch, independently of the incremental search state;
    rounded up since objectives are integers.
    """
    inst, _, _, _, const = _graph(model)
    side = {**{int(k): int(v) for k, v in fixed.items()}, inst.anchor: 0}
    total = const
    free_costs: dict[int, list[int]] = {}
    for u, v, w in inst.edges:
        if u in side and v in side:
            total += _edge_cost(w, side[u] == side[v])
        elif u in side or v in side:
            f, g = (u, v) if u in side else (v, u)
            costs = free_costs.setdefault(g, [0, 0])
            for val in (0, 1):
                costs[val] += _edge_cost(w, side[f] == val)
    total += sum(min(c) for c in free_costs.values())
    return -((-total) // inst.scale)


def branching_order(model: QuboModel) -> np.ndarray:
    """Static branching order over the model's variables."""
    meta = model.var_meta
    if meta and len(meta) == model.num_vars:
        key = [m.quad.s1 if isinstance(m, MatchVar) else _INF for m in meta]
        return np.argsort(np.array(key, dtype=np.int64), kind="stable")
    return greedy_order(model)


def greedy_order(model: QuboModel) -> np.ndarray:
    """Connectivity-greedy order for models without meeting metadata."""
    n = model.num_vars
    indptr, indices, weights = model.adjacency
    absw = np.abs(weights)
    totw = np.zeros(n, dtype=np.int64)
    np.add.at(totw, np.repeat(np.arange(n), np.diff(indptr)), absw)
    conn = np.zeros(n, dtype=np.int64)
    placed = np.zeros(n, dtype=bool)
    order = []
    for _ in range(n):
        # lexsort: last key is primary; lowest index wins remaining ties
        keys = np.lexsort((np.arange(n), -totw, -conn, placed))
        v = int(keys[0])
        order.append(v)
        placed[v] = True
        nbrs = indices[indptr[v]:indptr[v + 1]]
        conn[nbrs] += absw[indptr[v]:indptr[v + 1]]
    return np.array(order, dtype=np.int64)


class _Search:
    """Arrays shared by the suffix solves and the main solve."""

    def __init__(self, model: QuboModel):
        self.inst, self.indptr, self.indices, self.weights, self.const = _graph(model)
        nn = model.num_vars + 1
        self.x = np.empty(nn, dtype=np.int8)
        self.c0 = np.zeros(nn, dtype=np.int64)
        self.c1 = np.zeros(nn, dtype=np.int64)
        self.stack_first = np.zeros(nn, dtype=np.int64)
        self.stack_tried = np.zeros(nn, dtype=np.int64)
        self.stack_bound = np.zeros(nn, dtype=np.int64)
        self.best_x = np.zeros(nn, dtype=np.int8)
        self.scal = np.zeros(K.BNB_SCAL, dtype=np.int64)
        self.nodes = 0

    def init(self, active: np.ndarray, anchor: bool, const: int, sym: bool, best: int) -> None:
        K.bnb_init(active, self.inst.anchor if anchor else -1, self.x, self.c0, self.c1,
                   self.indptr, self.indices, self.weights, self.scal)
        self.scal[K.BNB_CONST] = const
        self.scal[K.BNB_SYM] = int(sym)
        self.scal[K.BNB_BEST] = best

    def bound(self, rds: np.ndarray) -> int:
        s = self.scal
        return int(s[K.BNB_CONST] + s[K.BNB_FIXED] + s[K.BNB_FREEMIN] + rds[s[K.BNB_DEPTH]])

    def run(self, order: np.ndarray, rds: np.ndarray, deadline: float | None, chunk: int) -> bool:
        """Search until done (True) or past the deadline (False)."""
        while not self.scal[K.BNB_DONE]:
            if deadline is not None and time.perf_counter() >= deadline:
                return False
            K.bnb_run(chunk, order, rds, self.x, self.c0, self.c1, self.indptr, self.indices,
                      self.weights, self.stack_first, self.stack_tried, self.stack_bound,
                      self.best_x, self.scal)
        self.nodes += int(self.scal[K.BNB_NODES])
        return True

    def cost_against(self, v: int, active: np.ndarray, assign: np.ndarray) -> tuple[int, int]:
        """Cost of ``v``'s edges into ``active`` under ``assign``, for v = 0 and v = 1."""
        mask = np.zeros(self.x.shape[0], dtype=bool)
        mask[active] = True
        lo, hi = self.indptr[v], self.indptr[v + 1]
        costs = [0, 0]
        for u, w in zip(self.indices[lo:hi], self.weights[lo:hi]):
            if mask[u]:
                for b in (0, 1):
                    costs[b] += _edge_cost(int(w), int(assign[u]) == b)
        return costs[0], costs[1]


def suffix_bounds(model: QuboModel, order: np.ndarray, search: _Search | None = None,
                  deadline: float | None = None, chunk: int = 200_000) -> tuple[np.ndarray, bool]:
    """Exact optimum of the edges among ``order[d:]`` for every ``d``.

    Returns ``(rds, complete)``.  On timeout the entries not yet solved hold
    the last solved value, which stays a valid (weaker) bound because the
    suffix optima are nondecreasing as the suffix grows.
    """
    search = search or _Search(model)
    n = order.size
    rds = np.zeros(n + 1, dtype=np.int64)
    prev = np.zeros(n + 1, dtype=np.int8)
    for d in range(n - 2, -1, -1):
        active = order[d:]
        v = int(order[d])
        c0, c1 = search.cost_against(v, order[d + 1:], prev)
        upper = int(rds[d + 1]) + min(c0, c1)
        search.init(active, anchor=False, const=0, sym=True, best=upper)
        search.best_x[:] = prev
        search.best_x[v] = 0 if c0 <= c1 else 1
        if not search.run(active, rds[d:], deadline, chunk):
            rds[:d + 1] = rds[d + 1]
            return rds, False
        rds[d] = search.scal[K.BNB_BEST]
        prev = search.best_x.copy()
    return rds, True


def solve_branch_and_bound(
    model: QuboModel,
    time_limit: float | None = None,
    warm_start: bool = True,
    russian_doll: bool = True,
    order: np.ndarray | None = None,
    node_chunk: int = 200_000,
) -> SolveResult:
    """Exact minimum, or the incumbent and a proven lower bound on timeout."""
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    n = model.num_vars
    if n == 0:
        return make_result(model, "bnb", np.zeros(0, np.uint8), model.offset, True, model.offset,
                           {"nodes": 0, "wall_time": 0.0})
    search = _Search(model)
    scale = search.inst.scale
    order = branching_order(model) if order is None else np.asarray(order, dtype=np.int64)
    complete = True
    if russian_doll:
        rds, complete = suffix_bounds(model, order, search, deadline, node_chunk)
    else:
        rds = np.zeros(n + 1, dtype=np.int64)

    best, best_z = _INF, np.zeros(n, dtype=np.uint8)
    candidates = []
    if warm_start:
        candidates.append(solve_annealing(model, seed=0, schedule=WARM_START).best_z)
    if russian_doll and complete:
        candidates.append(search.best_x[:n].astype(np.uint8))
    for z in candidates:
        e = scale * model.objective(z)
        if e < best:
            best, best_z = e, z.copy()
    warm = best

    anchor = search.inst.anchor
    sym = search.indptr[anchor + 1] == search.indptr[anchor]
    search.init(order, anchor=True, const=search.const, sym=sym, best=best)
    search.best_x[:n] = best_z
    done = complete and search.run(order, rds, deadline, node_chunk)

    best = int(search.scal[K.BNB_BEST])
    z = search.best_x[:n].astype(np.uint8)
    if done:
        lower = best
    else:
        s = search.scal
        depth = int(s[K.BNB_DEPTH])
        pending = [int(search.stack_bound[d]) for d in range(depth)
                   if search.stack_tried[d] == 1 and not (d == 0 and s[K.BNB_SYM])]
        lower = min([best, search.bound(rds)] + pending)
    stats = {
        "nodes": search.nodes + (0 if done else int(search.scal[K.BNB_NODES])),
        "warm_start": None if warm >= _INF else warm // scale,
        "russian_doll": russian_doll,
        "timed_out": not done,
        "wall_time": time.perf_counter() - start,
    }
    return make_result(model, "bnb", z, best // scale, done, -((-lower) // scale), stats)
