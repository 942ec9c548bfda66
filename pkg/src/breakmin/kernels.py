"""Hot loops: batch evaluation, exhaustive enumeration, annealing sweeps and
the branch-and-bound search.

With numba available every kernel below is compiled in nopython mode.  With
``BREAKMIN_DISABLE_NUMBA=1`` the enumeration and batch evaluation switch to
vectorized numpy implementations, and the inherently sequential kernels
(annealing, branch-and-bound) run as plain Python.  Both paths consume the
same inputs and return identical integers.

All energies are int64 and bit vectors uint8.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import BACKEND, USE_NUMBA, jit

__all__ = [
    "BACKEND",
    "batch_objective",
    "brute_force",
    "energy",
    "anneal_run",
    "bnb_init",
    "bnb_run",
    "BNB_DEPTH", "BNB_FIXED", "BNB_FREEMIN", "BNB_FF", "BNB_BEST",
    "BNB_NODES", "BNB_DONE", "BNB_SYM", "BNB_CONST", "BNB_SCAL",
]

# -- batch objective ----------------------------------------------------------

if USE_NUMBA:

    @jit
    def batch_objective(Z, offset, lin, pi, pj, pw):
        out = np.empty(Z.shape[0], dtype=np.int64)
        for r in range(Z.shape[0]):
            acc = offset
            for i in range(lin.shape[0]):
                if Z[r, i]:
                    acc += lin[i]
            for k in range(pi.shape[0]):
                if Z[r, pi[k]] and Z[r, pj[k]]:
                    acc += pw[k]
            out[r] = acc
        return out

else:

    def batch_objective(Z, offset, lin, pi, pj, pw):
        Zi = Z.astype(np.int64)
        out = offset + Zi @ lin
        if pi.size:
            out = out + (Zi[:, pi] * Zi[:, pj]) @ pw
        return out.astype(np.int64)


# -- exhaustive enumeration ---------------------------------------------------
#
# Variables 0..k-1 are enumerated; variables k..N-1 must be pairwise
# non-interacting, so each is set optimally in closed form: its contribution
# is min(0, field).  Codes map variable i to bit k-1-i, so integer order on
# codes is lexicographic order on (z_0, ..., z_{k-1}); ties go to the
# smaller code.

if USE_NUMBA:

    @jit
    def brute_force(k, lin, indptr, indices, weights, offset):
        n = lin.shape[0]
        z = np.zeros(n, dtype=np.uint8)
        h = lin.copy()
        base = offset
        elim = 0
        for e in range(k, n):
            elim += min(0, h[e])
        best = base + elim
        best_code = 0
        code = 0
        total = 1 << k
        for step in range(1, total):
            b = 0
            s = step
            while (s & 1) == 0:
                s >>= 1
                b += 1
            i = k - 1 - b
            if z[i]:
                base -= h[i]
                z[i] = 0
                sgn = -1
            else:
                base += h[i]
                z[i] = 1
                sgn = 1
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j >= k:
                    old = min(0, h[j])
                    h[j] += sgn * weights[p]
                    elim += min(0, h[j]) - old
                else:
                    h[j] += sgn * weights[p]
            code ^= 1 << b
            val = base + elim
            if val < best or (val == best and code < best_code):
                best = val
                best_code = code
        return best, best_code

else:

    def brute_force(k, lin, indptr, indices, weights, offset, block_bits=16):
        n = lin.shape[0]
        rows = np.repeat(np.arange(n), np.diff(indptr))
        upper = rows < indices
        pi, pj, pw = rows[upper], indices[upper], weights[upper]
        inner = pj < k
        ii, ij, iw = pi[inner], pj[inner], pw[inner]
        cross = np.zeros((k, n - k), dtype=np.int64)
        np.add.at(cross, (pi[~inner], pj[~inner] - k), pw[~inner])
        lin_enum = lin[:k]
        lin_elim = lin[k:]
        shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
        block = 1 << min(k, block_bits)
        best, best_code = None, 0
        for start in range(0, 1 << k, block):
            codes = np.arange(start, start + block, dtype=np.int64)
            Z = (codes[:, None] >> shifts) & 1
            vals = offset + Z @ lin_enum
            if ii.size:
                vals = vals + (Z[:, ii] * Z[:, ij]) @ iw
            if n > k:
                vals = vals + np.minimum(0, lin_elim + Z @ cross).sum(axis=1)
            r = int(np.argmin(vals))
            if best is None or vals[r] < best:
                best, best_code = int(vals[r]), int(codes[r])
        return best, best_code


# -- annealing ----------------------------------------------------------------

@jit
def energy(z, lin, indptr, indices, weights, offset):
    """Objective recomputed from scratch (symmetric CSR counts each pair twice)."""
    lin_part = 0
    quad2 = 0
    for i in range(lin.shape[0]):
        if z[i]:
            lin_part += lin[i]
            for p in range(indptr[i], indptr[i + 1]):
                if z[indices[p]]:
                    quad2 += weights[p]
    return offset + lin_part + quad2 // 2


@jit
def anneal_run(z, lin, indptr, indices, weights, offset, temps, rand, check_every, trace):
    """Sequential single-flip sweeps, one temperature per sweep.

    ``z`` is updated in place.  ``rand`` holds one uniform per proposed flip.
    Every ``check_every`` proposals the tracked energy is compared with a
    from-scratch evaluation; the number of disagreements is returned.
    ``trace[k]`` receives the energy after sweep ``k``.
    """
    n = lin.shape[0]
    h = lin.copy()
    for i in range(n):
        if z[i]:
            for p in range(indptr[i], indptr[i + 1]):
                h[indices[p]] += weights[p]
    e = energy(z, lin, indptr, indices, weights, offset)
    best = e
    best_z = z.copy()
    mismatches = 0
    step = 0
    for sweep in range(temps.shape[0]):
        t = temps[sweep]
        for i in range(n):
            delta = -h[i] if z[i] else h[i]
            accept = delta <= 0
            if not accept and t > 0.0:
                accept = rand[sweep * n + i] < math.exp(-delta / t)
            if accept:
                if z[i]:
                    z[i] = 0
                    for p in range(indptr[i], indptr[i + 1]):
                        h[indices[p]] -= weights[p]
                else:
                    z[i] = 1
                    for p in range(indptr[i], indptr[i + 1]):
                        h[indices[p]] += weights[p]
                e += delta
                if e < best:
                    best = e
                    best_z[:] = z
            step += 1
            if check_every > 0 and step % check_every == 0:
                if energy(z, lin, indptr, indices, weights, offset) != e:
                    mismatches += 1
        trace[sweep] = e
    return best, best_z, e, mismatches


# -- branch and bound -----------------------------------------------------------
#
# The search runs on the signed-graph form of the model: nodes are the
# variables plus a fixed anchor, and every edge (u, v, w) costs w when its
# ends agree (w > 0) or |w| when they differ (w < 0).  The objective equals
# BNB_CONST plus the total edge cost.
#
# Variables are branched in a static order.  At depth k the free set is
# order[k:], and the bound is the sum of three disjoint parts: the cost of
# edges between fixed nodes, min(c0[u], c1[u]) for each free u (c0/c1 being
# the cost of u's edges to fixed nodes if u takes 0/1), and rds[k], a lower
# bound on the cost of edges among the free nodes.  rds = 0 gives the plain
# pairwise-min relaxation; the Russian-doll scheme fills rds with the exact
# optima of the suffix subproblems.
#
# Node labels: -1 free, -2 inactive (outside the current subproblem), 0/1 fixed.
#
# scal layout:
BNB_DEPTH = 0
BNB_FIXED = 1
BNB_FREEMIN = 2
BNB_FF = 3
BNB_BEST = 4
BNB_NODES = 5
BNB_DONE = 6
BNB_SYM = 7
BNB_CONST = 8
BNB_SCAL = 9


@jit
def _bnb_fix(v, b, x, c0, c1, indptr, indices, weights, scal):
    if b == 0:
        scal[BNB_FIXED] += c0[v]
    else:
        scal[BNB_FIXED] += c1[v]
    scal[BNB_FREEMIN] -= min(c0[v], c1[v])
    x[v] = b
    for p in range(indptr[v], indptr[v + 1]):
        u = indices[p]
        if x[u] == -1:
            w = weights[p]
            scal[BNB_FF] -= 1
            old = min(c0[u], c1[u])
            if w > 0:
                if b == 0:
                    c0[u] += w
                else:
                    c1[u] += w
            else:
                if b == 0:
                    c1[u] -= w
                else:
                    c0[u] -= w
            scal[BNB_FREEMIN] += min(c0[u], c1[u]) - old


@jit
def _bnb_unfix(v, x, c0, c1, indptr, indices, weights, scal):
    b = x[v]
    x[v] = -1
    for p in range(indptr[v], indptr[v + 1]):
        u = indices[p]
        if x[u] == -1:
            w = weights[p]
            scal[BNB_FF] += 1
            old = min(c0[u], c1[u])
            if w > 0:
                if b == 0:
                    c0[u] -= w
                else:
                    c1[u] -= w
            else:
                if b == 0:
                    c1[u] += w
                else:
                    c0[u] += w
            scal[BNB_FREEMIN] += min(c0[u], c1[u]) - old
    scal[BNB_FREEMIN] += min(c0[v], c1[v])
    if b == 0:
        scal[BNB_FIXED] -= c0[v]
    else:
        scal[BNB_FIXED] -= c1[v]


@jit
def bnb_init(active, anchor, x, c0, c1, indptr, indices, weights, scal):
    """Reset the state for the subproblem on ``active`` nodes.

    The anchor is fixed to 0 when ``anchor >= 0``; otherwise the subproblem
    ignores it.
    """
    x[:] = -2
    for i in range(active.shape[0]):
        x[active[i]] = -1
    if anchor >= 0:
        x[anchor] = -1
    c0[:] = 0
    c1[:] = 0
    ff = 0
    for v in range(x.shape[0]):
        if x[v] == -1:
            for p in range(indptr[v], indptr[v + 1]):
                if x[indices[p]] == -1:
                    ff += 1
    scal[BNB_DEPTH] = 0
    scal[BNB_FIXED] = 0
    scal[BNB_FREEMIN] = 0
    scal[BNB_FF] = ff // 2
    scal[BNB_NODES] = 0
    scal[BNB_DONE] = 0
    if anchor >= 0:
        _bnb_fix(anchor, 0, x, c0, c1, indptr, indices, weights, scal)


@jit
def bnb_run(max_nodes, order, rds, x, c0, c1, indptr, indices, weights,
            stack_first, stack_tried, stack_bound, best_x, scal):
    """Depth-first search for at most ``max_nodes`` node evaluations.

    Resumable: all state lives in the arrays.  Returns when the tree is
    exhausted (``scal[BNB_DONE] = 1``) or the node budget is spent.  Only
    strictly improving leaves replace the incumbent in ``best_x``.
    """
    nn = x.shape[0]
    budget = max_nodes
    while budget > 0:
        budget -= 1
        scal[BNB_NODES] += 1
        d = scal[BNB_DEPTH]
        bound = scal[BNB_CONST] + scal[BNB_FIXED] + scal[BNB_FREEMIN] + rds[d]
        descend = bound < scal[BNB_BEST]
        if descend and scal[BNB_FF] == 0:
            # free variables no longer interact: the bound is attained
            for u in range(nn):
                if x[u] == -1:
                    best_x[u] = 0 if c0[u] <= c1[u] else 1
                elif x[u] >= 0:
                    best_x[u] = x[u]
            scal[BNB_BEST] = bound
            descend = False
        if descend:
            v = order[d]
            first = 0 if c0[v] <= c1[v] else 1
            stack_first[d] = first
            stack_tried[d] = 1
            stack_bound[d] = bound
            scal[BNB_DEPTH] = d + 1
            _bnb_fix(v, first, x, c0, c1, indptr, indices, weights, scal)
            continue
        resumed = False
        while scal[BNB_DEPTH] > 0:
            top = scal[BNB_DEPTH] - 1
            v = order[top]
            _bnb_unfix(v, x, c0, c1, indptr, indices, weights, scal)
            if stack_tried[top] == 1 and not (top == 0 and scal[BNB_SYM] == 1):
                stack_tried[top] = 2
                _bnb_fix(v, 1 - stack_first[top], x, c0, c1, indptr, indices, weights, scal)
                resumed = True
                break
            scal[BNB_DEPTH] = top
        if not resumed:
            scal[BNB_DONE] = 1
            return
