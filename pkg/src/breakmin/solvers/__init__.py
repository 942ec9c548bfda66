"""Minimizers for :class:`~breakmin.qubo.QuboModel`."""
from __future__ import annotations

from ..qubo import QuboModel
from .anneal import Schedule, solve_annealing
from .bnb import partial_bound, solve_branch_and_bound
from .brute import MAX_ENUMERATED, solve_brute_force
from .result import SolveResult

__all__ = [
    "SolveResult",
    "Schedule",
    "MAX_ENUMERATED",
    "SOLVERS",
    "solve",
    "solve_brute_force",
    "solve_branch_and_bound",
    "solve_annealing",
    "partial_bound",
]

SOLVERS = ("bf", "bnb", "sa")


def solve(model: QuboModel, solver: str = "bnb", time_limit: float | None = None,
          seed: int = 0) -> SolveResult:
    if solver == "bf":
        return solve_brute_force(model)
    if solver == "bnb":
        return solve_branch_and_bound(model, time_limit=time_limit)
    if solver == "sa":
        return solve_annealing(model, seed=seed)
    raise ValueError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
