from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..qubo import Decoded, MatchVar, QuboModel, decode


@dataclass(frozen=True)
class SolveResult:
    """Best bit vector found by a solver, with its exact objective.

    ``lower_bound`` is a proven bound on the optimum (equal to ``objective``
    when ``proven_optimal``).  ``decoded`` is filled for models that carry
    meeting-variable metadata.
    """

    solver: str
    best_z: np.ndarray = field(repr=False)
    objective: int
    proven_optimal: bool
    lower_bound: int | None = None
    stats: dict = field(default_factory=dict, repr=False)
    decoded: Decoded | None = field(default=None, repr=False)

    @property
    def breaks(self) -> int | None:
        return None if self.decoded is None else self.decoded.breaks

    @property
    def penalty_value(self) -> int | None:
        return None if self.decoded is None else self.decoded.penalty_value

    def to_dict(self) -> dict:
        dec = self.decoded
        return {
            "z": [int(b) for b in self.best_z],
            "objective": int(self.objective),
            "optimal": bool(self.proven_optimal),
            "breaks": None if dec is None else dec.breaks,
            "penalty": None if dec is None else dec.penalty_value,
            "cc_violations": [] if dec is None else [
                [v.team, v.start, v.length, "home" if v.home else "away"] for v in dec.cc_violations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": ")) + "\n"


def make_result(model: QuboModel, solver: str, z: np.ndarray, objective: int, proven: bool,
                lower_bound: int | None, stats: dict) -> SolveResult:
    z = np.asarray(z, dtype=np.uint8)
    exact = model.objective(z)
    if exact != objective:
        raise AssertionError(f"{solver}: tracked objective {objective} != recomputed {exact}")
    decoded = decode(model, z) if any(isinstance(m, MatchVar) for m in model.var_meta) else None
    return SolveResult(solver, z, int(objective), proven, lower_bound, stats, decoded)
