"""Break minimization in mirrored double round-robin tournaments via QUBO."""
from __future__ import annotations

from ._accel import BACKEND
from .assignment import (
    CCViolation, FeasibilityReport, HAAssignment, check_cc, check_consistency, count_breaks,
    feasibility_report,
)
from .maxcut import MaxCutInstance, cut_to_bits, cut_weight, partition_of, qubo_to_maxcut
from .qubo import (
    CCMode, DEFAULT_PENALTY, Decoded, QuboModel, add_cc2_penalty, add_cc3_penalty,
    build_break_qubo, build_model, decode,
)
from .solvers import (
    SolveResult, solve, solve_annealing, solve_branch_and_bound, solve_brute_force,
)
from .tournament import (
    MeetingSet, Timetable, build_mdrrt, extract_meetings, generate_srrt, table_one,
    validate_timetable,
)

__version__ = "0.1.0"
