"""Command-line front end.

Subcommands::

    breakmin gen    --n 3 --count 5 --seed 7 --out instances/
    breakmin solve  instances/mdrrt_n3_001.json --cc 2 --solver bnb --out sol.json
    breakmin check  instances/mdrrt_n3_001.json sol.json --cc 2
    breakmin bench  --n 2..8 --count 5 --solver bnb --time-limit 60 --out bench.csv
    breakmin export instances/mdrrt_n3_001.json --format maxcut-rudy --out inst.rudy

Exit codes: 0 success, 2 usage error, 3 unreadable or malformed input,
4 infeasible (positive penalty part or CC violations), 5 timeout with no
incumbent, 6 a result failed independent verification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from ._accel import BACKEND
from .assignment import (
    HAAssignment, assignment_from_json, check_cc, check_consistency, count_breaks,
)
from .maxcut import maxcut_to_text, qubo_to_maxcut
from .qubo import (
    CCMode, DEFAULT_PENALTY, QuboModel, build_model, decode, model_from_json, model_to_json,
    qubo_from_text, qubo_to_text, read_qubo, write_qubo,
)
from .solvers import SOLVERS, SolveResult, solve
from .tournament import (
    Timetable, build_mdrrt, extract_meetings, generate_srrt, read_timetable,
    timetable_from_json, timetable_to_json, validate_timetable,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_TIMEOUT = 5
EXIT_VERIFY = 6

FORMATS = ("qubo-text", "maxcut-rudy", "json")
CC_CHOICES = [m.value for m in CCMode]
BENCH_COLUMNS = ("n", "instances", "solved", "mean_time_s", "mean_objective")
DEFAULT_BENCH_LIMIT = 3600.0

_INPUT_ERRORS = (OSError, ValueError, KeyError, TypeError, IndexError)


class InputError(Exception):
    """Wraps an unreadable or malformed input file."""


class VerificationError(Exception):
    pass


# -- instances -------------------------------------------------------------------

def instance_seed(seed: int, n: int, index: int) -> int:
    """Shuffle seed of instance ``index`` (0-based) for ``n``, derived from the CLI seed."""
    return int(np.random.SeedSequence([seed, n, index]).generate_state(1, dtype=np.uint64)[0])


def make_instance(n: int, seed: int, index: int) -> Timetable:
    return build_mdrrt(generate_srrt(n), instance_seed(seed, n, index))


def instance_name(n: int, index: int) -> str:
    return f"mdrrt_n{n}_{index + 1:03d}.json"


def _load_timetable(path: str) -> Timetable:
    try:
        tt = read_timetable(path)
    except _INPUT_ERRORS as exc:
        raise InputError(f"{path}: {exc}") from None
    problems = validate_timetable(tt)
    if problems:
        raise InputError(f"{path}: invalid timetable: {problems[0]}")
    return tt


# -- verification ----------------------------------------------------------------

def verify_assignment(tt: Timetable, Y: HAAssignment) -> bool:
    """Consistency read straight off the timetable, without the meeting set.

    In each slot a team and its opponent must be on opposite sides, and every
    team must swap venue between the two meetings with an opponent.
    """
    y = Y.y.astype(np.int64)
    tau = tt.tau - 1
    half = tt.half_length
    if y.shape != tau.shape:
        return False
    cols = np.arange(tau.shape[1])
    opposite = (y + y[tau, cols[None, :]] == 1).all()
    swapped = (y[:, :half] + y[:, half:] == 1).all()
    return bool(opposite and swapped)


def verify_result(tt: Timetable, model: QuboModel, res: SolveResult) -> None:
    """Independent checker run before any solution is written."""
    if res.decoded is None:
        raise VerificationError("result carries no decoded assignment")
    Y = res.decoded.assignment
    if not verify_assignment(tt, Y):
        raise VerificationError("decoded assignment is inconsistent with the timetable")
    if not check_consistency(Y, extract_meetings(tt)):
        raise VerificationError("decoded assignment violates a meeting orientation")
    breaks = count_breaks(Y)
    if breaks != res.decoded.breaks:
        raise VerificationError(f"break recount {breaks} != decoded {res.decoded.breaks}")
    for u in model.cc_mode.bounds:
        if check_cc(Y, u) != res.decoded.cc_report[u]:
            raise VerificationError(f"CC({u}) rescan disagrees with the decoded report")
    n = tt.n
    if res.proven_optimal and model.cc_mode is CCMode.NONE and breaks < 6 * n - 6:
        raise VerificationError(f"optimum {breaks} below the lower bound {6 * n - 6}")


# -- subcommands -----------------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for index in range(args.count):
        tt = make_instance(args.n, args.seed, index)
        path = out / instance_name(args.n, index)
        path.write_text(timetable_to_json(tt), newline="\n")
        print(path)
    return EXIT_OK


def _summary(res: SolveResult, model: QuboModel, elapsed: float) -> str:
    status = "optimal" if res.proven_optimal else "not proven optimal"
    parts = [f"solver={res.solver}", f"objective={res.objective}", status]
    if res.decoded is not None:
        parts += [f"breaks={res.breaks}", f"penalty={res.penalty_value}"]
    if not res.proven_optimal and res.lower_bound is not None:
        parts.append(f"lower_bound={res.lower_bound}")
    parts.append(f"time={elapsed:.3f}s")
    line = " ".join(parts)
    if res.penalty_value:
        line += "\nwarning: positive penalty at the reported solution (infeasible or penalty too small)"
        for v in res.decoded.cc_violations:
            kind = "home stand" if v.home else "road trip"
            line += f"\n  team {v.team}: {kind} of {v.length} from slot {v.start}"
    return line


def cmd_solve(args: argparse.Namespace) -> int:
    tt = _load_timetable(args.timetable)
    model = build_model(extract_meetings(tt), args.cc, args.penalty)
    start = time.perf_counter()
    res = solve(model, args.solver, time_limit=args.time_limit, seed=args.seed)
    elapsed = time.perf_counter() - start
    if res.best_z is None or res.best_z.size != model.num_vars:
        print("error: time limit reached before any incumbent was found", file=sys.stderr)
        return EXIT_TIMEOUT
    try:
        verify_result(tt, model, res)
    except VerificationError as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    text = res.to_json()
    if args.out:
        Path(args.out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)
    print(_summary(res, model, elapsed), file=sys.stderr)
    return EXIT_INFEASIBLE if res.penalty_value else EXIT_OK


def _load_solution(path: str, tt: Timetable, cc: str, penalty: int) -> HAAssignment:
    try:
        text = Path(path).read_text()
        data = json.loads(text)
        if isinstance(data, dict) and "y" in data:
            return assignment_from_json(text)
        if isinstance(data, dict) and "z" in data:
            model = build_model(extract_meetings(tt), cc, penalty)
            return decode(model, data["z"]).assignment
    except _INPUT_ERRORS as exc:
        raise InputError(f"{path}: {exc}") from None
    raise InputError(f"{path}: expected a 'y' assignment or a 'z' solution")


def cmd_check(args: argparse.Namespace) -> int:
    tt = _load_timetable(args.timetable)
    Y = _load_solution(args.solution, tt, args.cc, args.penalty)
    if Y.y.shape != tt.tau.shape:
        print(f"inconsistent: assignment shape {Y.y.shape} != timetable {tt.tau.shape}")
        return EXIT_VERIFY
    consistent = verify_assignment(tt, Y) and check_consistency(Y, extract_meetings(tt))
    print(f"consistent={consistent} breaks={count_breaks(Y)} lower_bound={6 * tt.n - 6}")
    violations = 0
    for u in CCMode(args.cc).bounds:
        found = check_cc(Y, u)
        violations += len(found)
        print(f"CC({u}): {len(found)} violation(s)")
        for v in found:
            print(f"  team {v.team}: {'home' if v.home else 'away'} run of {v.length} from slot {v.start}")
    if not consistent:
        return EXIT_VERIFY
    return EXIT_INFEASIBLE if violations else EXIT_OK


@dataclass(frozen=True)
class BenchRow:
    n: int
    instances: int
    solved: int
    mean_time: float
    mean_objective: float

    def as_csv(self) -> list[str]:
        return [str(self.n), str(self.instances), str(self.solved),
                f"{self.mean_time:.6f}", f"{self.mean_objective:.2f}"]


def _bench_one(job: tuple) -> tuple[bool, float, int]:
    n, index, seed, cc, penalty, solver, time_limit = job
    model = build_model(extract_meetings(make_instance(n, seed, index)), cc, penalty)
    start = time.perf_counter()
    res = solve(model, solver, time_limit=time_limit, seed=seed)
    elapsed = time.perf_counter() - start
    solved = res.proven_optimal if solver != "sa" else True
    if time_limit is not None:
        if not solved:
            elapsed = time_limit
        solved = solved and elapsed <= time_limit
        elapsed = min(elapsed, time_limit)
    return solved, elapsed, res.objective


def _warm_up(solver: str, cc: str, penalty: int) -> None:
    """Compile the kernels on a tiny instance so timings exclude JIT cost."""
    model = build_model(extract_meetings(make_instance(2, 0, 0)), cc, penalty)
    solve(model, solver, time_limit=None, seed=0)


def run_bench(ns: Sequence[int], per_n: int, cc: str, penalty: int, solver: str,
              time_limit: float | None, seed: int, jobs: int = 1) -> list[BenchRow]:
    """One row per ``n``; failed solves are charged the full time limit."""
    if per_n <= 0:
        return []
    work = [(n, i, seed, cc, penalty, solver, time_limit) for n in ns for i in range(per_n)]
    _warm_up(solver, cc, penalty)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_warm_up,
                                 initargs=(solver, cc, penalty)) as pool:
            results = list(pool.map(_bench_one, work))
    else:
        results = [_bench_one(job) for job in work]
    rows = []
    for k, n in enumerate(ns):
        chunk = results[k * per_n:(k + 1) * per_n]
        rows.append(BenchRow(
            n=n,
            instances=per_n,
            solved=sum(ok for ok, _, _ in chunk),
            mean_time=float(np.mean([t for _, t, _ in chunk])),
            mean_objective=float(np.mean([obj for _, _, obj in chunk])),
        ))
    return rows


def bench_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    writer.writerows(r.as_csv() for r in rows)
    return buf.getvalue()


def bench_table(rows: Sequence[BenchRow]) -> str:
    lines = [f"{'n':>3} {'instances':>9} {'solved':>6} {'time [s]':>10} {'objective':>10}"]
    for r in rows:
        lines.append(f"{r.n:>3} {r.instances:>9} {r.solved:>6} {r.mean_time:>10.4f} {r.mean_objective:>10.2f}")
    return "\n".join(lines)


def cmd_bench(args: argparse.Namespace) -> int:
    limit = DEFAULT_BENCH_LIMIT if args.time_limit is None else args.time_limit
    rows = run_bench(args.n, args.count, args.cc, args.penalty, args.solver, limit,
                     args.seed, args.jobs)
    print(f"# solver={args.solver} cc={args.cc} time_limit={limit:g}s backend={BACKEND}")
    print(bench_table(rows))
    text = bench_csv(rows)
    if args.out:
        Path(args.out).write_text(text, newline="\n")
    else:
        print()
        sys.stdout.write(text)
    return EXIT_OK


def _load_model(path: str, cc: str, penalty: int) -> QuboModel:
    """A timetable (built into a model), a JSON model, or a qubo-text file."""
    try:
        text = Path(path).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            data = json.loads(text)
            if "tau" in data:
                tt = timetable_from_json(text)
                problems = validate_timetable(tt)
                if problems:
                    raise ValueError(f"invalid timetable: {problems[0]}")
                return build_model(extract_meetings(tt), cc, penalty)
            return model_from_json(text)
        if Path(str(path) + ".meta.json").exists():
            return read_qubo(path)
        return qubo_from_text(text)
    except _INPUT_ERRORS as exc:
        raise InputError(f"{path}: {exc}") from None


def export_text(model: QuboModel, fmt: str) -> str:
    if fmt == "qubo-text":
        return qubo_to_text(model)
    if fmt == "maxcut-rudy":
        return maxcut_to_text(qubo_to_maxcut(model))
    if fmt == "json":
        return model_to_json(model)
    raise ValueError(f"unknown format {fmt!r}")


def cmd_export(args: argparse.Namespace) -> int:
    model = _load_model(args.input, args.cc, args.penalty)
    if args.out and args.format == "qubo-text":
        write_qubo(model, args.out)
    elif args.out:
        Path(args.out).write_text(export_text(model, args.format), newline="\n")
    else:
        sys.stdout.write(export_text(model, args.format))
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def _team_half(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("n must be at least 2")
    return n


def _n_range(text: str) -> list[int]:
    """``5``, ``2..8`` or ``2,4,6``."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split(".."))
            values = list(range(lo, hi + 1))
        else:
            values = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n range {text!r}") from None
    if not values or min(values) < 2:
        raise argparse.ArgumentTypeError("n range must be non-empty with every n >= 2")
    return values


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seconds(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("time limit must be positive")
    return v


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cc", choices=CC_CHOICES, default="none",
                   help="consecutive-venue constraints (default: none)")
    p.add_argument("--penalty", type=_positive_int, default=DEFAULT_PENALTY,
                   help=f"penalty weight P (default: {DEFAULT_PENALTY})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="breakmin", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate shuffled mirrored double round-robin timetables")
    p.add_argument("--n", type=_team_half, required=True, help="half the number of teams")
    p.add_argument("--count", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="minimize breaks for a timetable file")
    p.add_argument("timetable")
    _add_model_flags(p)
    p.add_argument("--solver", choices=SOLVERS, default="bnb")
    p.add_argument("--time-limit", type=_seconds, default=None)
    p.add_argument("--seed", type=int, default=0, help="annealing seed")
    p.add_argument("--out", help="solution JSON path (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="verify an assignment or solution against a timetable")
    p.add_argument("timetable")
    p.add_argument("solution", help="JSON with a 'y' matrix or a 'z' bit vector")
    _add_model_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="solve generated instances and tabulate times")
    p.add_argument("--n", type=_n_range, default=_n_range("2..8"), help="e.g. 2..8 (default)")
    p.add_argument("--count", "--per-n", dest="count", type=_nonneg_int, default=5,
                   help="instances per n (default: 5)")
    _add_model_flags(p)
    p.add_argument("--solver", choices=SOLVERS, default="bnb")
    p.add_argument("--time-limit", type=_seconds, default=None,
                   help=f"per-instance limit in seconds (default: {DEFAULT_BENCH_LIMIT:g})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1, help="parallel worker processes")
    p.add_argument("--out", help="CSV path (default: CSV after the table on stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="write a model as qubo-text, maxcut-rudy or json")
    p.add_argument("input", help="timetable JSON, model JSON or qubo-text file")
    p.add_argument("--format", choices=FORMATS, required=True)
    _add_model_flags(p)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
