import json

import numpy as np
import pytest

from breakmin import kernels
from breakmin.maxcut import qubo_to_maxcut
from breakmin.qubo import QuboModel, build_model, qubo_from_text, qubo_to_text
from breakmin.solvers import (
    MAX_ENUMERATED, Schedule, partial_bound, solve, solve_annealing, solve_branch_and_bound,
    solve_brute_force,
)
from breakmin.solvers.bnb import branching_order, greedy_order, suffix_bounds
from breakmin.solvers.brute import eliminable_suffix
from breakmin.tournament import extract_meetings

from conftest import instance
from oracle import all_bits, yspace_optimum


def model_for(n, seed, mode="none"):
    return build_model(extract_meetings(instance(n, seed)), mode)


def exhaustive_min(Q):
    """(min, first minimizer in lexicographic order) over all 2^N vectors."""
    Z = all_bits(Q.num_vars)
    values = Q.objective_many(Z)
    k = int(np.argmin(values))
    return int(values[k]), Z[k]


def random_model(rng, n, density=0.5, lo=-5, hi=5):
    terms = {}
    for i in range(n):
        for j in range(i, n):
            if i == j or rng.random() < density:
                terms[i, j] = int(rng.integers(lo, hi + 1))
    return QuboModel(n, terms, int(rng.integers(-3, 4)))


class TestBruteForce:
    def test_table_one(self, table1_meetings):
        res = solve_brute_force(build_model(table1_meetings))
        assert res.objective == 6 and res.proven_optimal and res.breaks == 6

    def test_empty_model(self):
        res = solve_brute_force(QuboModel(0, {}, offset=4))
        assert res.objective == 4 and res.best_z.size == 0

    def test_guard(self):
        Q = QuboModel(30, {(i, i + 1): 1 for i in range(29)})
        with pytest.raises(ValueError, match="limit"):
            solve_brute_force(Q)
        assert MAX_ENUMERATED == 28

    def test_lexicographic_tie_break(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            Q = random_model(rng, 7, lo=-1, hi=1)
            best, z = exhaustive_min(Q)
            res = solve_brute_force(Q)
            assert res.objective == best
            np.testing.assert_array_equal(res.best_z, z)

    def test_table_one_lexicographic_minimizer(self, table1_meetings):
        Q = build_model(table1_meetings)
        np.testing.assert_array_equal(solve_brute_force(Q).best_z, exhaustive_min(Q)[1])

    def test_slack_elimination(self, table1_meetings):
        Q = build_model(table1_meetings, "3")
        assert eliminable_suffix(Q) == 6
        res = solve_brute_force(Q)
        assert res.objective == exhaustive_min(Q)[0]
        assert res.stats["enumerated"] == 6

    def test_unconstrained_n4_at_limit(self):
        Q = model_for(4, 0)
        assert Q.num_vars == 28
        res = solve_brute_force(Q)
        assert res.objective == solve_branch_and_bound(Q).objective >= 18


class TestBranchAndBound:
    @pytest.mark.parametrize("mode", ["none", "2", "3", "2+3"])
    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_brute_force(self, n, mode):
        for seed in range(3):
            Q = model_for(n, seed, mode)
            assert solve_branch_and_bound(Q).objective == solve_brute_force(Q).objective

    def test_random_models(self):
        rng = np.random.default_rng(5)
        for size in range(1, 12):
            Q = random_model(rng, size)
            res = solve_branch_and_bound(Q)
            assert res.objective == exhaustive_min(Q)[0]
            assert res.proven_optimal and res.lower_bound == res.objective

    @pytest.mark.parametrize("warm,rds", [(False, False), (True, False), (False, True)])
    def test_variants(self, warm, rds):
        for seed in range(3):
            Q = model_for(3, seed, "2")
            res = solve_branch_and_bound(Q, warm_start=warm, russian_doll=rds)
            assert res.objective == solve_brute_force(Q).objective

    def test_unlabeled_model_uses_greedy_order(self):
        Q = model_for(4, 1)
        bare = qubo_from_text(qubo_to_text(Q))
        assert bare.var_meta == ()
        np.testing.assert_array_equal(branching_order(bare), greedy_order(bare))
        assert solve_branch_and_bound(bare).objective == solve_branch_and_bound(Q).objective

    def test_slot_major_order(self):
        Q = model_for(3, 0, "3")
        order = branching_order(Q)
        keys = [Q.var_meta[v].quad.s1 if hasattr(Q.var_meta[v], "quad") else 99 for v in order]
        assert keys == sorted(keys) and sorted(order) == list(range(Q.num_vars))

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_lower_bound_certificate(self, n):
        for seed in range(2):
            res = solve_branch_and_bound(model_for(n, seed))
            assert res.proven_optimal and res.objective >= 6 * n - 6

    def test_timeout_keeps_valid_bound(self):
        Q = model_for(8, 2)
        exact = solve_branch_and_bound(Q)
        assert exact.proven_optimal
        short = solve_branch_and_bound(Q, time_limit=0.05, node_chunk=5000)
        assert not short.proven_optimal and short.stats["timed_out"]
        assert short.lower_bound <= exact.objective <= short.objective
        assert short.objective == Q.objective(short.best_z)

    def test_empty_model(self):
        res = solve_branch_and_bound(QuboModel(0, {}, offset=3))
        assert res.objective == 3 and res.proven_optimal


class TestAdmissibility:
    def _restricted_min(self, Q, fixed):
        Z = all_bits(Q.num_vars)
        mask = np.ones(Z.shape[0], dtype=bool)
        for v, b in fixed.items():
            mask &= Z[:, v] == b
        return int(Q.objective_many(Z[mask]).min())

    @pytest.mark.parametrize("mode", ["none", "2"])
    def test_partial_bound_table_one(self, table1_meetings, mode):
        Q = build_model(table1_meetings, mode)
        rng = np.random.default_rng(1)
        for _ in range(60):
            k = int(rng.integers(0, 7))
            vars_ = rng.choice(6, size=k, replace=False)
            fixed = {int(v): int(rng.integers(0, 2)) for v in vars_}
            assert partial_bound(Q, fixed) <= self._restricted_min(Q, fixed)
        full = {v: 0 for v in range(6)}
        assert partial_bound(Q, full) == Q.objective(np.zeros(6, dtype=int))

    def test_partial_bound_random_models(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            Q = random_model(rng, 9)
            fixed = {int(v): int(rng.integers(0, 2)) for v in rng.choice(9, size=4, replace=False)}
            assert partial_bound(Q, fixed) <= self._restricted_min(Q, fixed)

    @pytest.mark.parametrize("mode", ["none", "2"])
    def test_suffix_bounds_are_suffix_optima(self, table1_meetings, mode):
        Q = build_model(table1_meetings, mode)
        order = branching_order(Q)
        rds, complete = suffix_bounds(Q, order)
        assert complete
        inst = qubo_to_maxcut(Q)
        for d in range(Q.num_vars + 1):
            suffix = set(int(v) for v in order[d:])
            edges = [(u, v, w) for u, v, w in inst.edges if u in suffix and v in suffix]
            idx = sorted(suffix)
            best = 0
            if idx:
                best = min(
                    sum((w if bits[idx.index(u)] == bits[idx.index(v)] else 0) if w > 0 else
                        (0 if bits[idx.index(u)] == bits[idx.index(v)] else -w)
                        for u, v, w in edges)
                    for bits in all_bits(len(idx))
                )
            assert rds[d] == best

    def test_suffix_bounds_monotone(self):
        Q = model_for(4, 3)
        rds, complete = suffix_bounds(Q, branching_order(Q))
        assert complete and (np.diff(rds) <= 0).all()


class TestAnnealing:
    def test_n2_every_seed(self, table1_meetings):
        Q = build_model(table1_meetings)
        for seed in range(10):
            assert solve_annealing(Q, seed=seed).objective == 6
        for seed in range(3):
            assert solve_annealing(model_for(2, seed), seed=seed).objective == 6

    def test_deterministic(self):
        Q = model_for(4, 0, "3")
        a = solve_annealing(Q, seed=9, schedule=Schedule(sweeps=50, restarts=3))
        b = solve_annealing(Q, seed=9, schedule=Schedule(sweeps=50, restarts=3))
        np.testing.assert_array_equal(a.best_z, b.best_z)
        assert a.objective == b.objective and not a.proven_optimal

    def test_frozen_schedule_never_increases(self):
        Q = model_for(4, 2)
        for start in (solve_annealing(Q, seed=0).best_z,
                      np.random.default_rng(4).integers(0, 2, Q.num_vars)):
            res = solve_annealing(Q, temps=np.zeros(30), initial=start, keep_trace=True,
                                  schedule=Schedule(restarts=1))
            trace = res.stats["trace"][0]
            assert trace[0] <= Q.objective(start)
            assert (np.diff(trace) <= 0).all()

    def test_fine_checkpoints(self):
        Q = model_for(3, 1, "2+3")
        res = solve_annealing(Q, seed=1, schedule=Schedule(sweeps=40, restarts=2), check_every=1)
        assert res.objective == Q.objective(res.best_z)

    def test_drift_raises(self, monkeypatch):
        real = kernels.anneal_run

        def drifting(*args):
            best, z, e, _ = real(*args)
            return best, z, e, 1

        monkeypatch.setattr(kernels, "anneal_run", drifting)
        with pytest.raises(RuntimeError):
            solve_annealing(model_for(2, 0), schedule=Schedule(sweeps=5, restarts=1))

    def test_schedule_is_geometric(self):
        Q = model_for(3, 0)
        res = solve_annealing(Q, schedule=Schedule(sweeps=10, restarts=1))
        assert res.stats["t_initial"] > res.stats["t_final"] > 0

    def test_needs_variables(self):
        with pytest.raises(ValueError):
            solve_annealing(QuboModel(0, {}))


class TestResult:
    def test_json_keys(self, table1_meetings):
        res = solve(build_model(table1_meetings, "2"), "bnb")
        data = json.loads(res.to_json())
        assert set(data) == {"z", "objective", "optimal", "breaks", "penalty", "cc_violations"}
        assert data["objective"] == data["breaks"] + data["penalty"] == res.objective
        assert all(len(v) == 4 for v in data["cc_violations"])

    def test_penalized_optimum_matches_yspace(self, table1, table1_meetings):
        for mode, bounds in (("2", (2,)), ("3", (3,)), ("2+3", (2, 3))):
            res = solve(build_model(table1_meetings, mode), "bnb")
            opt = yspace_optimum(table1.tau, bounds)
            if opt is None:
                assert res.penalty_value > 0
            else:
                assert res.penalty_value == 0 and res.breaks == opt

    def test_unknown_solver(self, table1_meetings):
        with pytest.raises(ValueError):
            solve(build_model(table1_meetings), "gurobi")

    def test_objective_mismatch_detected(self, table1_meetings):
        from breakmin.solvers.result import make_result
        Q = build_model(table1_meetings)
        with pytest.raises(AssertionError):
            make_result(Q, "x", np.zeros(6, dtype=np.uint8), 0, True, 0, {})
