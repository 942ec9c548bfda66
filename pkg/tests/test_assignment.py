import numpy as np
import pytest

from breakmin.assignment import (
    CCViolation, HAAssignment, assignment_from_json, assignment_to_json, check_cc,
    check_consistency, count_breaks, feasibility_report, read_assignment, write_assignment,
)
from breakmin.tournament import extract_meetings

from conftest import instance
from oracle import all_consistent, breaks, run_violation, y_from_z


def alternating(teams: int, slots: int) -> np.ndarray:
    return (np.arange(slots)[None, :] + np.arange(teams)[:, None]) % 2


class TestHAAssignment:
    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            HAAssignment(np.array([[0, 2]]))

    def test_rejects_vector(self):
        with pytest.raises(ValueError):
            HAAssignment(np.array([0, 1]))

    def test_home_lookup_and_complement(self, table2):
        assert table2.home(1, 1) == 1 and table2.home(2, 1) == 0
        assert table2.complement().complement() == table2
        assert table2.complement().home(1, 1) == 0

    def test_is_immutable_copy(self):
        raw = np.zeros((2, 2), dtype=int)
        Y = HAAssignment(raw)
        raw[0, 0] = 1
        assert Y.home(1, 1) == 0
        with pytest.raises(ValueError):
            Y.y[0, 0] = 1


class TestCountBreaks:
    def test_table_two(self, table2):
        assert count_breaks(table2) == 6
        # team 2 breaks at slots 2, 4, 5 and team 3 at 2, 4, 5
        row2, row3 = table2.y[1], table2.y[2]
        assert [s + 1 for s in range(1, 6) if row2[s] == row2[s - 1]] == [2, 4, 5]
        assert [s + 1 for s in range(1, 6) if row3[s] == row3[s - 1]] == [2, 4, 5]

    def test_alternating_is_zero(self):
        assert count_breaks(alternating(4, 6)) == 0

    def test_all_home(self):
        n = 2
        assert count_breaks(np.ones((2 * n, 4 * n - 2), dtype=int)) == 2 * n * (4 * n - 3)

    def test_complement_symmetry(self, table2):
        assert count_breaks(table2) == count_breaks(table2.complement())


class TestConsistency:
    def test_tables_one_and_two(self, table2, table1_meetings):
        assert check_consistency(table2, table1_meetings)

    def test_flip_breaks_consistency(self, table2, table1_meetings):
        y = table2.y.copy()
        y[0, 0] = 0
        assert not check_consistency(y, table1_meetings)

    def test_complement_consistent(self, table2, table1_meetings):
        assert check_consistency(table2.complement(), table1_meetings)

    def test_shape_mismatch(self, table1_meetings):
        with pytest.raises(ValueError):
            check_consistency(np.zeros((4, 5), dtype=int), table1_meetings)

    def test_every_oracle_matrix_consistent(self, table1, table1_meetings):
        for y in all_consistent(table1.tau):
            assert check_consistency(y, table1_meetings)


class TestCheckCC:
    def test_table_two_u2(self, table2):
        assert check_cc(table2, 2) == [CCViolation(2, 3, 3, True), CCViolation(3, 3, 3, False)]

    def test_table_two_u3(self, table2):
        assert check_cc(table2, 3) == []

    def test_alternating(self):
        assert check_cc(alternating(6, 10), 2) == []

    @pytest.mark.parametrize("u", [1, 4, 0])
    def test_rejects_u(self, table2, u):
        with pytest.raises(ValueError):
            check_cc(table2, u)

    def test_run_at_tail(self):
        y = np.array([[1, 0, 1, 0, 0, 0, 0]])
        assert check_cc(y, 3) == [CCViolation(1, 4, 4, False)]

    def test_complement_counts(self, table2):
        for u in (2, 3):
            assert len(check_cc(table2, u)) == len(check_cc(table2.complement(), u))

    def test_matches_window_oracle(self):
        rng = np.random.default_rng(3)
        Y = rng.integers(0, 2, size=(300, 4, 10))
        for y, bad2, bad3 in zip(Y, run_violation(Y, 2), run_violation(Y, 3)):
            assert bool(check_cc(y, 2)) == bad2
            assert bool(check_cc(y, 3)) == bad3


class TestMirrorReduction:
    """CC over all windows agrees with CC over windows starting at 1..2n-1."""

    def test_exhaustive_n2(self, table1):
        Y = all_consistent(table1.tau)
        for u in (2, 3):
            np.testing.assert_array_equal(run_violation(Y, u), run_violation(Y, u, last_start=3))

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_random_consistent(self, n):
        tt = instance(n, 10 + n)
        rng = np.random.default_rng(n)
        Y = np.stack([y_from_z(tt.tau, rng.integers(0, 2, n * (2 * n - 1))) for _ in range(400)])
        for u in (2, 3):
            full = np.array([bool(check_cc(y, u)) for y in Y])
            np.testing.assert_array_equal(full, run_violation(Y, u, last_start=2 * n - 1))


class TestLowerBound:
    def test_exhaustive_n2(self, table1):
        assert breaks(all_consistent(table1.tau)).min() == 6

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_random_consistent(self, n):
        tt = instance(n, n)
        rng = np.random.default_rng(n)
        for _ in range(200):
            y = y_from_z(tt.tau, rng.integers(0, 2, n * (2 * n - 1)))
            assert count_breaks(y) >= 6 * n - 6


class TestReportAndJson:
    def test_report(self, table2, table1_meetings):
        rep = feasibility_report(table2, table1_meetings, cc=(2, 3))
        assert rep.consistent and rep.breaks == 6
        assert len(rep.cc_violations[2]) == 2 and rep.cc_violations[3] == []
        assert not rep.feasible
        assert feasibility_report(table2, table1_meetings).feasible

    def test_json_roundtrip(self, table2, tmp_path):
        text = assignment_to_json(table2)
        assert assignment_from_json(text) == table2
        assert text.splitlines()[2] == "    [1, 0, 1, 0, 1, 0],"
        write_assignment(table2, tmp_path / "y.json")
        assert read_assignment(tmp_path / "y.json") == table2

    def test_json_needs_y(self):
        with pytest.raises(ValueError):
            assignment_from_json('{"z": [1]}')
