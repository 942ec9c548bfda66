"""Randomized properties over generated instances and bit vectors."""
import numpy as np
from hypothesis import given, settings, strategies as st

from breakmin.assignment import check_cc, check_consistency, count_breaks
from breakmin.maxcut import cut_to_bits, cut_weight, partition_of, qubo_to_maxcut
from breakmin.qubo import QuboModel, build_model, decode, qubo_from_text, qubo_to_text
from breakmin.solvers import solve_branch_and_bound, solve_brute_force
from breakmin.tournament import extract_meetings, validate_timetable

from conftest import instance
from oracle import breaks, window_penalty, y_from_z

MODES = st.sampled_from(["none", "2", "3", "2+3"])
SETTINGS = settings(max_examples=40, deadline=None)


@st.composite
def model_and_bits(draw, max_n=5):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    mode = draw(MODES)
    tt = instance(n, seed)
    Q = build_model(extract_meetings(tt), mode)
    z = np.array(draw(st.lists(st.integers(0, 1), min_size=Q.num_vars, max_size=Q.num_vars)))
    return tt, Q, z


@st.composite
def small_qubo(draw):
    n = draw(st.integers(1, 9))
    keys = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    terms = draw(st.dictionaries(keys, st.integers(-9, 9), max_size=3 * n))
    return QuboModel(n, terms, draw(st.integers(-5, 5)))


@SETTINGS
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_generated_timetables_valid(n, seed):
    tt = instance(n, seed)
    assert validate_timetable(tt) == []
    tau = tt.tau
    cols = np.arange(tau.shape[1])
    assert (tau[tau - 1, cols] == np.arange(1, 2 * n + 1)[:, None]).all()
    assert len(extract_meetings(tt)) == n * (2 * n - 1)


@SETTINGS
@given(model_and_bits())
def test_objective_is_breaks_plus_window_penalty(case):
    tt, Q, z = case
    k = Q.num_match_vars
    y = y_from_z(tt.tau, z[:k])
    cc = Q.cc_mode
    expected = breaks(y) + window_penalty(y, z[k:], Q.penalty, cc.has_cc2, cc.has_cc3, tt.n)
    assert Q.objective(z) == expected
    dec = decode(Q, z)
    np.testing.assert_array_equal(dec.assignment.y, y)
    assert check_consistency(dec.assignment, extract_meetings(tt))
    assert dec.breaks == count_breaks(y) >= 6 * tt.n - 6


@SETTINGS
@given(model_and_bits())
def test_complement_symmetry(case):
    _, Q, z = case
    assert Q.objective(z) == Q.objective(1 - z)


@SETTINGS
@given(model_and_bits(max_n=4))
def test_maxcut_identity_and_roundtrip(case):
    _, Q, z = case
    inst = qubo_to_maxcut(Q)
    side = partition_of(z)
    assert inst.constant - cut_weight(inst, side) == inst.scale * Q.objective(z)
    np.testing.assert_array_equal(cut_to_bits(inst, side), z)
    np.testing.assert_array_equal(cut_to_bits(inst, 1 - side), z)


@SETTINGS
@given(small_qubo())
def test_bnb_matches_brute_force_on_arbitrary_models(Q):
    bf = solve_brute_force(Q)
    bnb = solve_branch_and_bound(Q, warm_start=False)
    assert bnb.objective == bf.objective
    assert bf.objective == Q.objective(bf.best_z)


@SETTINGS
@given(small_qubo())
def test_text_roundtrip(Q):
    assert qubo_from_text(qubo_to_text(Q)) == Q


@SETTINGS
@given(st.lists(st.lists(st.integers(0, 1), min_size=8, max_size=8), min_size=1, max_size=6))
def test_check_cc_runs_cover_rows(rows):
    y = np.array(rows)
    for u in (2, 3):
        for v in check_cc(y, u):
            run = y[v.team - 1, v.start - 1:v.start - 1 + v.length]
            assert v.length > u and (run == int(v.home)).all()
            before, after = v.start - 2, v.start - 1 + v.length
            if before >= 0:
                assert y[v.team - 1, before] != int(v.home)
            if after < y.shape[1]:
                assert y[v.team - 1, after] != int(v.home)
