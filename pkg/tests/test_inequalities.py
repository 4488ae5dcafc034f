import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wielandt.core import HermitianMatrix, diag, random_hermitian, random_unitary
from wielandt.errors import IndexOutOfRange, LengthMismatch, ScanTooLarge
from wielandt.inequalities import (
    EQUALITY,
    HOLDS,
    IndexSet,
    lidskii_check,
    majorizes,
    wielandt_check,
    wielandt_scan,
)

from conftest import brute_force_sorted_eigs

GOLDEN = (np.sqrt(5) - 1) / 2  # 0.618...


def test_index_set_validation():
    assert IndexSet.parse(4, "1, 3").indices == (1, 3)
    for bad in ("3,1", "0", "5", "1,2,3,4", ""):
        with pytest.raises(IndexOutOfRange):
            IndexSet.parse(4, bad)


def test_check_diagonal_example_example(diag_pair):
    rep = wielandt_check(*diag_pair, [3])
    # A + B = diag(3, 3, 2)
    assert (rep.lhs, rep.rhs, rep.slack, rep.verdict) == (2.0, 3.0, 1.0, HOLDS)


def test_check_zero_b_is_equality():
    A = random_hermitian(4, 0)
    for S in ([1], [2, 4], [1, 2, 3]):
        rep = wielandt_check(A, HermitianMatrix(np.zeros((4, 4))), S)
        assert rep.verdict == EQUALITY and abs(rep.slack) <= rep.tol


def _oracle_slack(A, B, S):
    la, lb, lab = (brute_force_sorted_eigs(M) for M in (A, B, A.plus(B)))
    pos = [i - 1 for i in S]
    return la[pos].sum() + lb[:len(S)].sum() - lab[pos].sum()


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10_000))
def test_wielandt_holds_for_all_index_sets(n, seed):
    rng = np.random.default_rng(seed)
    A, B = random_hermitian(n, rng), random_hermitian(n, rng)
    reports = wielandt_scan(A, B)
    assert len(reports) == 2 ** n - 2
    for S, rep in reports:
        assert rep.slack >= -1e-8
        assert rep.slack == pytest.approx(_oracle_slack(A, B, S.indices), abs=1e-7)


def test_scan_counts_and_sorting():
    reports = wielandt_scan(random_hermitian(3, 1), random_hermitian(3, 2))
    assert len(reports) == 6
    slacks = [r.slack for _, r in reports]
    assert slacks == sorted(slacks)


def test_scan_commuting_aligned_pair_has_zero_slack():
    A = diag(3, 2, 1)
    zero = {S.indices for S, r in wielandt_scan(A, A) if r.verdict == EQUALITY}
    assert {(1,), (1, 2)} <= zero


def test_scan_cap():
    A = HermitianMatrix(np.eye(15))
    with pytest.raises(ScanTooLarge):
        wielandt_scan(A, A)


def test_majorizes_examples():
    res = majorizes([GOLDEN, -GOLDEN], [1, -1])
    assert res.holds and res.margins[0] == pytest.approx(1 - GOLDEN)
    assert majorizes([3, 1, 2], [3, 1, 2]).holds
    res = majorizes([2, -2], [1, -1])
    assert not res.holds and res.margins[0] == -1
    with pytest.raises(LengthMismatch):
        majorizes([1], [1, 2])


def test_lidskii_golden_ratio(swap_matrix):
    res = lidskii_check(diag(1, 0), swap_matrix)
    assert res.holds
    # lambda([[1,1],[1,0]]) - (1, 0) = (phi - 1, -phi + 1)
    assert res.margins[0] == pytest.approx(1 - GOLDEN, abs=1e-14)


def test_lidskii_scalar_b_is_tight():
    A = random_hermitian(4, 3)
    res = lidskii_check(A, HermitianMatrix(2.5 * np.eye(4)))
    assert res.holds
    np.testing.assert_allclose(res.margins, 0, atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_lidskii_agrees_with_wielandt(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    A, B = random_hermitian(n, rng), random_hermitian(n, rng)
    lid = lidskii_check(A, B)
    scan_ok = min(r.slack for _, r in wielandt_scan(A, B)) >= -1e-8
    assert lid.holds and scan_ok
    assert lid.min_margin >= -1e-8


@pytest.mark.parametrize("seed", range(5))
def test_unitary_invariance_and_shift(seed):
    rng = np.random.default_rng(seed)
    n = 5
    A, B = random_hermitian(n, rng), random_hermitian(n, rng)
    Q = random_unitary(n, rng)
    c = float(rng.standard_normal())
    Bc = B.plus(HermitianMatrix(np.eye(n)), c)
    for S in itertools.combinations(range(1, n + 1), 2):
        base = wielandt_check(A, B, S)
        rot = wielandt_check(A.conjugate_by(Q), B.conjugate_by(Q), S)
        assert rot.slack == pytest.approx(base.slack, abs=1e-10)
        shifted = wielandt_check(A, Bc, S)
        assert shifted.lhs == pytest.approx(base.lhs + 2 * c, abs=1e-10)
        assert shifted.rhs == pytest.approx(base.rhs + 2 * c, abs=1e-10)
        assert shifted.slack == pytest.approx(base.slack, abs=1e-10)


def test_report_json_shape(diag_pair):
    d = wielandt_check(*diag_pair, [3]).to_dict()
    assert d == {"indices": [3], "lhs": 2.0, "rhs": 3.0, "slack": 1.0, "verdict": "holds"}
