import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wielandt.core import HermitianMatrix, diag, eigh, random_hermitian, random_unitary
from wielandt.errors import DimensionMismatch
from wielandt.inequalities import majorizes
from wielandt.perturbation import first_order_rates, rate_consistency_check


def test_rates_diagonal_example(diag_pair):
    A, B = diag_pair
    rates = first_order_rates(A, B)
    # cluster {e1}: compression [0]; cluster span(e2, e3): compression diag(2, 1)
    np.testing.assert_allclose(rates.nu, [0, 2, 1], atol=1e-15)
    assert rates.clusters.boundaries == (0, 1, 3)


def test_rates_distinct_spectrum_are_diagonal_of_b():
    A = random_hermitian(5, 0, spec=[5, 3, 2, 0, -1])
    B = random_hermitian(5, 1)
    rates = first_order_rates(A, B)
    U = eigh(A).vectors
    np.testing.assert_allclose(rates.nu, np.einsum("ij,ik,kj->j", U.conj(), B.array, U).real, atol=1e-12)


def test_rates_identity_gives_spectrum_of_b():
    B = random_hermitian(4, 5)
    rates = first_order_rates(HermitianMatrix(np.eye(4)), B)
    np.testing.assert_allclose(rates.nu, eigh(B).values, atol=1e-12)


def test_adapted_frame_realizes_rates():
    A = random_hermitian(6, 2, spec=[3, 3, 3, 1, 1, 0])
    B = random_hermitian(6, 3)
    rates = first_order_rates(A, B)
    U = rates.adapted_frame.vectors
    np.testing.assert_allclose(np.einsum("ij,ik,kj->j", U.conj(), B.array, U).real, rates.nu, atol=1e-12)
    res = A.array @ U - U * eigh(A).values
    assert np.abs(res).max() < 1e-12
    assert rates.adapted_frame.orthonormality_error() < 1e-12
    for sl in rates.clusters.slices():
        assert np.all(np.diff(rates.nu[sl]) <= 1e-15)


def test_rates_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        first_order_rates(diag(1, 2), diag(1, 2, 3))


def test_rate_consistency_examples(diag_pair):
    assert rate_consistency_check(*diag_pair, h=1e-5) <= 1e-4
    A = random_hermitian(4, 1)
    assert rate_consistency_check(A, HermitianMatrix(np.zeros((4, 4)))) == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_rate_consistency_random(seed):
    rng = np.random.default_rng(seed)
    assert rate_consistency_check(random_hermitian(6, rng), random_hermitian(6, rng), h=1e-5) <= 1e-3


def _pair(n, seed, degenerate):
    rng = np.random.default_rng(seed)
    if degenerate:
        spec = np.sort(rng.integers(0, 3, n).astype(float))[::-1]
        A = random_hermitian(n, rng, spec=spec)
    else:
        A = random_hermitian(n, rng)
    return A, random_hermitian(n, rng)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 7), seed=st.integers(0, 10_000), degenerate=st.booleans())
def test_rates_majorized_by_spectrum_of_b(n, seed, degenerate):
    A, B = _pair(n, seed, degenerate)
    rates = first_order_rates(A, B)
    res = majorizes(rates.nu, eigh(B).values, 1e-10)
    assert res.holds
    assert abs(rates.nu.sum() - B.trace()) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10_000), c=st.floats(0.1, 5.0))
def test_scale_and_shift(n, seed, c):
    A, B = _pair(n, seed, True)
    nu = first_order_rates(A, B).nu
    np.testing.assert_allclose(first_order_rates(A, B.plus(B, c - 1)).nu, c * nu, atol=1e-10 * c)
    neg = first_order_rates(A, B.plus(B, -c - 1)).nu
    for sl in first_order_rates(A, B).clusters.slices():
        np.testing.assert_allclose(np.sort(neg[sl]), np.sort(-c * nu[sl]), atol=1e-10 * c)
    shifted = A.plus(HermitianMatrix(np.eye(n)), c)
    np.testing.assert_allclose(first_order_rates(shifted, B).nu, nu, atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_commuting_pair_rates_are_eigenvalues_of_b_per_eigenspace(seed):
    rng = np.random.default_rng(seed)
    a = np.array([2.0, 2.0, 2.0, 1.0, 0.0, 0.0])
    b = rng.standard_normal(6)
    Q = random_unitary(6, rng)
    A = diag(*a).conjugate_by(Q)
    B = diag(*b).conjugate_by(Q)
    rates = first_order_rates(A, B)
    for sl, expected in zip(rates.clusters.slices(), (b[:3], b[3:4], b[4:])):
        np.testing.assert_allclose(rates.nu[sl], np.sort(expected)[::-1], atol=1e-12)
