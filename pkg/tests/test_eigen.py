import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptkitaev import eigen
from ptkitaev.analytic import spectral_distance
from ptkitaev.errors import ConsistencyError, ParameterError, SolverError
from ptkitaev.model import ChainParams, build_hk


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_decomposition_invariants(n, seed):
    h = random_matrix(np.random.default_rng(seed), n)
    es = eigen.eigendecompose(h)
    assert es.max_residual <= 1e-8
    np.testing.assert_allclose(np.linalg.norm(es.vectors, axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(es.values.sum(), np.trace(h), atol=1e-9 * n)
    np.testing.assert_allclose(np.prod(es.values), np.linalg.det(h), rtol=1e-8)
    key = np.lexsort((es.values.imag, es.values.real))
    np.testing.assert_array_equal(key, np.arange(n))


@pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
def test_qr_route_matches_lapack(n):
    h = random_matrix(np.random.default_rng(n), n)
    qr = eigen.eigendecompose(h, method="qr")
    lp = eigen.eigendecompose(h)
    assert qr.max_residual <= 1e-10
    assert spectral_distance(qr.values, lp.values) < 1e-9


def test_similarity_invariance():
    rng = np.random.default_rng(3)
    h = random_matrix(rng, 12)
    s = np.eye(12) + 0.1 * random_matrix(rng, 12)
    moved = np.linalg.solve(s, h @ s)
    assert spectral_distance(eigen.eigenvalues(h), eigen.eigenvalues(moved)) < 1e-9


def test_real_matrix_conjugate_closed():
    h = np.random.default_rng(5).normal(size=(15, 15))
    values = eigen.eigendecompose(h).values
    assert spectral_distance(values, values.conj()) < 1e-10


def test_balance_is_diagonal_similarity():
    rng = np.random.default_rng(1)
    a = random_matrix(rng, 8) * np.logspace(-6, 6, 8)[:, None]
    b, d = eigen.balance(a)
    np.testing.assert_allclose(b, a * d[None, :] / d[:, None])
    assert np.all(np.log2(d) == np.round(np.log2(d)))


def test_hessenberg_form():
    a = random_matrix(np.random.default_rng(2), 9)
    h, q = eigen.hessenberg(a)
    np.testing.assert_allclose(np.tril(h, -2), 0.0, atol=1e-14)
    np.testing.assert_allclose(q @ h @ q.conj().T, a, atol=1e-12)


def test_schur_budget_exhaustion_reports_state():
    h, _ = eigen.hessenberg(random_matrix(np.random.default_rng(4), 10))
    with pytest.raises(SolverError) as info:
        eigen.schur(h, max_iter=1)
    assert "schur" in info.value.state


def test_residual_gate():
    h = random_matrix(np.random.default_rng(6), 6)
    with pytest.raises(SolverError):
        eigen.eigendecompose(h, tol=1e-30)


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]]), np.ones(4)])
def test_rejects_bad_input(bad):
    with pytest.raises(ParameterError):
        eigen.eigendecompose(bad)


def test_unknown_method():
    with pytest.raises(ParameterError):
        eigen.eigenvalues(np.eye(2), method="magic")


def test_qr_at_third_order_ep():
    # N=8, delta=J, gamma=2J hosts a third-order exceptional point
    h = build_hk(ChainParams(8, sc_order=1.0, gain_loss=2.0))
    es = eigen.eigendecompose(h, method="qr")
    assert es.max_residual <= 1e-8


def test_classify_spectrum_counts():
    values = np.array([1.0, -1.0, 0.5 + 0.2j, 0.5 - 0.2j, -2 + 1j, -2 - 1j])
    cls = eigen.classify_spectrum(values)
    assert (cls.real_count, cls.pair_count) == (2, 2)
    assert cls.max_imag == 1.0


def test_classify_spectrum_unpaired_raises():
    with pytest.raises(ConsistencyError):
        eigen.classify_spectrum(np.array([1.0 + 0.5j, 2.0]))


def test_classify_absorbs_ep_splitting():
    # cube-root splitting of a perturbed EP3 can leave one value without a partner
    values = np.array([1e-6j, 1.0 + 1e-7, 1.0 - 1e-7, 3.0])
    cls = eigen.classify_spectrum(values, eps=1e-8)
    assert cls.real_count == 4 and cls.pair_count == 0
