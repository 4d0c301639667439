import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from resilock import linalg
from resilock.errors import InvalidInput, NotPositiveDefinite, NotPositiveSemidefinite, RiccatiFailure
from resilock.fixtures import ADMIRE_A, ADMIRE_BBAR, ADMIRE_LQR_K
from resilock.linalg import Tolerance

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def sym_matrices(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(float, (n, n), elements=finite).map(lambda M: 0.5 * (M + M.T))
    )


def test_tolerance_defaults_and_validation():
    tol = Tolerance()
    assert (tol.pd_eps, tol.eig_eps, tol.ode_step) == (1e-9, 1e-10, 1e-3)
    with pytest.raises(InvalidInput):
        Tolerance(pd_eps=0.0)
    with pytest.raises(InvalidInput):
        Tolerance(ode_step=-1.0)


def test_as_symmetric_rejects_asymmetric():
    with pytest.raises(InvalidInput):
        linalg.as_symmetric([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InvalidInput):
        linalg.as_symmetric(np.ones((2, 3)))
    # tiny asymmetry within the relative bound is accepted and removed
    M = linalg.as_symmetric([[1.0, 2.0 + 1e-14], [2.0, 1.0]])
    assert np.array_equal(M, M.T)


def test_sym_eigenvalues_examples():
    assert np.allclose(linalg.sym_eigenvalues(np.eye(2)), [1, 1])
    assert np.allclose(linalg.sym_eigenvalues(np.diag([3.0, -1.0])), [-1, 3])


@given(sym_matrices())
def test_eigen_reconstruction_and_trace(M):
    lam, V = linalg.sym_eigh(M)
    scale = 1.0 + np.linalg.norm(M)
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm(M - (V * lam) @ V.T) <= 1e-8 * scale
    assert abs(lam.sum() - np.trace(M)) <= 1e-8 * scale


def test_positive_definite_examples():
    assert linalg.is_positive_definite(np.eye(3))
    assert not linalg.is_positive_definite(np.zeros((2, 2)))
    C = ADMIRE_BBAR[:, [3]]
    B = ADMIRE_BBAR[:, :3]
    assert not linalg.is_positive_definite(B @ B.T - C @ C.T)


def test_positive_definite_agrees_with_cholesky(rng):
    checked = 0
    for _ in range(1000):
        n = rng.integers(1, 6)
        G = rng.normal(size=(n, n))
        M = 0.5 * (G + G.T)
        lam = np.linalg.eigvalsh(M)[0]
        if abs(lam) < 1e-6:
            continue
        try:
            np.linalg.cholesky(M)
            chol = True
        except np.linalg.LinAlgError:
            chol = False
        assert linalg.is_positive_definite(M) == chol
        checked += 1
    assert checked > 900


def test_compact_svd_examples():
    _, D, _ = linalg.compact_svd(np.hstack([np.eye(2), np.zeros((2, 1))]))
    assert np.allclose(D, [1, 1])
    _, D, _ = linalg.compact_svd(np.hstack([np.eye(3), np.eye(3)]))
    assert np.allclose(D, np.sqrt(2))
    with pytest.raises(InvalidInput):
        linalg.compact_svd(np.ones((3, 2)))


@given(st.integers(1, 8), st.integers(0, 32), st.integers(0, 2**31 - 1))
def test_compact_svd_properties(n, extra, seed):
    M = np.random.default_rng(seed).normal(size=(n, n + extra))
    U, D, V = linalg.compact_svd(M)
    assert np.linalg.norm(M - U @ np.diag(D) @ V) <= 1e-8 * (1 + np.linalg.norm(M))
    assert np.allclose(V @ V.T, np.eye(n), atol=1e-10)
    assert np.all(D >= 0)


def _power_iteration(M, iters=2000):
    x = np.ones(M.shape[1])
    for _ in range(iters):
        x = M.T @ (M @ x)
        x /= np.linalg.norm(x)
    return np.linalg.norm(M @ x)


def test_max_singular_value(rng):
    c = rng.normal(size=(4, 1))
    assert linalg.max_singular_value(c) == pytest.approx(np.linalg.norm(c), abs=1e-12)
    assert linalg.max_singular_value(np.eye(2)) == pytest.approx(1.0)
    for _ in range(10):
        M = rng.normal(size=(4, 2))
        assert linalg.max_singular_value(M) == pytest.approx(_power_iteration(M), abs=1e-8)
        assert linalg.max_singular_value(M) == pytest.approx(np.sqrt(np.linalg.eigvalsh(M.T @ M)[-1]), abs=1e-9)


def test_solve_spd():
    assert np.allclose(linalg.solve_spd(np.eye(3), [1, 0, 0]), [1, 0, 0])
    assert np.allclose(linalg.solve_spd(np.diag([2.0, 4.0]), [2.0, 4.0]), [1, 1])
    with pytest.raises(NotPositiveDefinite):
        linalg.solve_spd(np.diag([1.0, -1.0]), [1.0, 1.0])


def test_solve_spd_residual(rng):
    G = rng.normal(size=(5, 5))
    M = G @ G.T + np.eye(5)
    rhs = rng.normal(size=(5, 3))
    X = linalg.solve_spd(M, rhs)
    assert np.linalg.norm(M @ X - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))


def test_spd_sqrt(rng):
    assert np.allclose(linalg.spd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(linalg.spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    G = rng.normal(size=(4, 4))
    M = G @ G.T
    R = linalg.spd_sqrt(M)
    assert np.linalg.norm(R @ R - M) <= 1e-7 * (1 + np.linalg.norm(M))
    # slightly indefinite input within eig_eps is clipped
    assert np.allclose(linalg.spd_sqrt(np.diag([1.0, -5e-11])), np.diag([1.0, 0.0]))
    with pytest.raises(NotPositiveSemidefinite):
        linalg.spd_sqrt(np.diag([1.0, -1e-6]))


def test_care_scalar_closed_form():
    X = linalg.care_solve([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
    assert X[0, 0] == pytest.approx(np.sqrt(2) - 1, abs=1e-12)
    K = linalg.care_lqr_gain([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
    assert K[0, 0] == pytest.approx(np.sqrt(2) - 1, abs=1e-12)


def test_care_matches_scipy_and_residual(rng):
    for _ in range(10):
        A = rng.normal(size=(2, 2)) - 2 * np.eye(2)
        B = rng.normal(size=(2, 1))
        Q, R = np.eye(2), np.eye(1)
        X = linalg.care_solve(A, B, Q, R)
        res = A.T @ X + X @ A - X @ B @ np.linalg.solve(R, B.T) @ X + Q
        assert np.linalg.norm(res) <= 1e-6
        assert np.allclose(X, scipy.linalg.solve_continuous_are(A, B, Q, R), atol=1e-8)


def test_care_admire_gain_matches_printed():
    B = ADMIRE_BBAR[:, 1:]
    K = linalg.care_lqr_gain(ADMIRE_A, B, np.eye(3), np.eye(3))
    assert np.max(np.abs(K - ADMIRE_LQR_K)) <= 1e-3
    assert linalg.spectral_abscissa(ADMIRE_A - B @ K) < 0


def test_care_unstabilizable_raises():
    # unstable mode the input cannot reach
    A = np.diag([1.0, -1.0])
    B = np.array([[0.0], [1.0]])
    with pytest.raises(RiccatiFailure):
        linalg.care_solve(A, B, np.eye(2), np.eye(1))
