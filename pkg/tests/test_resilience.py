import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from resilock import resilience as rc
from resilock.errors import (
    CombinatorialBudgetExceeded,
    DuplicateIndex,
    IndexOutOfRange,
    InvalidInput,
    NotOrthonormalRows,
    SingularGram,
)
from resilock.fixtures import ADMIRE_BBAR, SIGN_2X10


def brute_force_resilient(bbar, p):
    """Independent oracle: Cholesky of every F built column by column."""
    bbar = np.asarray(bbar, dtype=float)
    m = bbar.shape[1]
    for lost in itertools.combinations(range(m), p):
        kept = [j for j in range(m) if j not in lost]
        B, C = bbar[:, kept], bbar[:, list(lost)]
        try:
            np.linalg.cholesky(B @ B.T - C @ C.T)
        except np.linalg.LinAlgError:
            return False
    return True


def brute_force_degree(bbar):
    m = np.asarray(bbar).shape[1]
    deg = 0
    for p in range(1, m):
        if not brute_force_resilient(bbar, p):
            break
        deg = p
    return deg


def identity_d(n):
    return np.hstack([np.eye(n), np.eye(n), np.full((n, 1), 1 / math.sqrt(n))])


def test_control_matrix_validation():
    bbar = rc.ControlMatrix([[1.0, 2.0]])
    assert (bbar.n, bbar.m) == (1, 2)
    assert bbar.labels == ("u1", "u2")
    with pytest.raises(ValueError):
        bbar.entries[0, 0] = 3.0
    with pytest.raises(InvalidInput):
        rc.ControlMatrix([[1.0, 2.0]], ranges=[[0.0, 1.0], [1.0, 1.0]])
    with pytest.raises(InvalidInput):
        rc.ControlMatrix([[1.0, 2.0]], labels=("a",))
    with pytest.raises(InvalidInput):
        rc.ControlMatrix([[np.nan, 1.0]])


def test_loss_scenario_validation():
    assert rc.LossScenario.of([3, 1], 5).indices == (1, 3)
    with pytest.raises(DuplicateIndex):
        rc.LossScenario.of([1, 1], 5)
    with pytest.raises(IndexOutOfRange):
        rc.LossScenario.of([5], 5)
    with pytest.raises(IndexOutOfRange):
        rc.LossScenario.of([-1], 5)
    with pytest.raises(InvalidInput):
        rc.LossScenario.of([0, 1], 2)


def test_split_examples():
    bbar = np.hstack([np.eye(2), np.eye(2)])
    sys = rc.split(bbar, [2])
    assert np.array_equal(sys.B, bbar[:, [0, 1, 3]])
    assert np.array_equal(sys.C, bbar[:, [2]])
    admire = rc.split(ADMIRE_BBAR, [0])
    assert np.array_equal(admire.C[:, 0], [0.0, 1.653, 0.0])
    last = rc.split(ADMIRE_BBAR, [3])
    assert np.array_equal(last.C[:, 0], ADMIRE_BBAR[:, 3])


@given(st.integers(1, 4), st.integers(2, 9), st.data())
def test_split_reassembles(n, m, data):
    bbar = np.random.default_rng(n * 100 + m).normal(size=(n, m))
    p = data.draw(st.integers(1, m - 1))
    lost = data.draw(st.lists(st.integers(0, m - 1), min_size=p, max_size=p, unique=True))
    sys = rc.split(bbar, lost)
    assert np.array_equal(sys.reassemble(m), bbar)


def test_compute_F_examples():
    sys = rc.split(np.ones((1, 3)), [2])
    assert rc.compute_F(sys) == pytest.approx(np.array([[1.0]]))
    sys = rc.split(np.hstack([np.eye(2), np.eye(2)]), [0])
    assert np.allclose(rc.compute_F(sys), np.diag([0.0, 2.0]))
    F = rc.compute_F(rc.split(ADMIRE_BBAR, [0]))
    assert np.array_equal(F, F.T)


def test_is_loss_tolerable_admire():
    ok, lam = rc.is_loss_tolerable(rc.split(ADMIRE_BBAR, [0]))
    assert ok and lam == pytest.approx(0.51, abs=0.05)
    ok, lam = rc.is_loss_tolerable(rc.split(ADMIRE_BBAR, [1]))
    assert not ok and lam == pytest.approx(-8.5, abs=0.3)
    ok, lam = rc.is_loss_tolerable(rc.split(ADMIRE_BBAR, [3]))
    assert not ok and lam == pytest.approx(-1.0, abs=0.1)


def test_check_p_resilience_examples():
    assert rc.check_p_resilience(np.ones((1, 5)), 2).overall
    for n in range(1, 7):
        assert rc.check_p_resilience(identity_d(n), 1).overall
    assert not rc.check_p_resilience(np.hstack([np.eye(2), np.eye(2)]), 1).overall


def test_report_structure_and_order():
    report = rc.check_p_resilience(np.ones((1, 6)), 2)
    assert len(report.verdicts) == math.comb(6, 2)
    assert [v.scenario.indices for v in report.verdicts] == list(itertools.combinations(range(6), 2))
    assert report.overall == all(v.tolerable for v in report.verdicts)
    d = report.to_dict()
    assert d["combinations"] == 15
    assert d["verdicts"][0]["indices"] == [1, 2]


def test_indeterminate_band():
    # losing one of two equal columns gives F = 0 exactly
    report = rc.check_p_resilience(np.ones((1, 2)), 1)
    assert report.indeterminate
    assert not report.overall


def test_budget_cap():
    with pytest.raises(CombinatorialBudgetExceeded):
        rc.check_p_resilience(np.ones((1, 30)), 10, max_combinations=1000)
    with pytest.raises(InvalidInput):
        rc.check_p_resilience(np.ones((1, 3)), 3)


def test_parallel_matches_serial(monkeypatch):
    bbar = np.random.default_rng(3).normal(size=(3, 40))
    serial = rc.check_p_resilience(bbar, 3, workers=1)
    monkeypatch.setenv("RESILOCK_THREADS", "4")
    assert rc.worker_count() == 4
    parallel = rc.check_p_resilience(bbar, 3)
    assert [v.min_eig for v in serial.verdicts] == [v.min_eig for v in parallel.verdicts]
    monkeypatch.setenv("RESILOCK_THREADS", "junk")
    assert rc.worker_count() == 1


def test_degree_examples():
    assert rc.degree_of_resilience(np.ones((1, 5))) == 2
    assert rc.degree_of_resilience(identity_d(2)) == 1
    assert rc.degree_of_resilience(SIGN_2X10) == 2
    assert brute_force_degree(SIGN_2X10) == 2


def test_degree_matches_brute_force(rng):
    for _ in range(40):
        n = rng.integers(1, 4)
        m = rng.integers(n + 1, 4 * n + 4)
        bbar = rng.normal(size=(n, m))
        assert rc.degree_of_resilience(bbar) == brute_force_degree(bbar)


def test_monotonicity(rng):
    for _ in range(60):
        n = rng.integers(1, 3)
        bbar = rng.normal(size=(n, rng.integers(2 * n + 1, 4 * n + 6)))
        for p in range(2, min(bbar.shape[1], 5)):
            if rc.check_p_resilience(bbar, p).overall:
                assert rc.check_p_resilience(bbar, p - 1).overall


def test_necessity_of_overactuation(rng):
    for _ in range(500):
        n = rng.integers(1, 7)
        m = rng.integers(1, n + 1)
        if m < 2:
            continue
        assert not rc.check_p_resilience(rng.normal(size=(n, m)), 1).overall


def test_necessity_of_size(rng):
    for _ in range(500):
        n = rng.integers(1, 7)
        m = rng.integers(n + 1, 2 * n + 1)
        assert not rc.check_p_resilience(rng.normal(size=(n, m)), 1).overall


def test_gram_necessity(rng):
    hits = 0
    for _ in range(300):
        n = rng.integers(1, 4)
        bbar = rng.normal(size=(n, rng.integers(2 * n + 1, 6 * n + 2)))
        if rc.check_p_resilience(bbar, 1).overall:
            hits += 1
            assert np.linalg.eigvalsh(bbar @ bbar.T)[0] > 0
    assert hits > 20


def test_invariance_under_invertible_left_multiplication(rng):
    checked = 0
    while checked < 30:
        n = rng.integers(1, 5)
        m = rng.integers(2 * n + 1, 13)
        P = rng.normal(size=(n, n))
        if np.linalg.cond(P) > 1e3:
            continue
        bbar = rng.normal(size=(n, m))
        assert rc.degree_of_resilience(P @ bbar) == rc.degree_of_resilience(bbar)
        checked += 1


def test_svd_reduce(rng):
    V, valid = rc.svd_reduce(identity_d(3))
    assert valid
    assert np.allclose(V @ V.T, np.eye(3))
    assert rc.degree_of_resilience(V) == rc.degree_of_resilience(identity_d(3))
    assert rc.degree_of_resilience(5 * identity_d(3)) == rc.degree_of_resilience(identity_d(3))
    for _ in range(10):
        bbar = rng.normal(size=(3, 8))
        V, valid = rc.svd_reduce(bbar)
        assert valid
        assert rc.degree_of_resilience(V) == rc.degree_of_resilience(bbar)
    _, valid = rc.svd_reduce(np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]))
    assert not valid


def row_normalize(M):
    M = np.asarray(M, dtype=float)
    return M / np.linalg.norm(M, axis=1, keepdims=True)


def test_sigma_criterion_examples():
    V = row_normalize([[1] * 6, [1, 1, 1, -1, -1, -1]])
    assert rc.sigma_criterion(V, 1)
    V3 = row_normalize([[1] * 8, [1, 1, 1, 1, -1, -1, -1, -1], [1, 1, -1, -1, 1, 1, -1, -1]])
    assert rc.sigma_criterion(V3, 1)
    assert not rc.sigma_criterion(np.hstack([np.eye(2), np.zeros((2, 2))]), 1)
    with pytest.raises(NotOrthonormalRows):
        rc.sigma_criterion(2 * np.eye(2), 1)


def test_sigma_criterion_equivalence(rng):
    for _ in range(60):
        n = rng.integers(1, 5)
        m = rng.integers(n + 1, 15)
        _, _, V = np.linalg.svd(rng.normal(size=(n, m)), full_matrices=False)
        for p in range(1, min(4, m)):
            assert rc.sigma_criterion(V, p) == rc.check_p_resilience(V, p).overall


def test_size_identity(rng):
    for n in range(1, 5):
        bbar = rng.normal(size=(n, 2 * n))
        assert rc.verify_size_identity(bbar) <= 1e-6
        total = sum(np.linalg.det(rc.compute_F(rc.split(bbar, [i]))) for i in range(2 * n))
        assert abs(total) <= 1e-6 * (1 + abs(np.linalg.det(bbar @ bbar.T)) * 2 * n)
    assert rc.verify_size_identity(identity_d(3)) <= 1e-6
    assert rc.verify_size_identity(rng.normal(size=(2, 7))) <= 1e-6
    with pytest.raises(SingularGram):
        rc.verify_size_identity(np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]))
