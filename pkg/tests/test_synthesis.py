import math

import numpy as np
import pytest

from resilock import synthesis as syn
from resilock.errors import InvalidInput, LambdaAtLeastOne, NotWellDefined, SingularGram, ZeroDistance
from resilock.fixtures import ADMIRE_A, ADMIRE_BBAR, ADMIRE_X0
from resilock.generators import gen_identity_stack
from resilock.resilience import compute_F, is_loss_tolerable, split, split_system

CANARD = split(ADMIRE_BBAR, [0])


def test_lambda_M_admire():
    assert syn.compute_lambda_M(CANARD) == pytest.approx(0.8426, abs=1e-3)


def test_lambda_M_below_one_iff_F_positive(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(2 * n + 1, 4 * n + 3))
        sys = split(rng.normal(size=(n, m)), [int(rng.integers(m))])
        lam = syn.compute_lambda_M(sys)
        ok, eig = is_loss_tolerable(sys)
        if abs(eig) > 1e-8:
            assert (lam < 1) == ok


def test_lambda_M_without_loss():
    sys = split_system(np.eye(2), np.zeros((2, 0)))
    assert syn.compute_lambda_M(sys) == 0.0


def test_alpha_star_admire():
    gains = syn.compute_gains(CANARD, ADMIRE_X0, np.zeros(3))
    assert gains.alpha_star == pytest.approx(0.0343, abs=1e-3)
    assert gains.alpha == gains.alpha_star
    assert np.array_equal(gains.d, ADMIRE_X0)


def test_alpha_star_is_the_root_of_the_admissibility_condition(rng):
    for _ in range(50):
        sys = split(gen_identity_stack(2, 1).entries + 0.05 * rng.normal(size=(2, 5)), [int(rng.integers(5))])
        if not is_loss_tolerable(sys)[0]:
            continue
        d = rng.normal(size=2)
        P = syn.gram_inverse(sys)
        lam = syn.compute_lambda_M(sys)
        a, b = syn.admissibility_terms(P, sys.C, d)
        alpha = syn.compute_alpha_star(P, sys.C, d, lam)
        assert syn.admissibility_slack(alpha, a, b, lam) == pytest.approx(0.0, abs=1e-10)
        assert syn.admissibility_slack(0.9 * alpha, a, b, lam) < 0
        assert syn.admissibility_slack(1.1 * alpha, a, b, lam) > 0


def test_alpha_star_scalar_closed_form():
    # B = [1 1], C = [1]: P = 1/2, lambda = 1/2, a = d^2/2, b = |d|/2
    sys = split_system([[1.0, 1.0]], [[1.0]])
    P = syn.gram_inverse(sys)
    alpha = syn.compute_alpha_star(P, sys.C, [2.0], syn.compute_lambda_M(sys))
    a, b = 2.0, 1.0
    assert alpha == pytest.approx(2 * (math.sqrt(b * b + 0.5 * a) - b) ** 2 / a**2)


def test_errors():
    sys = split_system([[1.0]], [[1.0]])
    with pytest.raises(LambdaAtLeastOne):
        syn.compute_alpha_star(syn.gram_inverse(sys), sys.C, [1.0], 1.0)
    with pytest.raises(ZeroDistance):
        syn.compute_alpha_star(np.eye(1), [[0.5]], [0.0], 0.25)
    rudder = split(ADMIRE_BBAR, [3])
    with pytest.raises(SingularGram):
        syn.gram_inverse(rudder)
    with pytest.raises(NotWellDefined):
        syn.compute_gains(rudder, ADMIRE_X0, np.zeros(3))
    with pytest.raises(InvalidInput):
        syn.compute_gains(CANARD, ADMIRE_X0, np.zeros(3), alpha=-1.0)


def test_zero_distance_gains():
    gains = syn.compute_gains(CANARD, np.zeros(3), np.zeros(3))
    assert math.isinf(gains.alpha_star) and gains.alpha == 1.0
    assert gains.to_dict()["alpha_star"] is None


def test_controller_cancels_disturbance(rng):
    ctrl = syn.make_controller(CANARD, ADMIRE_X0, np.zeros(3))
    for _ in range(10):
        x = rng.normal(size=3)
        w = rng.normal(size=1)
        u = ctrl(x, w)
        xdot = CANARD.B @ u + CANARD.C @ w
        assert np.allclose(xdot, ctrl.gains.alpha * (0 - x), atol=1e-12)
    X = rng.normal(size=(4, 3))
    W = rng.normal(size=(4, 1))
    assert np.allclose(ctrl(X, W), np.stack([ctrl(x, w) for x, w in zip(X, W)]))


def test_controller_saturation():
    limits = np.array([[-0.1, 0.1]] * 3)
    ctrl = syn.make_controller(CANARD, ADMIRE_X0, np.zeros(3), saturation=limits)
    u = ctrl(100 * ADMIRE_X0, [1.0])
    assert np.all(np.abs(u) <= 0.1)
    assert syn.control_input(ctrl, ADMIRE_X0, [0.0]).shape == (3,)


def test_drift_conditions():
    gains = syn.compute_gains(CANARD, ADMIRE_X0, np.zeros(3))
    assert syn.check_drift_condition(ADMIRE_A, gains)
    assert not syn.check_drift_condition(np.eye(3), gains)
    assert syn.is_resilient_with_drift(ADMIRE_A, gen_identity_stack(3, 1), 1) is syn.DriftVerdict.YES
    assert syn.is_resilient_with_drift(ADMIRE_A, ADMIRE_BBAR, 1) is syn.DriftVerdict.UNKNOWN
    assert syn.is_resilient_with_drift(np.eye(3), gen_identity_stack(3, 1), 1) is syn.DriftVerdict.UNKNOWN


def test_lambda_M_scalar():
    assert syn.compute_lambda_M(split_system([[1.0, 1.0]], [[1.0]])) == pytest.approx(0.5)


def test_alpha_star_without_cancellation_term():
    # b = 0 and lambda_M = 0 reduce the condition to alpha a / 2 <= 1
    P = np.diag([2.0, 3.0])
    d = np.array([1.0, 1.0])
    a = d @ P @ d
    assert syn.compute_alpha_star(P, np.zeros((2, 1)), d, 0.0) == pytest.approx(2.0 / a)


def _bisect_boundary(a, b, lam):
    # root of r^2 a / 2 + sqrt(2) r b - (1 - lam) in r = sqrt(alpha)
    lo, hi = 0.0, 1.0
    while 0.5 * hi * hi * a + math.sqrt(2) * hi * b < 1 - lam:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * mid * mid * a + math.sqrt(2) * mid * b < 1 - lam:
            lo = mid
        else:
            hi = mid
    return hi * hi


def test_alpha_star_matches_bisection_oracle(rng):
    for _ in range(100):
        n, p = int(rng.integers(1, 5)), int(rng.integers(1, 3))
        G = rng.normal(size=(n, n))
        P = G @ G.T + 0.1 * np.eye(n)
        C = rng.normal(size=(n, p))
        d = rng.normal(size=n)
        lam = float(rng.uniform(0, 0.99))
        a, b = syn.admissibility_terms(P, C, d)
        alpha = syn.compute_alpha_star(P, C, d, lam)
        assert alpha == pytest.approx(_bisect_boundary(a, b, lam), rel=1e-8)
        assert abs(syn.admissibility_slack(alpha, a, b, lam)) <= 1e-9
        assert syn.admissibility_slack(1.01 * alpha, a, b, lam) > 0


def test_control_input_at_goal_is_zero():
    ctrl = syn.make_controller(CANARD, ADMIRE_X0, np.zeros(3))
    assert np.allclose(ctrl(np.zeros(3), [0.0]), 0.0)


def test_driftless_cancellation_residual(rng):
    ctrl = syn.make_controller(CANARD, ADMIRE_X0, np.zeros(3))
    for _ in range(50):
        x, w = rng.normal(size=3) * 10, rng.normal(size=1)
        xdot = CANARD.B @ ctrl(x, w) + CANARD.C @ w
        resid = np.linalg.norm(xdot - ctrl.gains.alpha * (-x))
        assert resid <= 1e-10 * (np.linalg.norm(w) + np.linalg.norm(x))
