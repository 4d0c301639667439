"""Resilient feedback law and its gain selection.

The law

    u = B^T (B B^T)^-1 (-C w + alpha (x_goal - x))

cancels the measured undesirable input and leaves ``x' = alpha (x_goal - x)``
in the driftless case. ``alpha_star`` is the largest gain for which the
control energy provably stays within the unit L2 ball.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInput, LambdaAtLeastOne, NotWellDefined, SingularGram, ZeroDistance
from .linalg import DEFAULT_TOL, Tolerance
from .resilience import SplitSystem, check_p_resilience, compute_F


def gram_inverse(sys: SplitSystem) -> np.ndarray:
    """``P = (B B^T)^-1``; raises when ``B B^T`` is singular."""
    G = sys.B @ sys.B.T
    if not linalg.is_positive_definite(G):
        raise SingularGram("B B^T is not invertible")
    return linalg.solve_spd(G, np.eye(sys.n))


def compute_lambda_M(sys: SplitSystem) -> float:
    """Largest eigenvalue of ``C^T (B B^T)^-1 C`` (0 when nothing is lost)."""
    if sys.C.shape[1] == 0:
        return 0.0
    M = sys.C.T @ gram_inverse(sys) @ sys.C
    lam = float(linalg.sym_eigenvalues(0.5 * (M + M.T))[-1])
    if linalg.is_positive_definite(compute_F(sys)):
        assert lam < 1.0, "lambda_M must be below 1 when F is positive definite"
    return lam


def admissibility_terms(P, C, d) -> tuple[float, float]:
    """``a = d^T P d`` and ``b = ||C^T P d||``."""
    d = np.asarray(d, dtype=float)
    Pd = P @ d
    return float(d @ Pd), float(np.linalg.norm(np.asarray(C).T @ Pd))


def admissibility_slack(alpha: float, a: float, b: float, lambda_M: float) -> float:
    """``alpha/2 a + sqrt(2 alpha) b - (1 - lambda_M)``; nonpositive when admissible."""
    return 0.5 * alpha * a + math.sqrt(2.0 * alpha) * b - (1.0 - lambda_M)


def compute_alpha_star(P, C, d, lambda_M: float) -> float:
    """Largest admissible gain, in closed form."""
    if lambda_M >= 1.0:
        raise LambdaAtLeastOne(f"lambda_M = {lambda_M:.6g} >= 1")
    a, b = admissibility_terms(P, C, d)
    if a <= 0.0 or not np.any(np.asarray(d)):
        raise ZeroDistance("d = 0: the state already sits at the goal")
    return 2.0 * (math.sqrt(b * b + (1.0 - lambda_M) * a) - b) ** 2 / (a * a)


@dataclass(frozen=True)
class SynthesisGains:
    """Gains of the resilient law.

    Attributes:
        P: ``(B B^T)^-1``.
        lambda_M: largest eigenvalue of ``C^T P C``.
        alpha_star: largest admissible gain (``inf`` when ``d = 0``).
        alpha: gain actually used.
        d: ``x0 - x_goal``; only its quadratic forms enter the gains.
    """

    P: np.ndarray
    lambda_M: float
    alpha_star: float
    alpha: float
    d: np.ndarray

    def to_dict(self) -> dict:
        return {
            "P": self.P.tolist(),
            "lambda_M": self.lambda_M,
            "alpha_star": self.alpha_star if math.isfinite(self.alpha_star) else None,
            "alpha": self.alpha,
            "d": self.d.tolist(),
        }


def compute_gains(sys: SplitSystem, x0, x_goal, alpha: float | None = None) -> SynthesisGains:
    """Gains for a start/goal pair; ``alpha`` defaults to ``alpha_star``.

    With ``x0 == x_goal`` any positive gain is admissible and ``alpha``
    defaults to 1.
    """
    try:
        P = gram_inverse(sys)
    except SingularGram as exc:
        raise NotWellDefined("B B^T is not invertible; the resilient law is not defined") from exc
    d = np.asarray(x0, dtype=float) - np.asarray(x_goal, dtype=float)
    lam = compute_lambda_M(sys)
    if not np.any(d):
        alpha_star = math.inf
        chosen = 1.0 if alpha is None else alpha
    else:
        alpha_star = compute_alpha_star(P, sys.C, d, lam)
        chosen = alpha_star if alpha is None else alpha
    if not chosen > 0:
        raise InvalidInput("alpha must be positive")
    return SynthesisGains(P, lam, alpha_star, float(chosen), d)


@dataclass(frozen=True)
class ResilientController:
    """State feedback that cancels the measured undesirable input.

    ``saturation`` is an optional (m - p) x 2 array of per-channel bounds
    applied after the law.
    """

    sys: SplitSystem
    gains: SynthesisGains
    x_goal: np.ndarray
    saturation: np.ndarray | None = None

    def unsaturated(self, x, w) -> np.ndarray:
        """Accepts single states or row-stacked batches of them."""
        w = np.asarray(w, dtype=float)
        if w.ndim == 0:
            w = w.reshape(1)
        v = -w @ self.sys.C.T + self.gains.alpha * (self.x_goal - np.asarray(x, dtype=float))
        return v @ (self.gains.P @ self.sys.B)

    def __call__(self, x, w) -> np.ndarray:
        u = self.unsaturated(x, w)
        if self.saturation is not None:
            u = np.clip(u, self.saturation[:, 0], self.saturation[:, 1])
        return u


def control_input(ctrl: ResilientController, x, w) -> np.ndarray:
    return ctrl(x, w)


def make_controller(sys: SplitSystem, x0, x_goal, alpha=None, saturation=None) -> ResilientController:
    gains = compute_gains(sys, x0, x_goal, alpha)
    sat = None if saturation is None else np.asarray(saturation, dtype=float)
    return ResilientController(sys, gains, np.asarray(x_goal, dtype=float), sat)


def check_drift_condition(A, gains: SynthesisGains, margin: float = 1e-12) -> bool:
    """Whether the drift is slow enough for the law to converge."""
    return linalg.spectral_abscissa(A) < gains.alpha_star - margin


class DriftVerdict(str, enum.Enum):
    YES = "Yes"
    UNKNOWN = "Unknown"


def is_resilient_with_drift(A, bbar, p: int, tol: Tolerance = DEFAULT_TOL, margin: float = 1e-12) -> DriftVerdict:
    """Sufficient test: Hurwitz drift plus a p-resilient control matrix.

    A negative answer is never given since the condition is only sufficient.
    """
    if linalg.spectral_abscissa(A) < -margin and check_p_resilience(bbar, p, tol).overall:
        return DriftVerdict.YES
    return DriftVerdict.UNKNOWN
