"""Robust-control baseline: internal ellipsoidal approximation of the
closed-loop reach set and the smallest target radius it guarantees.

Ellipsoids are written ``E(c, S) = {x : (x - c)^T S (x - c) <= 1}``. Input
and disturbance sets are built from actuator ranges; the shape matrix
``X`` of the internal approximation evolves as

    X' = A X + X A^T + 2 c1 X + 2 mu c2 X - pi X - C Q C^T / sqrt(pi)

with ``l(t) = exp(A^T t) l``, ``c1 = sqrt(l^T B P B^T l / l^T X l)``,
``c2 = |l| / sqrt(l^T X l)`` and ``pi = sqrt(l^T C Q C^T l)``. Each
``sqrt(X) S(t)`` product in the matrix form reduces to a scalar multiple
of ``X``. The ``normalized`` variant instead uses
``pi = sqrt(l^T C Q C^T l / l^T X l)`` and divides the last term by
``pi``, the tight form usually found in the ellipsoidal calculus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import fixtures, linalg
from .errors import DegenerateRange, InvalidInput, NoFeasibleMu, NotUnitVector, NumericalFailure, PiSingular

PI_MIN = 1e-8
DEFAULT_X0_SCALE = 1e-6
ROBUST_DT = 1e-2


@dataclass(frozen=True)
class Ellipsoid:
    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        S = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if S.shape != (c.size, c.size):
            raise InvalidInput(f"shape must be {c.size}x{c.size}, got {S.shape}")
        S = linalg.as_symmetric(S)
        if not linalg.is_positive_definite(S):
            raise InvalidInput("ellipsoid shape must be positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", S)

    def contains(self, x) -> bool:
        v = np.asarray(x, dtype=float) - self.center
        return float(v @ self.shape @ v) <= 1.0


def _span(lo, hi) -> float:
    if not hi > lo:
        raise DegenerateRange(f"degenerate range [{lo}, {hi}]")
    return hi - lo


def build_disturbance_ellipsoid(rng) -> Ellipsoid:
    """Interval ``[w_min, w_max]`` as ``E(w_c, Q)`` with ``Q = 4 / span^2``."""
    lo, hi = (float(v) for v in rng)
    span = _span(lo, hi)
    return Ellipsoid([0.5 * (lo + hi)], [[4.0 / span**2]])


def build_control_ellipsoid(ranges, Q_scalar: float) -> Ellipsoid:
    """Diagonal control ellipsoid with ``P_ii = min(4 / span_i^2, Q)``."""
    ranges = np.atleast_2d(np.asarray(ranges, dtype=float))
    diag = [min(4.0 / _span(lo, hi) ** 2, Q_scalar) for lo, hi in ranges]
    return Ellipsoid(ranges.mean(axis=1), np.diag(diag))


@dataclass(frozen=True)
class RobustProblem:
    """Plant ``x' = A x + B u + C w`` with ``u`` in ``control`` and ``w`` in ``disturbance``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    control: Ellipsoid
    disturbance: Ellipsoid

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, -1)
        C = np.asarray(self.C, dtype=float).reshape(n, -1)
        if B.shape[1] != self.control.center.size or C.shape[1] != self.disturbance.center.size:
            raise InvalidInput("ellipsoid dimensions do not match B and C")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def BPB(self) -> np.ndarray:
        return self.B @ self.control.shape @ self.B.T

    @property
    def CQC(self) -> np.ndarray:
        return self.C @ self.disturbance.shape @ self.C.T


@dataclass
class RobustRun:
    """One integration of the internal approximation.

    Attributes:
        l: unit direction parameterizing the approximation.
        mu: candidate radius.
        times: grid reached before termination.
        x_minus: center trajectory.
        X_minus: shape trajectory (``None`` unless stored).
        eig_min: smallest eigenvalue of ``X`` on the grid.
        feasible: ``X`` stayed positive definite up to the horizon.
        pi_regularized: ``pi`` was clamped to ``PI_MIN`` at least once.
    """

    l: np.ndarray
    mu: float
    times: np.ndarray
    x_minus: np.ndarray
    X_minus: np.ndarray | None
    eig_min: np.ndarray
    feasible: bool
    pi_regularized: bool = False

    def to_csv(self) -> str:
        lines = ["t,eig_min"]
        lines += [f"{t!r},{e!r}" for t, e in zip(self.times.tolist(), self.eig_min.tolist())]
        return "\n".join(lines) + "\n"


def _directions(A, l, times) -> np.ndarray:
    # l(t) = exp(A^T t) l on a uniform grid, by repeated multiplication
    dt = times[1] - times[0] if len(times) > 1 else 0.0
    step = scipy.linalg.expm(A.T * dt)
    out = np.empty((len(times), l.size))
    out[0] = l
    for k in range(1, len(times)):
        out[k] = step @ out[k - 1]
    return out


def integrate_internal_approx(
    prob: RobustProblem,
    l,
    mu: float,
    x0,
    X0=None,
    T: float = 25.0,
    dt: float = ROBUST_DT,
    regularize: bool = True,
    variant: str = "printed",
    store: bool = False,
) -> RobustRun:
    """RK4 integration of the center and shape dynamics up to ``T``.

    The run stops early once ``X`` loses positive definiteness or becomes
    non-finite; such runs are infeasible.

    Raises:
        PiSingular: ``pi`` fell below ``PI_MIN`` with ``regularize=False``.
    """
    if variant not in ("printed", "normalized"):
        raise InvalidInput(f"unknown variant {variant!r}")
    l = np.asarray(l, dtype=float)
    if abs(np.linalg.norm(l) - 1.0) > 1e-9:
        raise NotUnitVector("l must have unit norm")
    n = prob.n
    X = DEFAULT_X0_SCALE * np.eye(n) if X0 is None else linalg.as_symmetric(np.asarray(X0, dtype=float))
    if not linalg.is_positive_definite(X):
        raise InvalidInput("X0 must be positive definite")
    steps = int(round(T / dt))
    half = 0.5 * dt * np.arange(2 * steps + 1)
    ls = _directions(prob.A, l, half)
    A, BPB, CQC = prob.A, prob.BPB, prob.CQC
    drift = prob.B @ prob.control.center + prob.C @ prob.disturbance.center
    flags = {"reg": False}

    def rhs(X, lt):
        lxl = float(lt @ X @ lt)
        if not lxl > 0:
            raise FloatingPointError
        q = float(lt @ CQC @ lt)
        if variant == "printed":
            pi = math.sqrt(max(q, 0.0))
        else:
            pi = math.sqrt(max(q, 0.0) / lxl)
        if pi < PI_MIN:
            if not regularize:
                raise PiSingular(f"pi = {pi:.3g} below {PI_MIN}")
            flags["reg"] = True
            pi = PI_MIN
        c1 = math.sqrt(max(float(lt @ BPB @ lt), 0.0) / lxl)
        c2 = float(np.linalg.norm(lt)) / math.sqrt(lxl)
        shrink = CQC / (math.sqrt(pi) if variant == "printed" else pi)
        return A @ X + X @ A.T + (2.0 * c1 + 2.0 * mu * c2 - pi) * X - shrink

    x = np.asarray(x0, dtype=float).copy()
    xs, eigs, Xs, times = [x.copy()], [linalg.sym_eigenvalues(X)[0]], [X.copy()], [0.0]
    Ad = scipy.linalg.expm(np.block([[A, drift[:, None]], [np.zeros((1, n + 1))]]) * dt)
    feasible = True
    with np.errstate(all="raise"):
        for k in range(steps):
            la, lm, lb = ls[2 * k], ls[2 * k + 1], ls[2 * k + 2]
            try:
                k1 = rhs(X, la)
                k2 = rhs(X + 0.5 * dt * k1, lm)
                k3 = rhs(X + 0.5 * dt * k2, lm)
                k4 = rhs(X + dt * k3, lb)
                X = X + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                X = 0.5 * (X + X.T)
            except FloatingPointError:
                feasible = False
                break
            if not np.all(np.isfinite(X)):
                feasible = False
                break
            x = Ad[:n, :n] @ x + Ad[:n, n]
            lam = linalg.sym_eigenvalues(X)[0]
            times.append((k + 1) * dt)
            xs.append(x.copy())
            eigs.append(lam)
            if store:
                Xs.append(X.copy())
            if not lam > 0:
                feasible = False
                break
    return RobustRun(
        l=l,
        mu=float(mu),
        times=np.array(times),
        x_minus=np.array(xs),
        X_minus=np.array(Xs) if store else None,
        eig_min=np.array(eigs),
        feasible=feasible,
        pi_regularized=flags["reg"],
    )


@dataclass
class RadiusResult:
    mu: float
    l: np.ndarray
    per_direction: dict = field(default_factory=dict)
    variant: str = "printed"

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "l": self.l.tolist(),
            "variant": self.variant,
            "per_direction": {k: v for k, v in self.per_direction.items()},
        }


def _feasible(prob, l, mu, x0, X0, T, dt, variant) -> bool:
    return integrate_internal_approx(prob, l, mu, x0, X0, T, dt, variant=variant).feasible


def smallest_mu(prob, l, x0, X0=None, T=25.0, dt=ROBUST_DT, variant="printed",
                mu_max: float = 1e6, mu_floor: float = 1e-3, rtol: float = 1e-2,
                probes: int = 7) -> float | None:
    """Smallest feasible radius along one direction, or ``None`` if ``mu_max`` fails.

    A coarse log-spaced sweep first checks that feasibility is monotone in
    ``mu``; geometric bisection then refines the bracket to ``rtol``.
    Results below ``mu_floor`` are reported as 0.

    Raises:
        NumericalFailure: feasibility is not monotone on the sweep.
    """
    grid = np.geomspace(mu_floor, mu_max, probes)
    ok = [_feasible(prob, l, m, x0, X0, T, dt, variant) for m in grid]
    if not ok[-1]:
        return None
    first = ok.index(True)
    if not all(ok[first:]):
        raise NumericalFailure(f"feasibility is not monotone in mu along l = {np.round(l, 6).tolist()}")
    if first == 0:
        if _feasible(prob, l, 0.0, x0, X0, T, dt, variant):
            return 0.0
        lo, hi = 0.0, grid[0]
        return float(hi)
    lo, hi = grid[first - 1], grid[first]
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if _feasible(prob, l, mid, x0, X0, T, dt, variant):
            hi = mid
        else:
            lo = mid
    return float(hi)


def default_directions(x0) -> dict:
    """Canonical basis directions plus the direction of ``x0``."""
    x0 = np.asarray(x0, dtype=float)
    out = {f"e{i + 1}": np.eye(x0.size)[i] for i in range(x0.size)}
    if np.linalg.norm(x0) > 0:
        out["x0"] = x0 / np.linalg.norm(x0)
    return out


def min_guaranteed_radius(prob: RobustProblem, x0, l_candidates=None, T: float = 25.0,
                          dt: float = ROBUST_DT, X0=None, variant: str = "printed",
                          mu_max: float = 1e6, rtol: float = 1e-2) -> RadiusResult:
    """Minimum over candidate directions of the smallest feasible radius.

    Raises:
        NoFeasibleMu: no direction is feasible even at ``mu_max``.
    """
    cands = default_directions(x0) if l_candidates is None else dict(l_candidates)
    per = {}
    for name, l in cands.items():
        per[name] = smallest_mu(prob, np.asarray(l, dtype=float), x0, X0, T, dt, variant, mu_max, rtol=rtol)
    found = {k: v for k, v in per.items() if v is not None}
    if not found:
        raise NoFeasibleMu(f"no direction feasible up to mu = {mu_max:g}")
    best = min(found, key=found.get)
    return RadiusResult(found[best], np.asarray(cands[best], dtype=float), per, variant)


def admire_problem(lost: int = 0) -> RobustProblem:
    """ADMIRE plant with one lost actuator acting as the disturbance."""
    bbar = fixtures.ADMIRE_BBAR
    kept = [j for j in range(bbar.shape[1]) if j != lost]
    dist = build_disturbance_ellipsoid(fixtures.ADMIRE_RANGES[lost])
    ctrl = build_control_ellipsoid(fixtures.ADMIRE_RANGES[kept], float(dist.shape[0, 0]))
    return RobustProblem(fixtures.ADMIRE_A, bbar[:, kept], bbar[:, [lost]], ctrl, dist)
