"""Resilient reachability of a target ball for the driftless split system
``x' = B u + C w`` with unit-energy inputs.

Every test reduces to maximizing, over the unit sphere, a function of the form

    phi(h) = <h, v> + s * (||C^T h|| - ||B^T h||)

with ``v = x0 - x_goal`` and ``s = sqrt(T)``. The maximum is nonconvex in ``h``,
so it is computed by multi-start projected gradient ascent and, for ``n <= 3``,
cross-checked against a dense sampling of the sphere.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInput, NotEventuallyReachable, NotUnitVector
from .linalg import DEFAULT_TOL, Tolerance
from .resilience import SplitSystem, compute_F

CERTIFY_TOL = 1e-4


@dataclass(frozen=True)
class SphereMaxConfig:
    starts: int = 64
    seed: int = 0
    max_iter: int = 400
    grad_tol: float = 1e-11
    certify: bool = True
    grid_2d: int = 100_000
    grid_3d: int = 400_000


DEFAULT_SPHERE = SphereMaxConfig()


@dataclass(frozen=True)
class TargetBall:
    center: np.ndarray
    radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.array(self.center, dtype=float, ndmin=1))
        if not self.radius >= 0:
            raise InvalidInput("target radius must be nonnegative")


@dataclass(frozen=True)
class ReachQuery:
    sys: SplitSystem
    x0: np.ndarray
    target: TargetBall
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "x0", np.array(self.x0, dtype=float, ndmin=1))
        if self.x0.shape != (self.sys.n,) or self.target.center.shape != (self.sys.n,):
            raise InvalidInput("x0 and target center must have the state dimension")
        if not self.horizon > 0:
            raise InvalidInput("horizon must be positive")

    @property
    def d(self) -> np.ndarray:
        """Goal minus start."""
        return self.target.center - self.x0


@dataclass(frozen=True)
class SphereMaxResult:
    value: float
    h: np.ndarray
    starts_used: int
    certified: bool


class Status(str, enum.Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ReachVerdict:
    """Outcome of a reachability test.

    ``reachable`` follows the non-strict inequality of the criterion;
    ``indeterminate`` flags values within the numerical band around the
    threshold, where the verdict should not be trusted either way.
    """

    reachable: bool
    indeterminate: bool
    value: float
    threshold: float
    h: np.ndarray
    certified: bool
    best_t: float | None = None

    @property
    def status(self) -> Status:
        if self.indeterminate:
            return Status.INDETERMINATE
        return Status.REACHABLE if self.reachable else Status.UNREACHABLE

    def to_dict(self) -> dict:
        out = {
            "status": self.status.value,
            "reachable": self.reachable,
            "value": self.value,
            "threshold": self.threshold,
            "argmax": self.h.tolist(),
            "certified": self.certified,
        }
        if self.best_t is not None:
            out["best_t"] = self.best_t
        return out


class Asymptotic(str, enum.Enum):
    REACHABLE_EVENTUALLY = "ReachableEventually"
    UNREACHABLE_EVENTUALLY = "UnreachableEventually"
    INDETERMINATE = "Indeterminate"


def _check_unit(h):
    h = np.asarray(h, dtype=float)
    if abs(np.linalg.norm(h) - 1.0) > 1e-8:
        raise NotUnitVector(f"||h|| = {np.linalg.norm(h):.12g}")
    return h


def g_eval(sys: SplitSystem, h) -> float:
    """``||C^T h|| - ||B^T h||`` at a unit vector."""
    h = _check_unit(h)
    return float(np.linalg.norm(sys.C.T @ h) - np.linalg.norm(sys.B.T @ h))


class _Objective:
    """Vectorized ``<h, v> + s (||C^T h|| - ||B^T h||)`` over rows of H."""

    def __init__(self, sys: SplitSystem, v, s: float):
        self.B, self.C = sys.B, sys.C
        self.BBt = sys.B @ sys.B.T
        self.CCt = sys.C @ sys.C.T
        self.v = np.zeros(sys.n) if v is None else np.asarray(v, dtype=float)
        self.s = float(s)

    def value(self, H):
        nc = np.linalg.norm(H @ self.C, axis=1)
        nb = np.linalg.norm(H @ self.B, axis=1)
        return H @ self.v + self.s * (nc - nb)

    def grad(self, H):
        nc = np.linalg.norm(H @ self.C, axis=1)
        nb = np.linalg.norm(H @ self.B, axis=1)
        # subgradient 0 where a norm vanishes
        gc = np.divide(H @ self.CCt, nc[:, None], out=np.zeros_like(H), where=nc[:, None] > 0)
        gb = np.divide(H @ self.BBt, nb[:, None], out=np.zeros_like(H), where=nb[:, None] > 0)
        return self.v[None, :] + self.s * (gc - gb)


def _normalize_rows(H):
    return H / np.linalg.norm(H, axis=1, keepdims=True)


def _structured_starts(sys: SplitSystem, v) -> np.ndarray:
    starts = []
    _, VF = np.linalg.eigh(compute_F(sys))
    starts.extend(VF.T)
    if sys.C.size:
        _, VC = np.linalg.eigh(sys.C @ sys.C.T)
        starts.extend(VC.T)
    if v is not None and np.linalg.norm(v) > 0:
        starts.append(np.asarray(v, dtype=float) / np.linalg.norm(v))
    S = np.array(starts)
    return np.vstack([S, -S])


def _ascend(obj: _Objective, H: np.ndarray, cfg: SphereMaxConfig):
    H = _normalize_rows(H)
    f = obj.value(H)
    step = np.ones(len(H))
    active = np.ones(len(H), dtype=bool)
    for _ in range(cfg.max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Ha = H[idx]
        G = obj.grad(Ha)
        R = G - np.sum(G * Ha, axis=1, keepdims=True) * Ha  # tangent component
        rn2 = np.sum(R * R, axis=1)
        done = rn2 <= cfg.grad_tol**2
        t = step[idx]
        accepted = np.zeros(len(idx), dtype=bool)
        Hn, fn = Ha.copy(), f[idx].copy()
        for _ in range(40):
            todo = ~accepted & ~done
            if not todo.any():
                break
            cand = _normalize_rows(Ha[todo] + t[todo, None] * R[todo])
            fc = obj.value(cand)
            ok = fc >= f[idx][todo] + 1e-4 * t[todo] * rn2[todo]
            rows = np.flatnonzero(todo)
            Hn[rows[ok]] = cand[ok]
            fn[rows[ok]] = fc[ok]
            accepted[rows[ok]] = True
            t[rows[~ok]] *= 0.5
        stalled = ~accepted & ~done
        stalled |= accepted & (fn - f[idx] <= 1e-14 * (1.0 + np.abs(fn)))
        H[idx], f[idx] = Hn, fn
        step[idx] = np.minimum(t * 2.0, 1e3)
        active[idx[done | stalled]] = False
    return H, f


def fibonacci_sphere(count: int) -> np.ndarray:
    """Nearly uniform points on the unit sphere in R^3."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z * z)
    theta = math.pi * (1.0 + math.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def sphere_samples(n: int, cfg: SphereMaxConfig = DEFAULT_SPHERE) -> np.ndarray:
    """Dense deterministic sampling of the unit sphere for ``n <= 3``."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        a = np.linspace(0.0, 2.0 * math.pi, cfg.grid_2d, endpoint=False)
        return np.column_stack([np.cos(a), np.sin(a)])
    if n == 3:
        return fibonacci_sphere(cfg.grid_3d)
    raise InvalidInput("dense sphere sampling is only available for n <= 3")


def _tangent_basis(h):
    # orthonormal basis of the plane orthogonal to h
    _, _, Vt = np.linalg.svd(h[None, :])
    return Vt[1:]


def _zoom(obj: _Objective, h, radius: float, rounds: int = 14, width: int = 10):
    """Derivative-free refinement: shrinking tangent-plane grids around ``h``."""
    best_h, best_f = h, float(obj.value(h[None, :])[0])
    dim = len(h) - 1
    offsets = np.linspace(-1.0, 1.0, 2 * width + 1)
    grid = np.array(np.meshgrid(*([offsets] * dim), indexing="ij")).reshape(dim, -1).T
    for _ in range(rounds):
        basis = _tangent_basis(best_h)
        H = _normalize_rows(best_h[None, :] + radius * grid @ basis)
        vals = obj.value(H)
        k = int(np.argmax(vals))
        if vals[k] > best_f:
            best_h, best_f = H[k], float(vals[k])
        radius *= 0.25
    return best_f, best_h


def sampled_max(sys: SplitSystem, v=None, s: float = 1.0, cfg: SphereMaxConfig = DEFAULT_SPHERE, refine: int = 8):
    """Brute-force sphere maximum for ``n <= 3``.

    Dense sampling, then derivative-free grid refinement around the
    ``refine`` best well-separated samples.
    """
    obj = _Objective(sys, v, s)
    H = sphere_samples(sys.n, cfg)
    vals = obj.value(H)
    k = int(np.argmax(vals))
    best_f, best_h = float(vals[k]), H[k]
    if sys.n == 1 or refine <= 0:
        return best_f, best_h
    spacing = 2.0 * math.pi / cfg.grid_2d if sys.n == 2 else math.sqrt(4.0 * math.pi / cfg.grid_3d)
    order = np.argsort(vals)[::-1]
    picked = []
    for i in order[: 50 * refine]:
        if all(np.linalg.norm(H[i] - H[j]) > 20 * spacing for j in picked):
            picked.append(i)
            if len(picked) == refine:
                break
    for i in picked:
        f, h = _zoom(obj, H[i], 2.0 * spacing)
        if f > best_f:
            best_f, best_h = f, h
    return best_f, best_h


def maximize_on_sphere(sys: SplitSystem, v=None, s: float = 1.0, cfg: SphereMaxConfig = DEFAULT_SPHERE) -> SphereMaxResult:
    """Maximize ``<h, v> + s g(h)`` over the unit sphere."""
    n = sys.n
    obj = _Objective(sys, v, s)
    if n == 1:
        H = np.array([[1.0], [-1.0]])
        vals = obj.value(H)
        k = int(np.argmax(vals))
        return SphereMaxResult(float(vals[k]), H[k], 2, True)

    rng = np.random.default_rng(cfg.seed)
    starts = np.vstack([rng.standard_normal((cfg.starts, n)), _structured_starts(sys, v)])
    H, f = _ascend(obj, starts, cfg)
    k = int(np.argmax(f))
    value, h = float(f[k]), H[k]

    certified = False
    if cfg.certify and n <= 3:
        sval, sh = sampled_max(sys, v, s, cfg)
        if sval > value:
            H2, f2 = _ascend(obj, sh[None, :], cfg)
            if f2[0] > value:
                value, h = float(f2[0]), H2[0]
        certified = abs(value - sval) <= CERTIFY_TOL
    return SphereMaxResult(value, h / np.linalg.norm(h), len(starts), certified)


def max_g(sys: SplitSystem, cfg: SphereMaxConfig = DEFAULT_SPHERE) -> SphereMaxResult:
    return maximize_on_sphere(sys, None, 1.0, cfg)


def _band(d) -> float:
    return 1e-6 * (1.0 + float(np.linalg.norm(d)))


def _phi_max(q: ReachQuery, t: float, cfg: SphereMaxConfig) -> SphereMaxResult:
    return maximize_on_sphere(q.sys, q.x0 - q.target.center, math.sqrt(t), cfg)


def reachable_at_time(q: ReachQuery, cfg: SphereMaxConfig = DEFAULT_SPHERE) -> ReachVerdict:
    """Resilient reachability of the target exactly at ``q.horizon``."""
    res = _phi_max(q, q.horizon, cfg)
    eps = q.target.radius
    band = _band(q.d)
    return ReachVerdict(
        reachable=res.value <= eps + band,
        indeterminate=abs(res.value - eps) <= band,
        value=res.value,
        threshold=eps,
        h=res.h,
        certified=res.certified,
    )


def _golden_min(fun, lo, hi, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def reachable_by_time(q: ReachQuery, cfg: SphereMaxConfig = DEFAULT_SPHERE) -> ReachVerdict:
    """Resilient reachability at some time in ``[0, q.horizon]``.

    With ``s = sqrt(t)`` the inner sphere maximum is a pointwise maximum of
    affine functions of ``s``, hence convex; a golden-section search finds its
    minimum, which decides the verdict. When feasible, ``best_t`` is the
    earliest feasible time.
    """
    eps = q.target.radius
    band = _band(q.d)
    v = q.x0 - q.target.center
    dist = float(np.linalg.norm(v))
    if dist <= eps:
        h = v / dist if dist > 0 else np.eye(q.sys.n)[0]
        return ReachVerdict(True, abs(dist - eps) <= band, dist, eps, h, True, best_t=0.0)

    def psi(s):
        return maximize_on_sphere(q.sys, v, s, cfg).value

    s_hi = math.sqrt(q.horizon)
    level = eps + band
    # the verdict uses the window minimum; best_t is the first entry into the sublevel set
    s_star, _ = _golden_min(psi, 0.0, s_hi, 1e-7 * max(1.0, s_hi))
    if psi(s_hi) <= psi(s_star):
        s_star = s_hi
    res = maximize_on_sphere(q.sys, v, s_star, cfg)
    feasible = res.value <= level
    best_s = s_star
    if feasible:
        lo, hi = 0.0, s_star
        while hi - lo > 1e-8 * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if psi(mid) <= level:
                hi = mid
            else:
                lo = mid
        best_s = hi
    return ReachVerdict(
        reachable=feasible,
        indeterminate=abs(res.value - eps) <= band,
        value=res.value,
        threshold=eps,
        h=res.h,
        certified=res.certified,
        best_t=best_s**2,
    )


def classify_asymptotic(sys: SplitSystem, tol: Tolerance = DEFAULT_TOL) -> Asymptotic:
    """Long-horizon behaviour from the sign structure of ``F``."""
    F = compute_F(sys)
    lam = linalg.sym_eigenvalues(F)[0]
    thr = linalg.pd_threshold(F, tol)
    if lam > thr:
        return Asymptotic.REACHABLE_EVENTUALLY
    if lam < -thr:
        return Asymptotic.UNREACHABLE_EVENTUALLY
    return Asymptotic.INDETERMINATE


def min_reach_time(
    sys: SplitSystem,
    x0,
    target: TargetBall,
    cfg: SphereMaxConfig = DEFAULT_SPHERE,
    tol: Tolerance = DEFAULT_TOL,
    rtol: float = 1e-4,
) -> float:
    """Smallest horizon ``T`` at which the target is resiliently reachable.

    Once ``F`` is positive definite the criterion is nonincreasing in ``T``,
    so bisection applies. Returns ``math.inf`` only through the error path.
    """
    x0 = np.array(x0, dtype=float, ndmin=1)
    v = x0 - target.center
    dist = float(np.linalg.norm(v))
    if dist <= target.radius:
        return 0.0
    if classify_asymptotic(sys, tol) is not Asymptotic.REACHABLE_EVENTUALLY:
        raise NotEventuallyReachable("F is not positive definite; no finite reach time is guaranteed")
    gmax = max_g(sys, cfg).value
    if gmax >= 0:
        raise NotEventuallyReachable(f"max g = {gmax:.3e} is not negative")

    def ok(s):
        return maximize_on_sphere(sys, v, s, cfg).value <= target.radius

    s_hi = (dist - target.radius) / -gmax
    while not ok(s_hi):
        s_hi *= 1.5
    lo, hi = 0.0, s_hi
    while hi - lo > 0.5 * rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi**2
