"""Closed-loop simulation of ``x' = A x + B u + C w`` with fixed-step RK4.

Undesirable inputs are piecewise-constant random signals drawn from the
lost actuator's range and normalized into the unit L2 ball.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fixtures, linalg
from .errors import InvalidInput, NonFiniteState
from .resilience import ControlMatrix, ResilienceReport, as_control_matrix, check_p_resilience, is_loss_tolerable, split
from .synthesis import ResilientController, make_controller

DEFAULT_DT = 1e-3
DEFAULT_DWELL = 0.1
ADMIRE_HORIZON = 25.0


@dataclass(frozen=True)
class SystemModel:
    """Linear plant; ``driftless`` forces ``A = 0``."""

    A: np.ndarray
    bbar: ControlMatrix
    driftless: bool = False

    def __post_init__(self):
        bbar = as_control_matrix(self.bbar)
        object.__setattr__(self, "bbar", bbar)
        A = np.zeros((bbar.n, bbar.n)) if self.A is None else np.array(self.A, dtype=float)
        if A.shape != (bbar.n, bbar.n):
            raise InvalidInput(f"A must be {bbar.n}x{bbar.n}, got {A.shape}")
        object.__setattr__(self, "A", A)

    @property
    def drift(self) -> np.ndarray:
        return np.zeros_like(self.A) if self.driftless else self.A


@dataclass(frozen=True)
class InputSignal:
    """Piecewise-constant signal: ``samples[k]`` holds on ``[k dt, (k+1) dt)``."""

    samples: np.ndarray  # (K, p)
    dt: float
    ranges: np.ndarray | None = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        object.__setattr__(self, "samples", s)
        if self.dt <= 0:
            raise InvalidInput("dt must be positive")

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    @property
    def l2_norm(self) -> float:
        return float(math.sqrt(np.sum(self.samples**2) * self.dt))

    def at(self, t: float) -> np.ndarray:
        k = min(int(math.floor(t / self.dt + 1e-9)), len(self.samples) - 1)
        return self.samples[max(k, 0)]

    @classmethod
    def zero(cls, channels: int, T: float, dt: float = DEFAULT_DWELL) -> "InputSignal":
        return cls(np.zeros((max(1, int(round(T / dt))), channels)), dt)


def generate_w(ranges, seed: int, T: float, dt: float = DEFAULT_DWELL) -> InputSignal:
    """Uniform draws within ``ranges`` held for ``dt`` seconds, scaled into the unit L2 ball."""
    if T <= 0 or dt <= 0:
        raise InvalidInput("T and dt must be positive")
    ranges = np.atleast_2d(np.asarray(ranges, dtype=float))
    rng = np.random.default_rng(seed)
    K = max(1, int(round(T / dt)))
    samples = rng.uniform(ranges[:, 0], ranges[:, 1], size=(K, ranges.shape[0]))
    norm = math.sqrt(np.sum(samples**2) * dt)
    return InputSignal(samples / max(1.0, norm), dt, ranges)


@dataclass(frozen=True)
class LQRController:
    """``u = -K x`` with optional clipping."""

    K: np.ndarray
    saturation: np.ndarray | None = None

    def __call__(self, x, w) -> np.ndarray:
        u = -np.asarray(x, dtype=float) @ self.K.T
        if self.saturation is not None:
            u = np.clip(u, self.saturation[:, 0], self.saturation[:, 1])
        return u


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    w: np.ndarray
    distances: np.ndarray
    saturated: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def u_l2(self) -> float:
        return float(math.sqrt(np.trapezoid(np.sum(self.controls**2, axis=1), self.times)))

    def header(self) -> list:
        n, mu, p = self.states.shape[1], self.controls.shape[1], self.w.shape[1]
        return (["t"] + [f"x{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(mu)]
                + [f"w{i + 1}" for i in range(p)] + ["distance"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        table = np.column_stack([self.times, self.states, self.controls, self.w, self.distances])
        for row in table:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _step_inputs(signals, times) -> np.ndarray:
    # (S, K+1, p) input values held over each step
    return np.stack([np.stack([s.at(t) for t in times]) for s in signals])


def integrate_batch(model: SystemModel, B, C, controller, signals, x0, T: float,
                    dt: float = DEFAULT_DT, x_goal=None) -> list:
    """RK4 on several independent runs at once; one input signal per run.

    The controller must accept row-stacked states and inputs.
    """
    A = model.drift
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    C = np.asarray(C, dtype=float).reshape(n, -1)
    steps = int(round(T / dt))
    if steps < 1:
        raise InvalidInput("T must be at least one step")
    S = len(signals)
    x = np.broadcast_to(np.asarray(x0, dtype=float), (S, n)).copy()
    goal = np.zeros(n) if x_goal is None else np.asarray(x_goal, dtype=float)
    mu = B.shape[1]

    def ctrl(x, wk):
        return np.zeros((x.shape[0], mu)) if controller is None else controller(x, wk)

    def f(x, wk):
        return x @ A.T + ctrl(x, wk) @ B.T + wk @ C.T

    times = dt * np.arange(steps + 1)
    ws = _step_inputs(signals, times)
    states = np.empty((S, steps + 1, n))
    controls = np.empty((S, steps + 1, mu))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps + 1):
            wk = ws[:, k]
            states[:, k] = x
            controls[:, k] = ctrl(x, wk)
            if k == steps:
                break
            k1 = f(x, wk)
            k2 = f(x + 0.5 * dt * k1, wk)
            k3 = f(x + 0.5 * dt * k2, wk)
            k4 = f(x + dt * k3, wk)
            x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise NonFiniteState(f"state became non-finite at t = {times[k + 1]:.6g}")
    limits = getattr(controller, "saturation", None)
    out = []
    for i in range(S):
        u = controls[i]
        if limits is not None:
            sat = np.any((u <= limits[:, 0] + 1e-15) | (u >= limits[:, 1] - 1e-15), axis=1)
        else:
            sat = np.zeros(steps + 1, dtype=bool)
        dist = np.linalg.norm(states[i] - goal, axis=1)
        out.append(Trajectory(times, states[i], u, ws[i], dist, sat))
    return out


def integrate(model: SystemModel, B, C, controller, w: InputSignal, x0, T: float,
              dt: float = DEFAULT_DT, x_goal=None) -> Trajectory:
    """Classical RK4 on ``x' = A x + B u + C w``.

    ``controller(x, w)`` returns u; ``None`` means ``u = 0``. The input is held
    at its value at the start of each step, so switch times of ``w`` should
    sit on the step grid.
    """
    return integrate_batch(model, B, C, controller, [w], x0, T, dt, x_goal)[0]


class AdmireScenario(str, enum.Enum):
    CANARD = "canard"
    RIGHT_ELEVON = "right-elevon"
    LEFT_ELEVON = "left-elevon"
    RUDDER = "rudder"

    @property
    def index(self) -> int:
        return list(AdmireScenario).index(self)


def admire_model() -> SystemModel:
    bbar = ControlMatrix(fixtures.ADMIRE_BBAR, fixtures.ADMIRE_LABELS, fixtures.ADMIRE_RANGES)
    return SystemModel(fixtures.ADMIRE_A, bbar)


def admire_lqr_gain(printed: bool = False) -> np.ndarray:
    """LQR gain for the canard loss with ``Q = I``, ``R = I``."""
    if printed:
        return fixtures.ADMIRE_LQR_K.copy()
    sys = split(fixtures.ADMIRE_BBAR, [0])
    return linalg.care_lqr_gain(fixtures.ADMIRE_A, sys.B, np.eye(3), np.eye(3))


@dataclass
class RunSummary:
    scenario: str
    controller: str
    seed: int
    final_distance: float
    u_l2: float
    w_l2: float
    saturation_fraction: float
    reached: bool
    alpha: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_controller(model: SystemModel, loss, controller: str, x0, x_goal, saturate: bool = True, K=None):
    """Split ``model`` by ``loss`` and build the requested controller.

    ``controller`` is ``"resilient"``, ``"lqr"`` (gain from the Riccati
    equation with identity weights unless ``K`` is given) or ``"none"``.
    Saturation uses the ranges of the controlled actuators when available.

    Returns:
        ``(SplitSystem, controller or None)``.
    """
    sys = split(model.bbar, loss)
    kept = [j for j in range(model.bbar.m) if j not in sys.scenario.indices]
    ranges = model.bbar.ranges
    limits = ranges[kept] if saturate and ranges is not None else None
    if controller == "resilient":
        return sys, make_controller(sys, x0, x_goal, saturation=limits)
    if controller == "lqr":
        if K is None:
            K = linalg.care_lqr_gain(model.drift, sys.B, np.eye(model.bbar.n), np.eye(sys.B.shape[1]))
        return sys, LQRController(np.asarray(K, dtype=float), limits)
    if controller == "none":
        return sys, None
    raise InvalidInput(f"unknown controller {controller!r}")


def simulate_batch(model: SystemModel, loss, controller: str, seeds, x0, x_goal, T: float,
                   dt: float = DEFAULT_DT, dwell: float = DEFAULT_DWELL, saturate: bool = True,
                   K=None, target_radius: float = 0.0, scenario_name: str = "") -> list:
    """Closed-loop runs of a generic system, one per seed.

    The undesirable input is drawn from the ranges of the lost actuators.

    Returns:
        list of ``(Trajectory, RunSummary)`` pairs.
    """
    if model.bbar.ranges is None:
        raise InvalidInput("actuator ranges are required to draw the undesirable input")
    x0 = np.asarray(x0, dtype=float)
    x_goal = np.zeros_like(x0) if x_goal is None else np.asarray(x_goal, dtype=float)
    sys, ctrl = build_controller(model, loss, controller, x0, x_goal, saturate, K)
    lost = list(sys.scenario.indices)
    signals = [generate_w(model.bbar.ranges[lost], s, T, dwell) for s in seeds]
    trajs = integrate_batch(model, sys.B, sys.C, ctrl, signals, x0, T, dt, x_goal)
    alpha = ctrl.gains.alpha if isinstance(ctrl, ResilientController) else None
    out = []
    for seed, w, traj in zip(seeds, signals, trajs):
        summary = RunSummary(
            scenario=scenario_name or ",".join(str(j + 1) for j in lost),
            controller=controller,
            seed=int(seed),
            final_distance=float(traj.distances[-1]),
            u_l2=traj.u_l2(),
            w_l2=w.l2_norm,
            saturation_fraction=float(traj.saturated.mean()),
            reached=bool(traj.distances[-1] <= target_radius),
            alpha=alpha,
        )
        out.append((traj, summary))
    return out


def run_admire_batch(
    scenario=AdmireScenario.CANARD,
    controller: str = "resilient",
    seeds=(0,),
    T: float = ADMIRE_HORIZON,
    dt: float = DEFAULT_DT,
    dwell: float = DEFAULT_DWELL,
    saturate: bool = True,
    printed_lqr: bool = False,
) -> list:
    """Closed-loop ADMIRE runs from ``x0 = (1, 1, 1)`` toward the origin, one per seed.

    Returns a list of ``(Trajectory, RunSummary)`` pairs.

    Raises:
        NotWellDefined: for the resilient law when ``B B^T`` is singular
            (rudder loss).
    """
    scenario = AdmireScenario(scenario)
    # the printed gain only exists for the canard loss
    K = admire_lqr_gain(True) if printed_lqr and scenario is AdmireScenario.CANARD else None
    return simulate_batch(admire_model(), [scenario.index], controller, seeds, fixtures.ADMIRE_X0,
                          np.zeros(3), T, dt, dwell, saturate, K, fixtures.ADMIRE_TARGET_RADIUS,
                          scenario.value)


def run_admire(scenario=AdmireScenario.CANARD, controller: str = "resilient", seed: int = 0,
               **kwargs) -> tuple[Trajectory, RunSummary]:
    """Single-seed :func:`run_admire_batch`."""
    return run_admire_batch(scenario, controller, (seed,), **kwargs)[0]


def driftless_admire(scale: float = 1.0) -> ControlMatrix:
    """3 x 12 driftless ADMIRE matrix, thrust vectoring columns scaled by ``scale``."""
    bbar = ControlMatrix(fixtures.ADMIRE_DRIFTLESS_BBAR_T.T, fixtures.ADMIRE_DRIFTLESS_LABELS)
    return bbar.scaled_columns(fixtures.THRUST_VECTORING_COLUMNS, scale) if scale != 1.0 else bbar


def run_admire_driftless(config: str = "nominal", scale: float = 0.014) -> ResilienceReport:
    """Single-loss verdicts for the driftless ADMIRE model.

    ``nominal`` uses the matrix as given; ``thrust_scaled`` first shrinks both
    thrust vectoring columns by ``scale``.
    """
    if config not in ("nominal", "thrust_scaled"):
        raise InvalidInput(f"unknown configuration {config!r}")
    bbar = driftless_admire(scale if config == "thrust_scaled" else 1.0)
    return check_p_resilience(bbar, 1)


def tolerable_losses(bbar: ControlMatrix) -> dict:
    """Label -> whether losing that actuator alone is tolerable."""
    return {bbar.labels[j]: is_loss_tolerable(split(bbar, [j]))[0] for j in range(bbar.m)}


def resilient_scale_window(lo: float = 0.010, hi: float = 0.020, step: float = 0.001) -> list:
    """Scaling factors in ``[lo, hi]`` that make the driftless model 1-resilient."""
    grid = np.round(np.arange(lo, hi + step / 2, step), 6)
    return [float(s) for s in grid if run_admire_driftless("thrust_scaled", s).overall]
