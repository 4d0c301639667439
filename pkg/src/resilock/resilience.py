"""Decision procedures for p-resilience of a control matrix.

Losing control of the actuators in a :class:`LossScenario` splits the control
matrix into controlled columns ``B`` and uncontrolled columns ``C``. The loss is
tolerable exactly when ``F = B B^T - C C^T`` is positive definite, and the
matrix is p-resilient when every p-subset of columns is tolerable.

Actuator indices are 0-based in this module.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    CombinatorialBudgetExceeded,
    DuplicateIndex,
    IndexOutOfRange,
    InvalidInput,
    NotOrthonormalRows,
    SingularGram,
)
from .linalg import DEFAULT_TOL, Tolerance

DEFAULT_MAX_COMBINATIONS = 10**6
_BATCH = 4096


@dataclass(frozen=True)
class ControlMatrix:
    """Actuation matrix with optional per-actuator metadata.

    Attributes:
        entries: n x m array; column j is the effect of actuator j.
        labels: one name per actuator.
        ranges: optional m x 2 array of (u_min, u_max).
    """

    entries: np.ndarray
    labels: tuple = ()
    ranges: np.ndarray | None = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float, ndmin=2)
        if entries.ndim != 2 or entries.shape[1] < 1:
            raise InvalidInput(f"control matrix must be 2-D with m >= 1, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise InvalidInput("control matrix has non-finite entries")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        m = entries.shape[1]
        labels = tuple(self.labels) if self.labels else tuple(f"u{j + 1}" for j in range(m))
        if len(labels) != m:
            raise InvalidInput(f"expected {m} labels, got {len(labels)}")
        object.__setattr__(self, "labels", labels)
        if self.ranges is not None:
            ranges = np.array(self.ranges, dtype=float)
            if ranges.shape != (m, 2):
                raise InvalidInput(f"ranges must have shape ({m}, 2), got {ranges.shape}")
            if np.any(ranges[:, 0] >= ranges[:, 1]):
                raise InvalidInput("each range needs u_min < u_max")
            ranges.setflags(write=False)
            object.__setattr__(self, "ranges", ranges)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    @property
    def gram(self) -> np.ndarray:
        return self.entries @ self.entries.T

    def scaled_columns(self, columns, factor: float) -> "ControlMatrix":
        entries = self.entries.copy()
        entries[:, list(columns)] *= factor
        return ControlMatrix(entries, self.labels, self.ranges)


def as_control_matrix(bbar) -> ControlMatrix:
    return bbar if isinstance(bbar, ControlMatrix) else ControlMatrix(bbar)


@dataclass(frozen=True)
class LossScenario:
    """Sorted, distinct 0-based indices of the uncontrolled actuators."""

    indices: tuple

    @classmethod
    def of(cls, indices, m: int) -> "LossScenario":
        idx = [int(i) for i in np.atleast_1d(indices)]
        if len(set(idx)) != len(idx):
            raise DuplicateIndex(f"repeated actuator index in {idx}")
        for i in idx:
            if not 0 <= i < m:
                raise IndexOutOfRange(f"actuator index {i} outside [0, {m - 1}]")
        if not 1 <= len(idx) < m:
            raise InvalidInput(f"need 1 <= p < m, got p={len(idx)}, m={m}")
        return cls(tuple(sorted(idx)))

    @property
    def p(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SplitSystem:
    B: np.ndarray
    C: np.ndarray
    scenario: LossScenario | None = None

    @property
    def n(self) -> int:
        return self.B.shape[0]

    def reassemble(self, m: int | None = None) -> np.ndarray:
        """Rebuild the full control matrix with C at the scenario indices."""
        m = m if m is not None else self.B.shape[1] + self.C.shape[1]
        out = np.empty((self.n, m))
        lost = list(self.scenario.indices)
        kept = [j for j in range(m) if j not in lost]
        out[:, kept] = self.B
        out[:, lost] = self.C
        return out


def split(bbar, scenario) -> SplitSystem:
    """Partition the columns into controlled ``B`` and uncontrolled ``C``."""
    bbar = as_control_matrix(bbar)
    if not isinstance(scenario, LossScenario):
        scenario = LossScenario.of(scenario, bbar.m)
    elif max(scenario.indices) >= bbar.m:
        raise IndexOutOfRange(f"scenario {scenario.indices} exceeds m={bbar.m}")
    lost = list(scenario.indices)
    kept = [j for j in range(bbar.m) if j not in scenario.indices]
    return SplitSystem(bbar.entries[:, kept], bbar.entries[:, lost], scenario)


def split_system(B, C) -> SplitSystem:
    """Build a :class:`SplitSystem` directly from ``B`` and ``C``."""
    B = np.array(B, dtype=float, ndmin=2)
    C = np.array(C, dtype=float)
    if C.ndim == 1:
        C = C.reshape(B.shape[0], -1)
    if C.shape[0] != B.shape[0]:
        raise InvalidInput("B and C must have the same number of rows")
    m = B.shape[1] + C.shape[1]
    scenario = LossScenario(tuple(range(B.shape[1], m))) if C.shape[1] else None
    return SplitSystem(B, C, scenario)


def compute_F(sys: SplitSystem) -> np.ndarray:
    F = sys.B @ sys.B.T - sys.C @ sys.C.T
    return 0.5 * (F + F.T)


def is_loss_tolerable(sys: SplitSystem, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    """Whether ``F`` is positive definite, with its smallest eigenvalue."""
    F = compute_F(sys)
    lam = linalg.sym_eigenvalues(F)[0]
    return bool(lam > linalg.pd_threshold(F, tol)), float(lam)


@dataclass(frozen=True)
class Verdict:
    scenario: LossScenario
    min_eig: float
    tolerable: bool
    indeterminate: bool = False

    def to_dict(self, labels=None) -> dict:
        out = {
            "indices": [i + 1 for i in self.scenario.indices],
            "min_eig": self.min_eig,
            "tolerable": self.tolerable,
            "indeterminate": self.indeterminate,
        }
        if labels is not None:
            out["actuators"] = [labels[i] for i in self.scenario.indices]
        return out


@dataclass
class ResilienceReport:
    p: int
    verdicts: list = field(default_factory=list)
    degree: int | None = None

    @property
    def overall(self) -> bool:
        return all(v.tolerable for v in self.verdicts)

    @property
    def indeterminate(self) -> bool:
        return any(v.indeterminate for v in self.verdicts)

    @property
    def worst(self) -> Verdict:
        return min(self.verdicts, key=lambda v: v.min_eig)

    def to_dict(self, labels=None) -> dict:
        return {
            "p": self.p,
            "overall": self.overall,
            "indeterminate": self.indeterminate,
            "combinations": len(self.verdicts),
            "degree": self.degree,
            "verdicts": [v.to_dict(labels) for v in self.verdicts],
        }


def worker_count() -> int:
    """Thread cap taken from ``RESILOCK_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("RESILOCK_THREADS", "1")))
    except ValueError:
        return 1


def _batch_min_eigs(gram, columns, combos, tol):
    # F = gram - 2 C C^T for every combination in the batch.
    idx = np.asarray(combos, dtype=int)
    Cs = columns[:, idx].transpose(1, 0, 2)  # (k, n, p)
    F = gram[None, :, :] - 2.0 * Cs @ Cs.transpose(0, 2, 1)
    lam = np.linalg.eigvalsh(F)[:, 0]
    diag = np.abs(np.diagonal(F, axis1=1, axis2=2)).max(axis=1)
    thr = tol.pd_eps * (1.0 + diag)
    return lam, thr


def check_p_resilience(
    bbar,
    p: int,
    tol: Tolerance = DEFAULT_TOL,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
    workers: int | None = None,
) -> ResilienceReport:
    """Test every loss of ``p`` actuators, in lexicographic order."""
    bbar = as_control_matrix(bbar)
    m = bbar.m
    if not 1 <= p < m:
        raise InvalidInput(f"need 1 <= p < m, got p={p}, m={m}")
    count = math.comb(m, p)
    if count > max_combinations:
        raise CombinatorialBudgetExceeded(f"C({m}, {p}) = {count} exceeds the cap {max_combinations}")

    gram = bbar.gram
    combos = list(itertools.combinations(range(m), p))
    batches = [combos[i:i + _BATCH] for i in range(0, count, _BATCH)]
    workers = workers or worker_count()

    def run(batch):
        return _batch_min_eigs(gram, bbar.entries, batch, tol)

    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, batches))
    else:
        results = [run(b) for b in batches]

    verdicts = []
    for batch, (lam, thr) in zip(batches, results):
        for combo, l, t in zip(batch, lam, thr):
            verdicts.append(Verdict(LossScenario(combo), float(l), bool(l > t), bool(abs(l) <= t)))
    return ResilienceReport(p=p, verdicts=verdicts)


def degree_of_resilience(
    bbar,
    tol: Tolerance = DEFAULT_TOL,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> int:
    """Largest p for which the matrix is p-resilient (0 if none).

    p-resilience implies (p-1)-resilience, so the search stops at the first
    failure.
    """
    bbar = as_control_matrix(bbar)
    degree = 0
    for p in range(1, bbar.m):
        if not check_p_resilience(bbar, p, tol, max_combinations).overall:
            break
        degree = p
    return degree


def svd_reduce(bbar, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, bool]:
    """Orthonormal-row factor ``V`` of the compact SVD, and whether it may
    stand in for the full matrix (requires a positive definite Gram matrix)."""
    bbar = as_control_matrix(bbar)
    _, _, V = linalg.compact_svd(bbar.entries)
    return V, linalg.is_positive_definite(bbar.gram, tol)


def sigma_criterion(V, p: int, tol: Tolerance = DEFAULT_TOL) -> bool:
    """p-resilience of an orthonormal-row matrix via singular values.

    Every p-column submatrix must have largest singular value below
    ``1/sqrt(2)``.
    """
    V = np.array(V, dtype=float, ndmin=2)
    n, m = V.shape
    if np.max(np.abs(V @ V.T - np.eye(n))) > 1e-8:
        raise NotOrthonormalRows("V V^T differs from the identity by more than 1e-8")
    if not 1 <= p < m:
        raise InvalidInput(f"need 1 <= p < m, got p={p}, m={m}")
    bound = 1.0 / math.sqrt(2.0) - tol.pd_eps
    for combo in itertools.combinations(range(m), p):
        if linalg.max_singular_value(V[:, combo]) >= bound:
            return False
    return True


def verify_size_identity(bbar) -> float:
    """Normalized residual of ``sum_i det(F_i) = det(B B^T) (m - 2n)``.

    ``F_i`` is the matrix obtained by losing actuator ``i`` alone.
    """
    bbar = as_control_matrix(bbar)
    gram = bbar.gram
    det_gram = np.linalg.det(gram)
    if not linalg.is_positive_definite(gram):
        raise SingularGram("B B^T is not invertible")
    total = 0.0
    for i in range(bbar.m):
        c = bbar.entries[:, [i]]
        total += np.linalg.det(gram - 2.0 * c @ c.T)
    rhs = det_gram * (bbar.m - 2 * bbar.n)
    return float(abs(total - rhs) / (1.0 + abs(det_gram) * bbar.m))
