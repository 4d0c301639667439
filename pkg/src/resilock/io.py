"""JSON system files.

A system file is an object with keys ``n``, ``m``, ``B`` (row-major n x m)
and optionally ``A``, ``labels``, ``ranges``, ``x0``, ``x_goal``,
``epsilon`` and ``horizon``. Angles and actuator ranges are radians.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fixtures
from .errors import InvalidInput, UnknownFixture
from .resilience import ControlMatrix


@dataclass(frozen=True)
class SystemFile:
    bbar: ControlMatrix
    A: np.ndarray | None = None
    x0: np.ndarray | None = None
    x_goal: np.ndarray | None = None
    epsilon: float = 0.0
    horizon: float | None = None

    @property
    def n(self) -> int:
        return self.bbar.n

    @property
    def m(self) -> int:
        return self.bbar.m

    def to_dict(self) -> dict:
        out = {"n": self.n, "m": self.m, "B": self.bbar.entries.tolist(), "labels": list(self.bbar.labels)}
        if self.A is not None:
            out["A"] = self.A.tolist()
        if self.bbar.ranges is not None:
            out["ranges"] = self.bbar.ranges.tolist()
        for key in ("x0", "x_goal"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value.tolist()
        out["epsilon"] = self.epsilon
        if self.horizon is not None:
            out["horizon"] = self.horizon
        return out


def _matrix(doc, key, rows, cols, required=True):
    if key not in doc:
        if required:
            raise InvalidInput(f"$.{key}: missing required key")
        return None
    value = doc[key]
    if not isinstance(value, list) or len(value) != rows:
        raise InvalidInput(f"$.{key}: expected {rows} rows")
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise InvalidInput(f"$.{key}[{i}]: expected {cols} entries")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidInput(f"$.{key}[{i}][{j}]: expected a number, got {v!r}")
    return np.array(value, dtype=float)


def _vector(doc, key, size):
    if key not in doc:
        return None
    value = doc[key]
    if not isinstance(value, list) or len(value) != size:
        raise InvalidInput(f"$.{key}: expected {size} numbers")
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InvalidInput(f"$.{key}[{i}]: expected a number, got {v!r}")
    return np.array(value, dtype=float)


def _scalar(doc, key, default=None):
    if key not in doc:
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidInput(f"$.{key}: expected a number, got {v!r}")
    return float(v)


def parse_system(doc) -> SystemFile:
    """Validate a decoded JSON document."""
    if not isinstance(doc, dict):
        raise InvalidInput("$: expected a JSON object")
    for key in ("n", "m"):
        if not isinstance(doc.get(key), int) or isinstance(doc.get(key), bool) or doc[key] < 1:
            raise InvalidInput(f"$.{key}: expected a positive integer")
    n, m = doc["n"], doc["m"]
    B = _matrix(doc, "B", n, m)
    A = _matrix(doc, "A", n, n, required=False)
    ranges = _matrix(doc, "ranges", m, 2, required=False)
    labels = doc.get("labels") or ()
    if labels and (not isinstance(labels, list) or len(labels) != m):
        raise InvalidInput(f"$.labels: expected {m} strings")
    try:
        bbar = ControlMatrix(B, tuple(str(s) for s in labels), ranges)
    except InvalidInput as exc:
        raise InvalidInput(f"$.ranges: {exc}") from exc
    eps = _scalar(doc, "epsilon", 0.0)
    if eps < 0:
        raise InvalidInput("$.epsilon: must be nonnegative")
    horizon = _scalar(doc, "horizon")
    if horizon is not None and horizon <= 0:
        raise InvalidInput("$.horizon: must be positive")
    return SystemFile(bbar, A, _vector(doc, "x0", n), _vector(doc, "x_goal", n), eps, horizon)


def loads_system(text: str, source: str = "<string>") -> SystemFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_system(doc)
    except InvalidInput as exc:
        raise type(exc)(f"{source}: {exc}") from None


BUILTIN_SYSTEMS = ("admire", "admire-driftless")


def builtin_system(name: str) -> SystemFile:
    """Embedded ADMIRE systems, addressable as ``builtin:<name>``."""
    if name == "admire":
        bbar = ControlMatrix(fixtures.ADMIRE_BBAR, fixtures.ADMIRE_LABELS, fixtures.ADMIRE_RANGES)
        return SystemFile(bbar, fixtures.ADMIRE_A.copy(), fixtures.ADMIRE_X0.copy(), np.zeros(3),
                          fixtures.ADMIRE_TARGET_RADIUS, 25.0)
    if name == "admire-driftless":
        bbar = ControlMatrix(fixtures.ADMIRE_DRIFTLESS_BBAR_T.T, fixtures.ADMIRE_DRIFTLESS_LABELS)
        return SystemFile(bbar)
    raise UnknownFixture(f"unknown builtin system {name!r}; choose from {list(BUILTIN_SYSTEMS)}")


def load_system(path) -> SystemFile:
    """Read a system file; ``builtin:<name>`` selects an embedded system."""
    path = str(path)
    if path.startswith("builtin:"):
        return builtin_system(path.split(":", 1)[1])
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"{path}: {exc.strerror}") from None
    return loads_system(text, path)


def dump_system(system: SystemFile) -> str:
    return json.dumps(system.to_dict(), indent=2)


def dump_matrix(bbar: ControlMatrix) -> str:
    return dump_system(SystemFile(bbar))
