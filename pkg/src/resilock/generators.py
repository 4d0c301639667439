"""Constructions of resilient control matrices."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, UnknownFixture, UnsupportedOrder
from .fixtures import SIGN_FIXTURES
from .resilience import ControlMatrix


class Family(str, enum.Enum):
    IDENTITY_STACK = "identity-stack"
    SIGN_ORTHOGONAL = "sign-orthogonal"
    APPENDIX_FIXTURE = "fixture"


@dataclass(frozen=True)
class GeneratorSpec:
    n: int = 1
    p: int = 1
    family: Family = Family.IDENTITY_STACK
    fixture_name: str | None = None
    m: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise InvalidInput("n and p must be at least 1")


def gen_identity_stack(n: int, p: int) -> ControlMatrix:
    """``[I_n ... I_n D]`` with 2p identity blocks and ``D = ones / sqrt(n)``.

    This n x (2pn + 1) layout is p-resilient.
    """
    if n < 1 or p < 1:
        raise InvalidInput("n and p must be at least 1")
    blocks = [np.eye(n)] * (2 * p) + [np.full((n, 1), 1.0 / math.sqrt(n))]
    labels = [f"I{k + 1}.e{i + 1}" for k in range(2 * p) for i in range(n)] + ["D"]
    return ControlMatrix(np.hstack(blocks), tuple(labels))


def gen_hadamard(order: int) -> np.ndarray:
    """Sylvester Hadamard matrix; only powers of two are supported."""
    if order < 1 or order & (order - 1):
        raise UnsupportedOrder(f"Hadamard order {order} is not a power of two")
    H = np.ones((1, 1))
    while H.shape[0] < order:
        H = np.block([[H, H], [H, -H]])
    return H


def _row_order(m: int) -> list[int]:
    # all-ones row, then m/2, m/4, ..., 1, then every remaining row
    first = [0]
    k = m // 2
    while k >= 1:
        first.append(k)
        k //= 2
    return first + [r for r in range(m) if r not in first]


def supported_order(n: int, m: int | None = None) -> int:
    """Smallest power of two that is >= max(m, 2n + 1)."""
    need = max(2 * n + 1, m or 0)
    return 1 << (need - 1).bit_length()


def gen_sign_orthogonal(n: int, m: int | None = None) -> ControlMatrix:
    """n rows of a Sylvester Hadamard matrix scaled to orthonormal rows.

    All columns then have norm ``sqrt(n/m)``, so the result is 1-resilient
    whenever ``m >= 2n + 1``. An unsupported ``m`` is rounded up to the next
    admissible power of two.
    """
    if n < 1:
        raise InvalidInput("n must be at least 1")
    order = m if m and m >= 2 * n + 1 and not m & (m - 1) else supported_order(n, m)
    H = gen_hadamard(order)
    rows = _row_order(order)[:n]
    return ControlMatrix(H[rows] / math.sqrt(order))


def appendix_fixture(name: str) -> ControlMatrix:
    try:
        entries = SIGN_FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; choose from {sorted(SIGN_FIXTURES)}") from None
    return ControlMatrix(entries.copy())


def generate(spec: GeneratorSpec) -> ControlMatrix:
    if spec.family is Family.IDENTITY_STACK:
        return gen_identity_stack(spec.n, spec.p)
    if spec.family is Family.SIGN_ORTHOGONAL:
        return gen_sign_orthogonal(spec.n, spec.m)
    if spec.fixture_name is None:
        raise InvalidInput("fixture family needs a fixture name")
    return appendix_fixture(spec.fixture_name)


def append_negated_column(bbar: ControlMatrix, column: int = 0) -> ControlMatrix:
    """Append the opposite of one column, creating a collinear pair."""
    e = bbar.entries
    return ControlMatrix(np.hstack([e, -e[:, [column]]]))
