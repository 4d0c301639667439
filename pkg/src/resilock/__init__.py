"""Resilient reachability of linear systems after losing control of actuators."""
from .errors import ResilockError
from .linalg import DEFAULT_TOL, Tolerance
from .resilience import (
    ControlMatrix,
    LossScenario,
    check_p_resilience,
    degree_of_resilience,
    is_loss_tolerable,
    split,
)

__all__ = [
    "ControlMatrix",
    "DEFAULT_TOL",
    "LossScenario",
    "ResilockError",
    "Tolerance",
    "check_p_resilience",
    "degree_of_resilience",
    "is_loss_tolerable",
    "split",
]
__version__ = "0.1.0"
